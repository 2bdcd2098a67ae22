mod common;

use proptest::prelude::*;
use wordeq_core::oracle::{brute_force, OracleResult, DEFAULT_NODE_CAP};
use wordeq_core::preprocess::{eliminate_inequalities, to_cubic, Fresh};
use wordeq_core::*;

fn term() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof![Just('a'), Just('b'), Just('x'), Just('y')], 0..4)
        .prop_map(|v| v.into_iter().collect())
}

fn equation() -> impl Strategy<Value = WordEquation> {
    (term(), term()).prop_map(|(l, r)| WordEquation::compact(&l, &r, "xy"))
}

fn problem(f: Formula) -> Problem {
    Problem::new(['a', 'b'], [], f)
}

fn quick() -> SolveOptions {
    SolveOptions { budget: Budget { max_iters: 64, timeout: None, ..Budget::default() }, ..SolveOptions::default() }
}

proptest! {
    #![proptest_config(common::cfg(150))]

    #[test]
    fn quadratic_equations_agree(e in equation()) {
        let s = EquationSystem::conjunction([e.clone()]);
        prop_assume!(s.is_quadratic());
        let p = problem(Formula::Eq(e));
        let out = solve(&p, &quick(), &NoClock).unwrap();
        let oracle = brute_force(&p, 4, DEFAULT_NODE_CAP);
        match (&out.result, &oracle) {
            (SolveResult::Sat(m), _) => prop_assert!(p.verify(m)),
            (SolveResult::Unsat, OracleResult::Sat(m)) => prop_assert!(false, "oracle model {:?}", m),
            (SolveResult::Unsat, _) => {}
            (SolveResult::Unknown(r), _) => prop_assert!(false, "quadratic input gave unknown: {}", r),
        }
    }

    #[test]
    fn inequation_elimination_is_equisatisfiable(e in equation(), g in equation()) {
        let f = Formula::and([Formula::Eq(g), Formula::Neq(e.clone())]);
        let p = problem(f.clone());
        let q = problem(eliminate_inequalities(&f, &['a', 'b'], &mut Fresh::new()));
        // models of the rewrite restrict to models of the input
        if let OracleResult::Sat(m) = brute_force(&q, 3, DEFAULT_NODE_CAP) {
            prop_assert!(p.verify(&m));
        }
        // models of the input extend to models of the rewrite
        if let OracleResult::Sat(mut m) = brute_force(&p, 3, DEFAULT_NODE_CAP) {
            let (a, b): (Vec<char>, Vec<char>) = (e.lhs.eval(&m).chars().collect(), e.rhs.eval(&m).chars().collect());
            let k = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
            let s = |v: &[char]| v.iter().collect::<String>();
            let mut put = |n: &str, v: String| { m.insert(VarName::new(n), v); };
            if k == b.len() {
                put("x!0", s(&a[k + 1..]));
            } else if k == a.len() {
                put("x!0", s(&b[k + 1..]));
            } else {
                put("y!0", s(&a[..k]));
                put("x1!0", s(&a[k + 1..]));
                put("x2!0", s(&b[k + 1..]));
            }
            prop_assert!(q.verify(&m), "{:?}", m);
        }
    }

    #[test]
    fn to_cubic_is_cubic_and_equisatisfiable(l in "[axb]{3,6}", r in "[axy]{0,3}") {
        let s = EquationSystem::conjunction([WordEquation::compact(&l, &r, "xy")]);
        let c = to_cubic(&s, &mut Fresh::new()).unwrap();
        prop_assert!(c.is_cubic());
        let f = |s: &EquationSystem| Formula::and(s.equations().cloned().map(Formula::Eq));
        let a = matches!(brute_force(&problem(f(&s)), 3, DEFAULT_NODE_CAP), OracleResult::Sat(_));
        let b = matches!(brute_force(&problem(f(&c)), 3, DEFAULT_NODE_CAP), OracleResult::Sat(_));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn oracle_is_monotone(e in equation()) {
        let p = problem(Formula::Eq(e));
        if let OracleResult::Sat(m) = brute_force(&p, 2, DEFAULT_NODE_CAP) {
            prop_assert!(p.verify(&m));
            prop_assert_eq!(brute_force(&p, 4, DEFAULT_NODE_CAP), OracleResult::Sat(m));
        }
    }
}

#[test]
fn reference_examples() {
    let run = |f: Formula| solve(&problem(f), &SolveOptions::default(), &NoClock).unwrap();
    let eq = |l: &str, r: &str| Formula::Eq(WordEquation::compact(l, r, "xyzw"));
    assert_eq!(run(eq("xay", "yx")).result, SolveResult::Unsat);
    let o = run(eq("xy", "ax"));
    let SolveResult::Sat(m) = &o.result else { panic!() };
    assert_eq!(format!("{}{}", m[&VarName::new("x")], m[&VarName::new("y")]), format!("a{}", m[&VarName::new("x")]));
    let two_eqs = Formula::and([eq("xz", "ab"), eq("wabyx", "awbzy")]);
    assert_eq!(run(two_eqs.clone()).result, SolveResult::Unsat);
    assert!(matches!(brute_force(&problem(two_eqs), 6, DEFAULT_NODE_CAP), OracleResult::NoModelUpTo(6)));
}

#[test]
fn reach_sets_are_monotone_and_pad_closed() {
    let p = problem(Formula::Eq(WordEquation::compact("xay", "yx", "xy")));
    let o = solve(&p, &SolveOptions::default(), &NoClock).unwrap();
    let h = o.history.unwrap();
    let alpha = h.processed.alphabet().clone();
    let pad = Fa::word(alpha.clone(), &[TrackSym::pad()]).unwrap();
    let mut acc = Fa::empty(alpha);
    for it in &h.iterations {
        let next = acc.union(&it.reach).unwrap();
        assert!(acc.included_in(&next).unwrap());
        acc = next;
        let padded = it.reach.concat(&pad).unwrap();
        assert!(padded.included_in(&it.reach).unwrap());
    }
}
