use proptest::prelude::*;
use proptest::test_runner::{Config, FileFailurePersistence, RngSeed};

use wordeq::input::{parse_str, Format};
use wordeq::model::{parse_model, render};
use wordeq_core::preprocess::nnf;
use wordeq_core::{solve, Budget, NoClock, SolveOptions, SolveResult};

fn cfg(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed_2024),
        failure_persistence: Some(Box::new(FileFailurePersistence::Off)),
        ..Config::default()
    }
}

fn side() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop::sample::select(vec!['a', 'b', 'x', 'y']), 0..4)
        .prop_map(|v| v.into_iter().collect())
}

fn spaced(s: &str) -> String {
    if s.is_empty() {
        "ε".into()
    } else {
        s.chars().map(String::from).collect::<Vec<_>>().join(" ")
    }
}

fn smt_term(s: &str) -> String {
    let parts: Vec<String> =
        s.chars().map(|c| if c == 'x' || c == 'y' { c.to_string() } else { format!("\"{c}\"") }).collect();
    match parts.len() {
        0 => "\"\"".into(),
        1 => parts[0].clone(),
        _ => format!("(str.++ {})", parts.join(" ")),
    }
}

proptest! {
    #![proptest_config(cfg(120))]

    #[test]
    fn native_and_smtlib_agree(eqs in proptest::collection::vec((side(), side(), any::<bool>()), 1..3), bound in 0i64..4) {
        let mut native = String::from("alphabet: a b\nvars: x y\n");
        let mut smt = String::from("(declare-fun x () String)\n(declare-fun y () String)\n");
        for (l, r, neg) in &eqs {
            let op = if *neg { "!=" } else { "=" };
            native.push_str(&format!("{} {op} {}\n", spaced(l), spaced(r)));
            let atom = format!("(= {} {})", smt_term(l), smt_term(r));
            smt.push_str(&format!("(assert {})\n", if *neg { format!("(not {atom})") } else { atom }));
        }
        native.push_str(&format!("len: |x| <= {bound} + |y|\n"));
        smt.push_str(&format!("(assert (<= (str.len x) (+ {bound} (str.len y))))\n"));
        let a = parse_str(&native, Format::Native).unwrap();
        let b = parse_str(&smt, Format::SmtLib).unwrap();
        // the SMT side writes inequations as negated equations
        prop_assert_eq!(nnf(&a.problem.formula), nnf(&b.problem.formula));
    }

    #[test]
    fn printed_models_parse_and_verify(l in side(), r in side()) {
        let text = format!("alphabet: a b\nvars: x y\n{} = {}\n", spaced(&l), spaced(&r));
        let input = parse_str(&text, Format::Native).unwrap();
        let opts = SolveOptions { budget: Budget { max_iters: 64, timeout: None, ..Budget::default() }, ..SolveOptions::default() };
        let out = solve(&input.problem, &opts, &NoClock).unwrap();
        if let SolveResult::Sat(m) = out.result {
            let back = parse_model(&render(&input, &m)).unwrap();
            let m2 = input.internal_model(&back.strings, &back.ints);
            prop_assert!(input.problem.verify(&m2));
            prop_assert_eq!(back.strings.len(), 2);
        }
    }
}
