//! From a parsed problem to a verified verdict.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::encoding::{cnf_encode, Layout, Universe};
use crate::error::{Error, Result};
use crate::fa::Fa;
use crate::formula::{EquationSystem, Formula, Model, Problem, WordEquation, WordTerm};
use crate::length::formula_to_fa;
use crate::preprocess::{cnf_clauses, eliminate_inequalities, split_clauses, to_cubic, Fresh, DEFAULT_CNF_CAP};
use crate::rmc::{rmc_solve, Budget, Clock, Mode, ReachHistory, RmcProblem, SolveResult, Stats, UnknownReason};
use crate::sym::{TrackSym, VarName};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// `None` picks quadratic for quadratic inputs and cubic otherwise.
    pub mode: Option<Mode>,
    pub budget: Budget,
    pub cnf_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: None, budget: Budget::default(), cnf_cap: DEFAULT_CNF_CAP }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub result: SolveResult,
    /// The mode that actually ran, if the loop ran at all.
    pub mode: Option<Mode>,
    pub stats: Stats,
    pub history: Option<ReachHistory>,
    pub rmc: Option<RmcProblem>,
}

impl Outcome {
    fn direct(result: SolveResult) -> Self {
        Outcome { result, mode: None, stats: Stats::default(), history: None, rmc: None }
    }
}

/// The word part, the length part and the universe of a problem, after
/// inequation elimination and CNF conversion.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub system: EquationSystem,
    pub length: Formula,
}

pub fn prepare(p: &Problem, cnf_cap: usize) -> Result<Option<Prepared>> {
    let f = eliminate_inequalities(&p.formula, &p.alphabet, &mut Fresh::new());
    let clauses = match cnf_clauses(&f, cnf_cap) {
        Ok(c) => c,
        Err(Error::Resource(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let (system, length) = split_clauses(clauses)?;
    Ok(Some(Prepared { system, length }))
}

/// Picks the mode that will run. Quadratic on a non-quadratic input is a
/// contract error; the cut cannot carry length tracks or disjunctions, so
/// those inputs fall back to the complete mode.
pub fn select_mode(requested: Option<Mode>, s: &EquationSystem, has_length: bool) -> Result<Mode> {
    let quadratic = s.is_quadratic();
    match requested {
        Some(Mode::Quadratic) if !quadratic => {
            Err(Error::Contract(format!("quadratic mode on an input with {} occurrences", s.max_occurrences())))
        }
        Some(Mode::CubicCut) if has_length || !s.is_conjunction() => Ok(Mode::Complete),
        Some(m) => Ok(m),
        None if quadratic => Ok(Mode::Quadratic),
        None if has_length || !s.is_conjunction() => Ok(Mode::Complete),
        None => Ok(Mode::CubicCut),
    }
}

/// Builds the RMC instance for a prepared system in the given mode.
pub fn build_problem(p: &Problem, prep: &Prepared, mode: Mode) -> Result<RmcProblem> {
    let mut system = prep.system.clone();
    if system.clauses.is_empty() {
        system = EquationSystem::conjunction([WordEquation::new(WordTerm::empty(), WordTerm::empty())]);
    }
    if mode == Mode::CubicCut {
        system = to_cubic(&system, &mut Fresh::new())?;
    }
    let has_length = prep.length != Formula::True;
    let mut vars: BTreeSet<VarName> = system.vars();
    if has_length {
        vars.extend(prep.length.vars());
    }
    let layout = if system.clauses.len() == 1 { Layout::Single } else { Layout::System };
    let mut uni = Universe::new(p.alphabet.iter().copied(), vars.iter().cloned());
    if layout == Layout::System {
        uni = uni.with_delim();
    }
    let len_vars: Option<Vec<VarName>> = has_length.then(|| uni.vars.clone());
    if let Some(lv) = &len_vars {
        uni = uni.with_len_width(lv.len() as u8);
    }
    let alpha = uni.alphabet();
    let mut initial = cnf_encode(&system, &alpha)?;
    if let Some(lv) = &len_vars {
        let sep = Fa::word(alpha.clone(), &[TrackSym::LenSep])?;
        let len = formula_to_fa(&prep.length, lv, &alpha)?;
        initial = initial.concat_nfa(&sep)?.concat_nfa(&len)?.normalize();
    }
    RmcProblem::new(uni, layout, initial, mode, len_vars)
}

/// Drops solver-introduced names and gives every declared variable a value.
pub fn finish_model(p: &Problem, m: &Model) -> Model {
    let mut out: Model = m.iter().filter(|(k, _)| !k.is_reserved()).map(|(k, v)| (k.clone(), v.clone())).collect();
    for v in p.vars.iter().cloned().chain(p.formula.vars()) {
        out.entry(v).or_default();
    }
    out
}

/// The full pipeline. Every `Sat` model has been checked against the
/// original formula.
pub fn solve(p: &Problem, opts: &SolveOptions, clock: &dyn Clock) -> Result<Outcome> {
    let Some(prep) = prepare(p, opts.cnf_cap)? else {
        return Ok(Outcome::direct(SolveResult::Unknown(UnknownReason::CnfCap)));
    };
    if prep.system.clauses.iter().any(|c| c.is_empty()) || prep.length == Formula::False {
        return Ok(Outcome::direct(SolveResult::Unsat));
    }
    let has_length = prep.length != Formula::True;
    if prep.system.clauses.is_empty() && !has_length {
        let m = finish_model(p, &Model::new());
        return if p.verify(&m) {
            Ok(Outcome::direct(SolveResult::Sat(m)))
        } else {
            Err(Error::Internal(String::from("empty constraint rejected the empty model")))
        };
    }
    let mode = select_mode(opts.mode, &prep.system, has_length)?;
    let rmc = build_problem(p, &prep, mode)?;
    let (result, history, stats) = rmc_solve(&rmc, &opts.budget, clock)?;
    let result = match result {
        SolveResult::Sat(m) => {
            let m = finish_model(p, &m);
            if !p.verify(&m) {
                return Err(Error::Internal(format!("extracted model {m:?} does not satisfy the input")));
            }
            SolveResult::Sat(m)
        }
        r => r,
    };
    Ok(Outcome { result, mode: Some(mode), stats, history: Some(history), rmc: Some(rmc) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::LenAtom;
    use crate::rmc::NoClock;
    use alloc::boxed::Box;
    use alloc::vec;

    fn eqf(l: &str, r: &str) -> Formula {
        Formula::Eq(WordEquation::compact(l, r, "xyzw"))
    }

    fn run(sigma: &[char], f: Formula) -> SolveResult {
        let p = Problem::new(sigma.iter().copied(), [], f);
        solve(&p, &SolveOptions::default(), &NoClock).unwrap().result
    }

    #[test]
    fn basics() {
        assert_eq!(run(&['a'], eqf("xay", "yx")), SolveResult::Unsat);
        assert!(matches!(run(&['a'], eqf("xy", "ax")), SolveResult::Sat(_)));
        assert!(matches!(run(&['a'], Formula::True), SolveResult::Sat(_)));
        assert_eq!(run(&['a'], Formula::False), SolveResult::Unsat);
        assert!(matches!(run(&['a'], eqf("a", "a")), SolveResult::Sat(_)));
    }

    #[test]
    fn inequation() {
        let f = Formula::and([eqf("xy", "yx"), Formula::Neq(WordEquation::compact("x", "y", "xy"))]);
        let r = run(&['a', 'b'], f.clone());
        let SolveResult::Sat(m) = r else { panic!("{r:?}") };
        assert!(f.eval(&m));
    }

    #[test]
    fn lengths() {
        let (x, y) = (VarName::new("x"), VarName::new("y"));
        let eq_len = |d: i64| {
            Formula::and([
                Formula::Len(LenAtom::new([(x.clone(), 1), (y.clone(), -1)], d)),
                Formula::Len(LenAtom::new([(x.clone(), -1), (y.clone(), 1)], -d)),
            ])
        };
        assert_eq!(run(&['a'], Formula::and([eqf("x", "ay"), eq_len(0)])), SolveResult::Unsat);
        let f = Formula::and([eqf("x", "ay"), eq_len(1)]);
        assert!(matches!(run(&['a'], f), SolveResult::Sat(_)));
        let g = Formula::and([eqf("x", "ay"), Formula::Not(Box::new(Formula::Len(LenAtom::new([(y.clone(), 1)], 1))))]);
        let SolveResult::Sat(m) = run(&['a', 'b'], g) else { panic!() };
        assert!(m[&y].len() >= 2);
    }

    #[test]
    fn mode_selection() {
        let q = EquationSystem::conjunction([WordEquation::compact("xx", "a", "x")]);
        let c = EquationSystem::conjunction([WordEquation::compact("xxx", "a", "x")]);
        let d = EquationSystem {
            clauses: vec![vec![WordEquation::compact("xxx", "a", "x"), WordEquation::compact("x", "b", "x")]],
        };
        assert_eq!(select_mode(None, &q, false).unwrap(), Mode::Quadratic);
        assert_eq!(select_mode(None, &c, false).unwrap(), Mode::CubicCut);
        assert_eq!(select_mode(None, &c, true).unwrap(), Mode::Complete);
        assert_eq!(select_mode(None, &d, false).unwrap(), Mode::Complete);
        assert!(select_mode(Some(Mode::Quadratic), &c, false).is_err());
    }

    #[test]
    fn cubic_cut_solves_quartic() {
        let r = run(&['a'], eqf("xxxx", "aaaa"));
        let SolveResult::Sat(m) = r else { panic!("{r:?}") };
        assert_eq!(m[&VarName::new("x")], "a");
    }
}
