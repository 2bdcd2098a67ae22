//! Front-end rewrites: negation normal form, inequation elimination, CNF by
//! distribution, and the transformation to cubic systems.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::formula::{EquationSystem, Formula, LenAtom, WordEquation, WordTerm};
use crate::sym::{Sym, VarName};

pub const DEFAULT_CNF_CAP: usize = 4096;

/// Pushes negations down to atoms. `¬(α = β)` becomes `α ≠ β` and negated
/// length atoms are flipped.
pub fn nnf(f: &Formula) -> Formula {
    fn go(f: &Formula, neg: bool) -> Formula {
        match (f, neg) {
            (Formula::True, false) | (Formula::False, true) => Formula::True,
            (Formula::True, true) | (Formula::False, false) => Formula::False,
            (Formula::Eq(e), false) | (Formula::Neq(e), true) => Formula::Eq(e.clone()),
            (Formula::Eq(e), true) | (Formula::Neq(e), false) => Formula::Neq(e.clone()),
            (Formula::Len(a), false) => Formula::Len(a.clone()),
            (Formula::Len(a), true) => Formula::Len(a.negated()),
            (Formula::Not(g), _) => go(g, !neg),
            (Formula::And(gs), false) | (Formula::Or(gs), true) => Formula::and(gs.iter().map(|g| go(g, neg))),
            (Formula::Or(gs), false) | (Formula::And(gs), true) => Formula::or(gs.iter().map(|g| go(g, neg))),
        }
    }
    go(f, false)
}

/// Counter for solver-introduced variable names.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    next: usize,
}

impl Fresh {
    pub fn new() -> Self {
        Fresh::default()
    }

    fn take(&mut self) -> usize {
        self.next += 1;
        self.next - 1
    }
}

fn term(parts: &[&[Sym]]) -> WordTerm {
    WordTerm::new(parts.iter().flat_map(|p| p.iter().cloned()).collect())
}

/// `α ≠ β` as a disjunction of equations over `sigma`: one side is a strict
/// prefix of the other, or they differ at some position.
pub fn expand_inequation(e: &WordEquation, sigma: &[char], fresh: &mut Fresh) -> Formula {
    let k = fresh.take();
    let v = |role: &str| Sym::Var(VarName::from(format!("{role}!{k}")));
    let (x, x1, x2, y) = (v("x"), v("x1"), v("x2"), v("y"));
    let (a, b) = (e.lhs.syms(), e.rhs.syms());
    let mut out = Vec::new();
    for &c in sigma {
        let c = Sym::Const(c);
        out.push(Formula::Eq(WordEquation::new(WordTerm::new(a.to_vec()), term(&[b, &[c.clone(), x.clone()]]))));
        out.push(Formula::Eq(WordEquation::new(term(&[a, &[c, x.clone()]]), WordTerm::new(b.to_vec()))));
    }
    for &c1 in sigma {
        for &c2 in sigma {
            if c1 == c2 {
                continue;
            }
            let l = WordEquation::new(WordTerm::new(a.to_vec()), term(&[&[y.clone(), Sym::Const(c1), x1.clone()]]));
            let r = WordEquation::new(WordTerm::new(b.to_vec()), term(&[&[y.clone(), Sym::Const(c2), x2.clone()]]));
            out.push(Formula::And(vec![Formula::Eq(l), Formula::Eq(r)]));
        }
    }
    Formula::or(out)
}

/// NNF, then every inequation replaced by [`expand_inequation`].
pub fn eliminate_inequalities(f: &Formula, sigma: &[char], fresh: &mut Fresh) -> Formula {
    fn go(f: &Formula, sigma: &[char], fresh: &mut Fresh) -> Formula {
        match f {
            Formula::Neq(e) => expand_inequation(e, sigma, fresh),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| go(g, sigma, fresh)).collect::<Vec<_>>()),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| go(g, sigma, fresh)).collect::<Vec<_>>()),
            Formula::Not(g) => Formula::Not(Box::new(go(g, sigma, fresh))),
            other => other.clone(),
        }
    }
    go(&nnf(f), sigma, fresh)
}

/// A literal of a negation-free CNF.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Eq(WordEquation),
    Len(LenAtom),
}

/// Clauses of a negation-free formula by distribution. Clauses containing a
/// syntactically true equation are dropped; an empty clause means false.
pub fn cnf_clauses(f: &Formula, cap: usize) -> Result<Vec<Vec<Atom>>> {
    fn go(f: &Formula, cap: usize) -> Result<Vec<BTreeSet<Atom>>> {
        let over = || Error::Resource(format!("CNF exceeds {cap} clauses"));
        Ok(match f {
            Formula::True => Vec::new(),
            Formula::False => vec![BTreeSet::new()],
            Formula::Eq(e) if e.lhs == e.rhs => Vec::new(),
            Formula::Eq(e) => vec![BTreeSet::from([Atom::Eq(e.clone())])],
            Formula::Len(a) if a.coeffs.is_empty() => {
                if a.bound >= 0 {
                    Vec::new()
                } else {
                    vec![BTreeSet::new()]
                }
            }
            Formula::Len(a) => vec![BTreeSet::from([Atom::Len(a.clone())])],
            Formula::Neq(_) | Formula::Not(_) => {
                return Err(Error::Contract(format!("negation left in CNF input: {f}")))
            }
            Formula::And(gs) => {
                let mut out = Vec::new();
                for g in gs {
                    out.extend(go(g, cap)?);
                    if out.len() > cap {
                        return Err(over());
                    }
                }
                out
            }
            Formula::Or(gs) => {
                let mut acc: Vec<BTreeSet<Atom>> = vec![BTreeSet::new()];
                for g in gs {
                    let cs = go(g, cap)?;
                    if acc.len().saturating_mul(cs.len()) > cap {
                        return Err(over());
                    }
                    let mut next = Vec::with_capacity(acc.len() * cs.len());
                    for a in &acc {
                        for c in &cs {
                            next.push(a.union(c).cloned().collect());
                        }
                    }
                    acc = next;
                }
                acc
            }
        })
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for c in go(f, cap)? {
        if seen.insert(c.clone()) {
            out.push(c.into_iter().collect());
        }
    }
    Ok(out)
}

/// CNF of a negation-free formula over equations only.
pub fn to_cnf(f: &Formula, cap: usize) -> Result<EquationSystem> {
    let clauses = cnf_clauses(f, cap)?
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|a| match a {
                    Atom::Eq(e) => Ok(e),
                    Atom::Len(a) => Err(Error::Contract(format!("length atom {a} in a word CNF"))),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(EquationSystem { clauses })
}

/// Splits clauses into word clauses and length clauses. A clause mixing
/// both kinds is rejected.
pub fn split_clauses(clauses: Vec<Vec<Atom>>) -> Result<(EquationSystem, Formula)> {
    let mut words = Vec::new();
    let mut lens = Vec::new();
    for c in clauses {
        let eqs: Vec<WordEquation> = c
            .iter()
            .filter_map(|a| match a {
                Atom::Eq(e) => Some(e.clone()),
                _ => None,
            })
            .collect();
        if eqs.is_empty() {
            lens.push(Formula::or(c.into_iter().map(|a| match a {
                Atom::Len(l) => Formula::Len(l),
                Atom::Eq(_) => unreachable!(),
            })));
        } else if eqs.len() == c.len() {
            words.push(eqs);
        } else {
            return Err(Error::Unsupported(String::from("a disjunction mixing word and length atoms")));
        }
    }
    Ok((EquationSystem { clauses: words }, Formula::and(lens)))
}

/// Replaces two occurrences of an over-used variable by a fresh copy until
/// every variable occurs at most three times. The two occurrences are the
/// first two in reading order (equations in order, left side first).
pub fn to_cubic(s: &EquationSystem, fresh: &mut Fresh) -> Result<EquationSystem> {
    if !s.is_conjunction() {
        return Err(Error::Contract(String::from("to_cubic expects a conjunction")));
    }
    let mut eqs: Vec<WordEquation> = s.equations().cloned().collect();
    loop {
        let sys = EquationSystem::conjunction(eqs.iter().cloned());
        let Some(x) = sys.vars().into_iter().find(|x| sys.occurrences(x) > 3) else {
            return Ok(sys);
        };
        let x2 = VarName::from(format!("{x}'{}", fresh.take()));
        let mut left = 2;
        for e in eqs.iter_mut() {
            for side in [&mut e.lhs, &mut e.rhs] {
                for sym in side.0.iter_mut() {
                    if left > 0 && sym.as_var() == Some(&x) {
                        *sym = Sym::Var(x2.clone());
                        left -= 1;
                    }
                }
            }
        }
        eqs.push(WordEquation::new(WordTerm::new(vec![Sym::Var(x)]), WordTerm::new(vec![Sym::Var(x2)])));
    }
}
