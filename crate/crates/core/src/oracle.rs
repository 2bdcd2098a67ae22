//! Bounded brute-force satisfiability check.
//!
//! Assignments are visited in a fixed canonical order: by the longest value,
//! then by total length, then by the tuple of lengths, then
//! lexicographically by the values (variables in name order, letters in
//! alphabet order). The first hit is therefore the same for every bound
//! that admits it.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::formula::{Formula, Model, Problem, WordTerm};
use crate::sym::{Sym, VarName};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Sat(Model),
    NoModelUpTo(usize),
    /// The node limit was hit before the search space was exhausted.
    Cap {
        nodes: u64,
        max_len: usize,
    },
}

pub const DEFAULT_NODE_CAP: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tri {
    False,
    Unknown,
    True,
}

impl Tri {
    fn not(self) -> Tri {
        match self {
            Tri::False => Tri::True,
            Tri::True => Tri::False,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

struct Search<'a> {
    f: &'a Formula,
    sigma: &'a [char],
    vars: &'a [VarName],
    lens: Vec<usize>,
    vals: Vec<Option<Vec<char>>>,
    nodes: u64,
    cap: u64,
}

impl Search<'_> {
    fn index(&self, v: &VarName) -> Option<usize> {
        self.vars.binary_search(v).ok()
    }

    fn len_of(&self, v: &VarName) -> usize {
        self.index(v).map_or(0, |i| self.lens[i])
    }

    fn side(&self, t: &WordTerm) -> Vec<Option<char>> {
        let mut out = Vec::new();
        for s in t.syms() {
            match s {
                Sym::Const(c) => out.push(Some(*c)),
                Sym::Var(v) => {
                    if let Some(i) = self.index(v) {
                        match &self.vals[i] {
                            Some(w) => out.extend(w.iter().map(|c| Some(*c))),
                            None => out.extend(core::iter::repeat_n(None, self.lens[i])),
                        }
                    }
                }
                _ => {}
            }
        }
        out
    }

    fn eval_eq(&self, l: &WordTerm, r: &WordTerm) -> Tri {
        let len = |t: &WordTerm| -> usize {
            t.syms().iter().map(|s| if let Sym::Var(v) = s { self.len_of(v) } else { 1 }).sum()
        };
        if len(l) != len(r) {
            return Tri::False;
        }
        let (a, b) = (self.side(l), self.side(r));
        let mut all = true;
        for (x, y) in a.iter().zip(&b) {
            match (x, y) {
                (Some(x), Some(y)) if x != y => return Tri::False,
                (Some(_), Some(_)) => {}
                _ => all = false,
            }
        }
        if all {
            Tri::True
        } else {
            Tri::Unknown
        }
    }

    fn eval(&self, f: &Formula) -> Tri {
        match f {
            Formula::True => Tri::True,
            Formula::False => Tri::False,
            Formula::Eq(e) => self.eval_eq(&e.lhs, &e.rhs),
            Formula::Neq(e) => self.eval_eq(&e.lhs, &e.rhs).not(),
            Formula::Len(a) => {
                let lens: BTreeMap<VarName, usize> = a.coeffs.keys().map(|v| (v.clone(), self.len_of(v))).collect();
                if a.eval(&lens) {
                    Tri::True
                } else {
                    Tri::False
                }
            }
            Formula::Not(g) => self.eval(g).not(),
            Formula::And(gs) => {
                let mut acc = Tri::True;
                for g in gs {
                    match self.eval(g) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => acc = Tri::Unknown,
                        Tri::True => {}
                    }
                }
                acc
            }
            Formula::Or(gs) => {
                let mut acc = Tri::False;
                for g in gs {
                    match self.eval(g) {
                        Tri::True => return Tri::True,
                        Tri::Unknown => acc = Tri::Unknown,
                        Tri::False => {}
                    }
                }
                acc
            }
        }
    }

    /// Assigns variables from `k` on. `None` means the node cap was hit.
    fn assign(&mut self, k: usize) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return None;
        }
        match self.eval(self.f) {
            Tri::False => return Some(false),
            Tri::True if k == self.vars.len() => return Some(true),
            _ if k == self.vars.len() => return Some(false),
            _ => {}
        }
        let n = self.lens[k];
        if self.sigma.is_empty() && n > 0 {
            return Some(false);
        }
        let mut digits = vec![0usize; n];
        loop {
            self.vals[k] = Some(digits.iter().map(|&d| self.sigma[d]).collect());
            match self.assign(k + 1) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            // odometer, last position fastest
            let mut i = n;
            loop {
                if i == 0 {
                    self.vals[k] = None;
                    return Some(false);
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < self.sigma.len() {
                    break;
                }
                digits[i] = 0;
            }
        }
    }
}

/// Visits the length tuples with every entry at most `m` and some entry
/// equal to `m`, ordered by sum and then lexicographically, until `f`
/// returns `Some`.
fn each_tuple_with_max<T>(n: usize, m: usize, f: &mut dyn FnMut(&[usize]) -> Option<T>) -> Option<T> {
    fn fill<T>(
        t: &mut Vec<usize>,
        n: usize,
        m: usize,
        left: usize,
        f: &mut dyn FnMut(&[usize]) -> Option<T>,
    ) -> Option<T> {
        let k = t.len();
        if k == n {
            return if left == 0 && (n == 0 || t.contains(&m)) { f(t) } else { None };
        }
        // the remaining entries can absorb at most (n - k - 1) * m
        let lo = left.saturating_sub((n - k - 1) * m);
        for v in lo..=left.min(m) {
            t.push(v);
            let r = fill(t, n, m, left - v, f);
            t.pop();
            if r.is_some() {
                return r;
            }
        }
        None
    }
    let top = if n == 0 { 0 } else { n * m };
    let mut t = Vec::with_capacity(n);
    (m.min(top)..=top).find_map(|sum| fill(&mut t, n, m, sum, f))
}

/// The first model in canonical order with every value of length at most
/// `max_len`.
pub fn brute_force(p: &Problem, max_len: usize, node_cap: u64) -> OracleResult {
    let mut vars: Vec<VarName> = p.vars.clone();
    vars.extend(p.formula.vars());
    vars.sort();
    vars.dedup();
    let mut s = Search {
        f: &p.formula,
        sigma: &p.alphabet,
        vars: &vars,
        lens: vec![0; vars.len()],
        vals: vec![None; vars.len()],
        nodes: 0,
        cap: node_cap,
    };
    for m in 0..=max_len {
        if vars.is_empty() && m > 0 {
            break;
        }
        let hit = each_tuple_with_max(vars.len(), m, &mut |t| {
            s.lens = t.to_vec();
            s.vals.iter_mut().for_each(|v| *v = None);
            match s.assign(0) {
                None => Some(OracleResult::Cap { nodes: s.nodes - 1, max_len }),
                Some(true) => Some(OracleResult::Sat(
                    vars.iter()
                        .zip(&s.vals)
                        .map(|(v, w)| (v.clone(), w.as_ref().map_or(String::new(), |w| w.iter().collect())))
                        .collect(),
                )),
                Some(false) => None,
            }
        });
        if let Some(r) = hit {
            return r;
        }
    }
    OracleResult::NoModelUpTo(max_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{LenAtom, WordEquation};

    fn problem(sigma: &[char], f: Formula) -> Problem {
        Problem::new(sigma.iter().copied(), [], f)
    }

    #[test]
    fn canonical_hits() {
        let p = problem(&['a'], Formula::Eq(WordEquation::compact("xy", "ax", "xy")));
        let OracleResult::Sat(m) = brute_force(&p, 2, DEFAULT_NODE_CAP) else { panic!() };
        assert_eq!(m[&VarName::new("x")], "");
        assert_eq!(m[&VarName::new("y")], "a");
        let p = problem(&['a', 'b'], Formula::Eq(WordEquation::compact("xay", "yx", "xy")));
        assert_eq!(brute_force(&p, 4, DEFAULT_NODE_CAP), OracleResult::NoModelUpTo(4));
        let p = problem(&['a'], Formula::Eq(WordEquation::compact("", "", "")));
        assert_eq!(brute_force(&p, 3, DEFAULT_NODE_CAP), OracleResult::Sat(Model::new()));
    }

    #[test]
    fn lengths_and_negation() {
        let x = VarName::new("x");
        let f = Formula::and([
            Formula::Neq(WordEquation::compact("x", "a", "x")),
            Formula::Len(LenAtom::new([(x.clone(), -1)], -1)),
        ]);
        let OracleResult::Sat(m) = brute_force(&problem(&['a', 'b'], f), 2, DEFAULT_NODE_CAP) else { panic!() };
        assert_eq!(m[&x], "b");
    }

    #[test]
    fn cap_is_reported() {
        let p = problem(&['a', 'b'], Formula::Eq(WordEquation::compact("xay", "yx", "xy")));
        assert!(matches!(brute_force(&p, 6, 10), OracleResult::Cap { .. }));
    }

    #[test]
    fn tuple_order() {
        let collect = |n, m| {
            let mut out = Vec::new();
            each_tuple_with_max::<()>(n, m, &mut |t| {
                out.push(t.to_vec());
                None
            });
            out
        };
        assert_eq!(collect(2, 1), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(collect(0, 0), vec![Vec::<usize>::new()]);
        assert_eq!(collect(2, 0), vec![vec![0, 0]]);
        let t = collect(3, 2);
        assert_eq!(t.len(), 27 - 8);
        assert!(t.windows(2).all(|w| (w[0].iter().sum::<usize>(), &w[0]) < (w[1].iter().sum::<usize>(), &w[1])));
    }
}
