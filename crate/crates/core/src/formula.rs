//! Word terms, equations, length atoms and Boolean formulas over them.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::sym::{Sym, VarName};

/// An assignment of constant strings to variables.
pub type Model = BTreeMap<VarName, String>;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct WordTerm(pub Vec<Sym>);

impl WordTerm {
    pub fn new(syms: Vec<Sym>) -> Self {
        debug_assert!(syms.iter().all(Sym::is_term_symbol));
        WordTerm(syms)
    }

    pub fn empty() -> Self {
        WordTerm(Vec::new())
    }

    /// One symbol per character; characters in `vars` are variables.
    pub fn compact(s: &str, vars: &str) -> Self {
        WordTerm(
            s.chars()
                .map(|c| {
                    if vars.contains(c) {
                        let mut buf = [0u8; 4];
                        Sym::var(c.encode_utf8(&mut buf))
                    } else {
                        Sym::Const(c)
                    }
                })
                .collect(),
        )
    }

    pub fn syms(&self) -> &[Sym] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn occurrences(&self, x: &VarName) -> usize {
        self.0.iter().filter(|s| s.as_var() == Some(x)).count()
    }

    /// Replaces every occurrence of `x` by `by`.
    pub fn substitute(&self, x: &VarName, by: &[Sym]) -> Self {
        let mut out = Vec::with_capacity(self.0.len());
        for s in &self.0 {
            if s.as_var() == Some(x) {
                out.extend_from_slice(by);
            } else {
                out.push(s.clone());
            }
        }
        WordTerm(out)
    }

    pub fn eval(&self, m: &Model) -> String {
        let mut s = String::new();
        for sym in &self.0 {
            match sym {
                Sym::Const(c) => s.push(*c),
                Sym::Var(v) => {
                    if let Some(val) = m.get(v) {
                        s.push_str(val);
                    }
                }
                _ => {}
            }
        }
        s
    }

    /// Length of the term under per-variable lengths.
    pub fn eval_len(&self, lens: &BTreeMap<VarName, usize>) -> usize {
        self.0
            .iter()
            .map(|s| match s {
                Sym::Var(v) => lens.get(v).copied().unwrap_or(0),
                _ => 1,
            })
            .sum()
    }
}

impl fmt::Debug for WordTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for WordTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        // Multi-character names need separators to stay readable.
        let spaced = self.0.iter().any(|s| matches!(s, Sym::Var(v) if v.as_str().chars().count() > 1));
        for (i, s) in self.0.iter().enumerate() {
            if spaced && i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordEquation {
    pub lhs: WordTerm,
    pub rhs: WordTerm,
}

impl WordEquation {
    pub fn new(lhs: WordTerm, rhs: WordTerm) -> Self {
        WordEquation { lhs, rhs }
    }

    pub fn compact(lhs: &str, rhs: &str, vars: &str) -> Self {
        WordEquation::new(WordTerm::compact(lhs, vars), WordTerm::compact(rhs, vars))
    }

    /// Removes the longest common prefix.
    pub fn trimmed(&self) -> Self {
        let k = self.lhs.0.iter().zip(&self.rhs.0).take_while(|(a, b)| a == b).count();
        WordEquation::new(WordTerm(self.lhs.0[k..].to_vec()), WordTerm(self.rhs.0[k..].to_vec()))
    }

    pub fn is_trivial(&self) -> bool {
        self.lhs.is_empty() && self.rhs.is_empty()
    }

    pub fn occurrences(&self, x: &VarName) -> usize {
        self.lhs.occurrences(x) + self.rhs.occurrences(x)
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        self.lhs.0.iter().chain(&self.rhs.0).filter_map(|s| s.as_var().cloned()).collect()
    }

    pub fn constants(&self) -> BTreeSet<char> {
        self.lhs
            .0
            .iter()
            .chain(&self.rhs.0)
            .filter_map(|s| match s {
                Sym::Const(c) => Some(*c),
                _ => None,
            })
            .collect()
    }

    pub fn substitute(&self, x: &VarName, by: &[Sym]) -> Self {
        WordEquation::new(self.lhs.substitute(x, by), self.rhs.substitute(x, by))
    }

    pub fn holds(&self, m: &Model) -> bool {
        self.lhs.eval(m) == self.rhs.eval(m)
    }

    pub fn swapped(&self) -> Self {
        WordEquation::new(self.rhs.clone(), self.lhs.clone())
    }
}

impl fmt::Debug for WordEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for WordEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Conjunction of clauses; each clause is a disjunction of equations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EquationSystem {
    pub clauses: Vec<Vec<WordEquation>>,
}

impl EquationSystem {
    pub fn conjunction(eqs: impl IntoIterator<Item = WordEquation>) -> Self {
        EquationSystem { clauses: eqs.into_iter().map(|e| alloc::vec![e]).collect() }
    }

    pub fn is_conjunction(&self) -> bool {
        self.clauses.iter().all(|c| c.len() == 1)
    }

    pub fn equations(&self) -> impl Iterator<Item = &WordEquation> {
        self.clauses.iter().flatten()
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        self.equations().flat_map(|e| e.vars()).collect()
    }

    /// Worst-case occurrences of `x` over all choices of one disjunct per
    /// clause.
    pub fn occurrences(&self, x: &VarName) -> usize {
        self.clauses.iter().map(|c| c.iter().map(|e| e.occurrences(x)).max().unwrap_or(0)).sum()
    }

    pub fn max_occurrences(&self) -> usize {
        self.vars().iter().map(|x| self.occurrences(x)).max().unwrap_or(0)
    }

    pub fn is_quadratic(&self) -> bool {
        self.max_occurrences() <= 2
    }

    pub fn is_cubic(&self) -> bool {
        self.max_occurrences() <= 3
    }

    pub fn holds(&self, m: &Model) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|e| e.holds(m)))
    }
}

impl fmt::Display for EquationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            if c.len() > 1 {
                f.write_str("(")?;
            }
            for (j, e) in c.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ∨ ")?;
                }
                write!(f, "{e}")?;
            }
            if c.len() > 1 {
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

/// `Σ coeffs[x]·|x| ≤ bound`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LenAtom {
    pub coeffs: BTreeMap<VarName, i64>,
    pub bound: i64,
}

impl LenAtom {
    pub fn new(coeffs: impl IntoIterator<Item = (VarName, i64)>, bound: i64) -> Self {
        let mut map = BTreeMap::new();
        for (v, c) in coeffs {
            *map.entry(v).or_insert(0) += c;
        }
        map.retain(|_, c| *c != 0);
        LenAtom { coeffs: map, bound }
    }

    pub fn eval(&self, lens: &BTreeMap<VarName, usize>) -> bool {
        let lhs: i64 = self.coeffs.iter().map(|(v, c)| c * lens.get(v).copied().unwrap_or(0) as i64).sum();
        lhs <= self.bound
    }

    pub fn negated(&self) -> Self {
        // ¬(a·x ≤ c)  ⇔  −a·x ≤ −c − 1
        LenAtom { coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), -c)).collect(), bound: -self.bound - 1 }
    }
}

impl fmt::Display for LenAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            f.write_str("0")?;
        }
        for (i, (v, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(if *c < 0 { " - " } else { " + " })?;
            } else if *c < 0 {
                f.write_str("-")?;
            }
            match c.abs() {
                1 => write!(f, "|{v}|")?,
                k => write!(f, "{k}|{v}|")?,
            }
        }
        write!(f, " <= {}", self.bound)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(WordEquation),
    Neq(WordEquation),
    Len(LenAtom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let v: Vec<Formula> = fs.into_iter().collect();
        match v.len() {
            0 => Formula::True,
            1 => v.into_iter().next().unwrap(),
            _ => Formula::And(v),
        }
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let v: Vec<Formula> = fs.into_iter().collect();
        match v.len() {
            0 => Formula::False,
            1 => v.into_iter().next().unwrap(),
            _ => Formula::Or(v),
        }
    }

    pub fn eval(&self, m: &Model) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(e) => e.holds(m),
            Formula::Neq(e) => !e.holds(m),
            Formula::Len(a) => {
                let lens = a.coeffs.keys().map(|v| (v.clone(), m.get(v).map_or(0, |s| s.chars().count()))).collect();
                a.eval(&lens)
            }
            Formula::Not(f) => !f.eval(m),
            Formula::And(fs) => fs.iter().all(|f| f.eval(m)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(m)),
        }
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Not(g) => g.walk(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.walk(f)),
            _ => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.walk(&mut |g| match g {
            Formula::Eq(e) | Formula::Neq(e) => out.extend(e.vars()),
            Formula::Len(a) => out.extend(a.coeffs.keys().cloned()),
            _ => {}
        });
        out
    }

    pub fn constants(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.walk(&mut |g| {
            if let Formula::Eq(e) | Formula::Neq(e) = g {
                out.extend(e.constants());
            }
        });
        out
    }

    pub fn has_word_atoms(&self) -> bool {
        let mut any = false;
        self.walk(&mut |g| any |= matches!(g, Formula::Eq(_) | Formula::Neq(_)));
        any
    }

    pub fn has_len_atoms(&self) -> bool {
        let mut any = false;
        self.walk(&mut |g| any |= matches!(g, Formula::Len(_)));
        any
    }

    /// Top-level conjuncts, flattening nested conjunctions.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(fs) => fs.iter().flat_map(|f| f.conjuncts()).collect(),
            Formula::True => Vec::new(),
            f => alloc::vec![f],
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, gs: &[Formula], sep: &str| {
            f.write_str("(")?;
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{g}")?;
            }
            f.write_str(")")
        };
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Eq(e) => write!(f, "{e}"),
            Formula::Neq(e) => write!(f, "{} != {}", e.lhs, e.rhs),
            Formula::Len(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "!{g}"),
            Formula::And(gs) => list(f, gs, " & "),
            Formula::Or(gs) => list(f, gs, " | "),
        }
    }
}

/// A constraint together with its declared alphabet and variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub alphabet: Vec<char>,
    pub vars: Vec<VarName>,
    pub formula: Formula,
}

impl Problem {
    /// Adds the constants and variables used by `formula` to the declared
    /// ones. An empty alphabet becomes `{a}` so that non-empty strings exist.
    pub fn new(
        alphabet: impl IntoIterator<Item = char>,
        vars: impl IntoIterator<Item = VarName>,
        formula: Formula,
    ) -> Self {
        let mut a: BTreeSet<char> = alphabet.into_iter().collect();
        a.extend(formula.constants());
        if a.is_empty() {
            a.insert('a');
        }
        let mut v: BTreeSet<VarName> = vars.into_iter().collect();
        v.extend(formula.vars());
        Problem { alphabet: a.into_iter().collect(), vars: v.into_iter().collect(), formula }
    }

    pub fn verify(&self, m: &Model) -> bool {
        verify_model(&self.formula, m)
    }
}

/// Whether `m` satisfies `f`; variables missing from `m` are `ε`.
pub fn verify_model(f: &Formula, m: &Model) -> bool {
    f.eval(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    #[test]
    fn trim_and_display() {
        let e = WordEquation::compact("bxay", "byx", "xy");
        assert_eq!(format!("{}", e.trimmed()), "xay = yx");
        assert_eq!(format!("{}", WordEquation::compact("a", "a", "").trimmed()), "ε = ε");
    }

    #[test]
    fn verify_examples() {
        let f = Formula::Eq(WordEquation::compact("xy", "ax", "xy"));
        let mut m = Model::new();
        m.insert(VarName::new("y"), "a".into());
        assert!(verify_model(&f, &m));
        let g = Formula::Eq(WordEquation::compact("xay", "yx", "xy"));
        assert!(!verify_model(&g, &Model::new()));
        assert!(verify_model(&Formula::True, &Model::new()));
    }

    #[test]
    fn per_choice_occurrences() {
        let x = VarName::new("x");
        let s = EquationSystem {
            clauses: alloc::vec![
                alloc::vec![WordEquation::compact("xx", "a", "x"), WordEquation::compact("x", "b", "x")],
                alloc::vec![WordEquation::compact("x", "a", "x")],
            ],
        };
        assert_eq!(s.occurrences(&x), 3);
        assert!(!s.is_quadratic());
        assert!(s.is_cubic());
    }

    #[test]
    fn len_atom_negation() {
        let x = VarName::new("x");
        let a = LenAtom::new([(x.clone(), 1)], 0);
        let mut lens = BTreeMap::new();
        lens.insert(x.clone(), 1usize);
        assert!(!a.eval(&lens));
        assert!(a.negated().eval(&lens));
        assert_eq!(format!("{a}"), "|x| <= 0");
    }
}
