//! A parsed instance plus what is needed to print models in the user's names.

use std::collections::BTreeMap;
use std::path::Path;

use wordeq_core::{Model, Problem, VarName};

use crate::native::parse_native;
use crate::smtlib::parse_smtlib;
use crate::InputError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Native,
    SmtLib,
}

impl Format {
    /// `.smt2` and `.smt` files are SMT-LIB, everything else native.
    pub fn of_path(p: &Path) -> Format {
        match p.extension().and_then(|e| e.to_str()) {
            Some("smt2") | Some("smt") => Format::SmtLib,
            _ => Format::Native,
        }
    }
}

/// An integer variable encoded as `|pos| - |neg|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntVar {
    pub name: String,
    pub pos: VarName,
    pub neg: VarName,
}

#[derive(Clone, Debug)]
pub struct Input {
    pub problem: Problem,
    /// User-facing names of string variables whose internal name differs.
    pub renamed: BTreeMap<VarName, String>,
    pub ints: Vec<IntVar>,
}

impl Input {
    pub fn plain(problem: Problem) -> Self {
        Input { problem, renamed: BTreeMap::new(), ints: Vec::new() }
    }

    pub fn display_name(&self, v: &VarName) -> String {
        self.renamed.get(v).cloned().unwrap_or_else(|| v.to_string())
    }

    fn is_int_part(&self, v: &VarName) -> bool {
        self.ints.iter().any(|i| &i.pos == v || &i.neg == v)
    }

    /// String variables the user declared, in internal names.
    pub fn string_vars(&self) -> impl Iterator<Item = &VarName> {
        self.problem.vars.iter().filter(|v| !v.is_reserved() && !self.is_int_part(v))
    }

    pub fn int_value(&self, i: &IntVar, m: &Model) -> i64 {
        let len = |v: &VarName| m.get(v).map_or(0, |s| s.chars().count()) as i64;
        len(&i.pos) - len(&i.neg)
    }

    /// Internal model from user-facing string and integer values. Integers
    /// go to the positive or negative helper as a run of the first letter.
    pub fn internal_model(&self, strings: &BTreeMap<String, String>, ints: &BTreeMap<String, i64>) -> Model {
        let by_name: BTreeMap<String, VarName> =
            self.string_vars().map(|v| (self.display_name(v), v.clone())).collect();
        let mut m = Model::new();
        for (k, s) in strings {
            let v = by_name.get(k).cloned().unwrap_or_else(|| VarName::new(k));
            m.insert(v, s.clone());
        }
        let c = self.problem.alphabet.first().copied().unwrap_or('a');
        for i in &self.ints {
            let n = ints.get(&i.name).copied().unwrap_or(0);
            let run: String = std::iter::repeat_n(c, n.unsigned_abs() as usize).collect();
            let (set, zero) = if n >= 0 { (&i.pos, &i.neg) } else { (&i.neg, &i.pos) };
            m.insert(set.clone(), run);
            m.insert(zero.clone(), String::new());
        }
        m
    }
}

pub fn parse_str(text: &str, format: Format) -> Result<Input, InputError> {
    match format {
        Format::Native => Ok(Input::plain(parse_native(text)?)),
        Format::SmtLib => parse_smtlib(text),
    }
}

pub fn load(path: &Path) -> Result<Input, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_path_buf(), source })?;
    parse_str(&text, Format::of_path(path))
}
