//! The string-and-length fragment of SMT-LIB 2.
//!
//! Supported: `declare-fun`/`declare-const` of sort `String` or `Int`,
//! `assert` over `=`, `distinct`, `str.++`, `str.len`, linear integer
//! arithmetic, `and`/`or`/`not`/`=>`, `let`, string literals, and the
//! administrative commands. Anything else is rejected by name.
//!
//! Integer variables become `|p| - |n|` for two fresh string variables.
//! The alphabet is the letters of the literals plus enough fresh letters
//! to keep every string inequation satisfiable whenever it is over the
//! full character set.

use std::collections::{BTreeMap, BTreeSet};

use wordeq_core::preprocess::nnf;
use wordeq_core::{Formula, LenAtom, Problem, Sym, VarName, WordEquation, WordTerm};

use crate::input::{Input, IntVar};
use crate::InputError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Sym(String, usize, usize),
    Str(String),
    Num(i64),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    fn head(&self) -> Option<&str> {
        match self {
            Sexp::List(xs, ..) => match xs.first() {
                Some(Sexp::Sym(s, ..)) => Some(s),
                _ => None,
            },
            _ => None,
        }
    }
}

struct Reader {
    cs: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Reader {
    fn err(&self, msg: impl Into<String>) -> InputError {
        InputError::parse(self.line, self.col, msg)
    }

    fn bump(&mut self) -> Option<char> {
        let c = *self.cs.get(self.i)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.cs.get(self.i) {
            if c == ';' {
                while self.cs.get(self.i).is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>, InputError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let Some(&c) = self.cs.get(self.i) else { return Ok(None) };
        match c {
            '(' => {
                self.bump();
                let mut xs = Vec::new();
                loop {
                    self.skip_ws();
                    match self.cs.get(self.i) {
                        None => return Err(InputError::parse(line, col, "unbalanced `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(xs, line, col)));
                        }
                        _ => xs.push(self.read()?.expect("input remains")),
                    }
                }
            }
            ')' => Err(self.err("unexpected `)`")),
            '"' => {
                self.bump();
                let mut raw = String::new();
                loop {
                    match self.bump() {
                        None => return Err(InputError::parse(line, col, "unterminated string literal")),
                        Some('"') if self.cs.get(self.i) == Some(&'"') => {
                            self.bump();
                            raw.push('"');
                        }
                        Some('"') => break,
                        Some(ch) => raw.push(ch),
                    }
                }
                let s = unescape(&raw).ok_or_else(|| InputError::parse(line, col, "bad \\u escape"))?;
                Ok(Some(Sexp::Str(s)))
            }
            '|' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(InputError::parse(line, col, "unterminated quoted symbol")),
                        Some('|') => break,
                        Some(ch) => s.push(ch),
                    }
                }
                Ok(Some(Sexp::Sym(s, line, col)))
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = self.cs.get(self.i) {
                    if ch.is_whitespace() || matches!(ch, '(' | ')' | '"' | ';' | '|') {
                        break;
                    }
                    s.push(ch);
                    self.bump();
                }
                if s.chars().all(|c| c.is_ascii_digit()) {
                    let n = s.parse().map_err(|_| InputError::parse(line, col, "numeral out of range"))?;
                    Ok(Some(Sexp::Num(n)))
                } else {
                    Ok(Some(Sexp::Sym(s, line, col)))
                }
            }
        }
    }
}

/// `\u{X}` and `\uXXXX` escapes; other backslashes are literal.
fn unescape(raw: &str) -> Option<String> {
    let cs: Vec<char> = raw.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < cs.len() {
        if cs[i] == '\\' && cs.get(i + 1) == Some(&'u') {
            let (hex, skip): (String, usize) = if cs.get(i + 2) == Some(&'{') {
                let end = (i + 3..cs.len()).find(|&j| cs[j] == '}')?;
                (cs[i + 3..end].iter().collect(), end + 1 - i)
            } else if i + 6 <= cs.len() {
                (cs[i + 2..i + 6].iter().collect(), 6)
            } else {
                return None;
            };
            out.push(char::from_u32(u32::from_str_radix(&hex, 16).ok()?)?);
            i += skip;
        } else {
            out.push(cs[i]);
            i += 1;
        }
    }
    Some(out)
}

#[derive(Clone, Debug, Default)]
struct Lin {
    coeffs: BTreeMap<VarName, i64>,
    k: i64,
}

impl Lin {
    fn add(mut self, o: &Lin, sign: i64) -> Option<Lin> {
        for (v, c) in &o.coeffs {
            let e = self.coeffs.entry(v.clone()).or_insert(0);
            *e = e.checked_add(c.checked_mul(sign)?)?;
        }
        self.k = self.k.checked_add(o.k.checked_mul(sign)?)?;
        self.coeffs.retain(|_, c| *c != 0);
        Some(self)
    }

    fn scale(mut self, n: i64) -> Option<Lin> {
        for c in self.coeffs.values_mut() {
            *c = c.checked_mul(n)?;
        }
        self.k = self.k.checked_mul(n)?;
        self.coeffs.retain(|_, c| *c != 0);
        Some(self)
    }

    /// `self <= 0`
    fn nonpos(&self) -> Option<Formula> {
        Some(Formula::Len(LenAtom::new(self.coeffs.clone(), self.k.checked_neg()?)))
    }
}

#[derive(Clone, Debug)]
enum Value {
    Bool(Formula),
    Str(Vec<Sym>),
    Int(Lin),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sort {
    Str,
    Int,
}

#[derive(Default)]
struct Ctx {
    decls: BTreeMap<String, (Sort, VarName)>,
    ints: Vec<IntVar>,
    renamed: BTreeMap<VarName, String>,
    scopes: Vec<BTreeMap<String, Value>>,
    asserts: Vec<Formula>,
}

fn unsupported(what: &str) -> InputError {
    InputError::Unsupported(what.to_string())
}

fn pos(s: &Sexp) -> (usize, usize) {
    match s {
        Sexp::Sym(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        _ => (0, 0),
    }
}

fn plain_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_' || c == '.')
}

impl Ctx {
    fn declare(&mut self, name: &Sexp, sort: &Sexp) -> Result<(), InputError> {
        let Sexp::Sym(n, l, c) = name else {
            let (l, c) = pos(name);
            return Err(InputError::parse(l, c, "expected a symbol"));
        };
        if self.decls.contains_key(n) {
            return Err(InputError::parse(*l, *c, format!("`{n}` is declared twice")));
        }
        let sort = match sort {
            Sexp::Sym(s, ..) if s == "String" => Sort::Str,
            Sexp::Sym(s, ..) if s == "Int" => Sort::Int,
            Sexp::Sym(s, ..) => return Err(unsupported(&format!("sort {s}"))),
            _ => return Err(unsupported("parametric sorts")),
        };
        let k = self.decls.len();
        let internal = match sort {
            Sort::Str if plain_name(n) => VarName::new(n),
            Sort::Str => {
                let v = VarName::from(format!("s#{k}"));
                self.renamed.insert(v.clone(), n.clone());
                v
            }
            Sort::Int => {
                let (p, m) = (VarName::from(format!("i#{k}+")), VarName::from(format!("i#{k}-")));
                self.ints.push(IntVar { name: n.clone(), pos: p.clone(), neg: m });
                p
            }
        };
        self.decls.insert(n.clone(), (sort, internal));
        Ok(())
    }

    fn lookup(&self, n: &str) -> Option<Value> {
        for s in self.scopes.iter().rev() {
            if let Some(v) = s.get(n) {
                return Some(v.clone());
            }
        }
        match self.decls.get(n)? {
            (Sort::Str, v) => Some(Value::Str(vec![Sym::Var(v.clone())])),
            (Sort::Int, p) => {
                let i = self.ints.iter().find(|i| &i.pos == p).expect("int declared");
                Some(Value::Int(Lin { coeffs: BTreeMap::from([(i.pos.clone(), 1), (i.neg.clone(), -1)]), k: 0 }))
            }
        }
    }

    fn eval(&mut self, s: &Sexp) -> Result<Value, InputError> {
        let overflow = || {
            let (l, c) = pos(s);
            InputError::parse(l, c, "integer overflow")
        };
        match s {
            Sexp::Num(n) => Ok(Value::Int(Lin { coeffs: BTreeMap::new(), k: *n })),
            Sexp::Str(t) => Ok(Value::Str(t.chars().map(Sym::Const).collect())),
            Sexp::Sym(n, l, c) => match n.as_str() {
                "true" => Ok(Value::Bool(Formula::True)),
                "false" => Ok(Value::Bool(Formula::False)),
                _ => self.lookup(n).ok_or_else(|| InputError::Undeclared { line: *l, col: *c, name: n.clone() }),
            },
            Sexp::List(xs, l, c) => {
                let Some(Sexp::Sym(op, ..)) = xs.first() else {
                    return Err(InputError::parse(*l, *c, "expected an operator"));
                };
                let args = &xs[1..];
                let arity = |n: usize| {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(InputError::parse(*l, *c, format!("`{op}` takes {n} arguments")))
                    }
                };
                let at_least = |n: usize| {
                    if args.len() >= n {
                        Ok(())
                    } else {
                        Err(InputError::parse(*l, *c, format!("`{op}` takes at least {n} arguments")))
                    }
                };
                match op.as_str() {
                    "and" | "or" => {
                        let fs = args.iter().map(|a| self.bool(a)).collect::<Result<Vec<_>, _>>()?;
                        Ok(Value::Bool(if op == "and" { Formula::and(fs) } else { Formula::or(fs) }))
                    }
                    "not" => {
                        arity(1)?;
                        Ok(Value::Bool(Formula::Not(Box::new(self.bool(&args[0])?))))
                    }
                    "=>" => {
                        at_least(2)?;
                        let mut fs = args.iter().map(|a| self.bool(a)).collect::<Result<Vec<_>, _>>()?;
                        let mut acc = fs.pop().unwrap();
                        while let Some(f) = fs.pop() {
                            acc = Formula::or([Formula::Not(Box::new(f)), acc]);
                        }
                        Ok(Value::Bool(acc))
                    }
                    "=" | "distinct" => {
                        at_least(2)?;
                        let vs = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                        let pairs: Vec<(usize, usize)> = if op == "=" {
                            (1..vs.len()).map(|k| (k - 1, k)).collect()
                        } else {
                            (0..vs.len()).flat_map(|i| (i + 1..vs.len()).map(move |j| (i, j))).collect()
                        };
                        let mut out = Vec::new();
                        for (i, j) in pairs {
                            let eq = equal(&vs[i], &vs[j])
                                .ok_or_else(|| InputError::parse(*l, *c, format!("ill-sorted `{op}`")))??;
                            out.push(if op == "=" { eq } else { Formula::Not(Box::new(eq)) });
                        }
                        Ok(Value::Bool(Formula::and(out)))
                    }
                    "<=" | "<" | ">=" | ">" => {
                        at_least(2)?;
                        let vs = args.iter().map(|a| self.int(a)).collect::<Result<Vec<_>, _>>()?;
                        let mut out = Vec::new();
                        for w in vs.windows(2) {
                            let (a, b) = match op.as_str() {
                                "<=" | "<" => (&w[0], &w[1]),
                                _ => (&w[1], &w[0]),
                            };
                            // a - b <= 0, or a - b + 1 <= 0 when strict
                            let mut d = a.clone().add(b, -1).ok_or_else(overflow)?;
                            if op.len() == 1 {
                                d.k = d.k.checked_add(1).ok_or_else(overflow)?;
                            }
                            out.push(d.nonpos().ok_or_else(overflow)?);
                        }
                        Ok(Value::Bool(Formula::and(out)))
                    }
                    "str.++" => {
                        let mut out = Vec::new();
                        for a in args {
                            out.extend(self.string(a)?);
                        }
                        Ok(Value::Str(out))
                    }
                    "str.len" => {
                        arity(1)?;
                        let mut lin = Lin::default();
                        for sym in self.string(&args[0])? {
                            match sym {
                                Sym::Var(v) => *lin.coeffs.entry(v).or_insert(0) += 1,
                                _ => lin.k += 1,
                            }
                        }
                        Ok(Value::Int(lin))
                    }
                    "+" => {
                        let mut acc = Lin::default();
                        for a in args {
                            acc = acc.add(&self.int(a)?, 1).ok_or_else(overflow)?;
                        }
                        Ok(Value::Int(acc))
                    }
                    "-" => {
                        at_least(1)?;
                        let first = self.int(&args[0])?;
                        if args.len() == 1 {
                            return Ok(Value::Int(first.scale(-1).ok_or_else(overflow)?));
                        }
                        let mut acc = first;
                        for a in &args[1..] {
                            acc = acc.add(&self.int(a)?, -1).ok_or_else(overflow)?;
                        }
                        Ok(Value::Int(acc))
                    }
                    "*" => {
                        let mut acc = Lin { coeffs: BTreeMap::new(), k: 1 };
                        for a in args {
                            let t = self.int(a)?;
                            acc = if acc.coeffs.is_empty() {
                                t.scale(acc.k)
                            } else if t.coeffs.is_empty() {
                                acc.scale(t.k)
                            } else {
                                return Err(unsupported("non-linear *"));
                            }
                            .ok_or_else(overflow)?;
                        }
                        Ok(Value::Int(acc))
                    }
                    "let" => {
                        arity(2)?;
                        let Sexp::List(bs, ..) = &args[0] else {
                            return Err(InputError::parse(*l, *c, "malformed let"));
                        };
                        let mut scope = BTreeMap::new();
                        for b in bs {
                            match b {
                                Sexp::List(kv, ..) if kv.len() == 2 => {
                                    let Sexp::Sym(n, ..) = &kv[0] else {
                                        return Err(InputError::parse(*l, *c, "malformed let binding"));
                                    };
                                    scope.insert(n.clone(), self.eval(&kv[1])?);
                                }
                                _ => return Err(InputError::parse(*l, *c, "malformed let binding")),
                            }
                        }
                        self.scopes.push(scope);
                        let v = self.eval(&args[1]);
                        self.scopes.pop();
                        v
                    }
                    other => Err(unsupported(other)),
                }
            }
        }
    }

    fn bool(&mut self, s: &Sexp) -> Result<Formula, InputError> {
        match self.eval(s)? {
            Value::Bool(f) => Ok(f),
            _ => Err(sort_error(s, "Bool")),
        }
    }

    fn string(&mut self, s: &Sexp) -> Result<Vec<Sym>, InputError> {
        match self.eval(s)? {
            Value::Str(w) => Ok(w),
            _ => Err(sort_error(s, "String")),
        }
    }

    fn int(&mut self, s: &Sexp) -> Result<Lin, InputError> {
        match self.eval(s)? {
            Value::Int(l) => Ok(l),
            _ => Err(sort_error(s, "Int")),
        }
    }

    fn command(&mut self, s: &Sexp) -> Result<(), InputError> {
        let Sexp::List(xs, l, c) = s else {
            let (l, c) = pos(s);
            return Err(InputError::parse(l, c, "expected a command"));
        };
        let head = s.head().ok_or_else(|| InputError::parse(*l, *c, "expected a command"))?;
        match (head, &xs[1..]) {
            ("set-logic" | "set-info" | "set-option" | "check-sat" | "get-model" | "get-info" | "exit" | "echo", _) => {
                Ok(())
            }
            ("declare-const", [n, sort]) => self.declare(n, sort),
            ("declare-fun", [n, Sexp::List(ps, ..), sort]) if ps.is_empty() => self.declare(n, sort),
            ("declare-fun", [_, Sexp::List(..), _]) => Err(unsupported("declare-fun with arguments")),
            ("assert", [t]) => {
                let f = self.bool(t)?;
                self.asserts.push(f);
                Ok(())
            }
            ("declare-const" | "declare-fun" | "assert", _) => {
                Err(InputError::parse(*l, *c, format!("malformed {head}")))
            }
            (other, _) => Err(unsupported(other)),
        }
    }
}

fn sort_error(s: &Sexp, want: &str) -> InputError {
    let (l, c) = pos(s);
    InputError::parse(l, c, format!("expected a {want} term"))
}

fn equal(a: &Value, b: &Value) -> Option<Result<Formula, InputError>> {
    Some(Ok(match (a, b) {
        (Value::Str(x), Value::Str(y)) => {
            Formula::Eq(WordEquation::new(WordTerm::new(x.clone()), WordTerm::new(y.clone())))
        }
        (Value::Int(x), Value::Int(y)) => {
            let Some(d) = x.clone().add(y, -1) else {
                return Some(Err(InputError::parse(0, 0, "integer overflow")));
            };
            let (Some(le), Some(ge)) = (d.nonpos(), d.clone().scale(-1).and_then(|n| n.nonpos())) else {
                return Some(Err(InputError::parse(0, 0, "integer overflow")));
            };
            Formula::and([le, ge])
        }
        (Value::Bool(x), Value::Bool(y)) => Formula::or([
            Formula::and([x.clone(), y.clone()]),
            Formula::and([Formula::Not(Box::new(x.clone())), Formula::Not(Box::new(y.clone()))]),
        ]),
        _ => return None,
    }))
}

fn count_neq(f: &Formula) -> usize {
    match f {
        Formula::Neq(_) => 1,
        Formula::And(gs) | Formula::Or(gs) => gs.iter().map(count_neq).sum(),
        _ => 0,
    }
}

/// Letters not in `used`, in a fixed order.
fn fresh_letters(used: &BTreeSet<char>, n: usize) -> Vec<char> {
    ('a'..='z')
        .chain('A'..='Z')
        .chain('0'..='9')
        .chain((0xc0..).filter_map(char::from_u32))
        .filter(|c| !used.contains(c))
        .take(n)
        .collect()
}

pub fn parse_smtlib(text: &str) -> Result<Input, InputError> {
    let mut r = Reader { cs: text.chars().collect(), i: 0, line: 1, col: 1 };
    let mut ctx = Ctx::default();
    while let Some(s) = r.read()? {
        ctx.command(&s)?;
    }
    let formula = Formula::and(std::mem::take(&mut ctx.asserts));
    let used = formula.constants();
    // A model over any characters maps to one over `used` plus twice as many
    // fresh letters as there are inequations, keeping each witness distinct.
    let extra = (2 * count_neq(&nnf(&formula))).max(1);
    let alphabet: Vec<char> = used.iter().copied().chain(fresh_letters(&used, extra)).collect();
    let mut vars: Vec<VarName> = Vec::new();
    for (sort, v) in ctx.decls.values() {
        if *sort == Sort::Str {
            vars.push(v.clone());
        }
    }
    for i in &ctx.ints {
        vars.push(i.pos.clone());
        vars.push(i.neg.clone());
    }
    Ok(Input { problem: Problem::new(alphabet, vars, formula), renamed: ctx.renamed, ints: ctx.ints })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Input {
        parse_smtlib(s).unwrap_or_else(|e| panic!("{e}"))
    }

    #[test]
    fn concatenation() {
        let i = parse("(declare-fun x () String)(declare-fun y () String)\n(assert (= (str.++ x \"a\" y) (str.++ y x)))\n(check-sat)");
        assert_eq!(i.problem.formula, Formula::Eq(WordEquation::compact("xay", "yx", "xy")));
        assert_eq!(i.problem.alphabet, vec!['a', 'b']);
    }

    #[test]
    fn tautology_and_rejection() {
        let i = parse("(declare-const x String)(assert (= x x))");
        assert!(i.problem.formula.eval(&Default::default()));
        let e = parse_smtlib("(declare-const x String)(assert (= x (str.replace x \"a\" \"b\")))").unwrap_err();
        assert_eq!(e.to_string(), "unsupported SMT-LIB feature `str.replace`");
        assert!(matches!(parse_smtlib("(push 1)"), Err(InputError::Unsupported(_))));
    }

    #[test]
    fn lengths_and_ints() {
        let i = parse(
            "(declare-const x String)(declare-const n Int)\n\
             (assert (and (= (str.len (str.++ x \"ab\")) (+ n 1)) (< (- n) 0) (distinct x \"\")))",
        );
        let mut ints = BTreeMap::new();
        ints.insert("n".to_string(), 2);
        let mut strings = BTreeMap::new();
        strings.insert("x".to_string(), "a".to_string());
        assert!(i.problem.verify(&i.internal_model(&strings, &ints)));
        ints.insert("n".to_string(), 3);
        assert!(!i.problem.verify(&i.internal_model(&strings, &ints)));
        // no literal letters survive, one inequation gives two fresh ones
        assert_eq!(i.problem.alphabet, vec!['a', 'b']);
    }

    #[test]
    fn let_and_odd_names() {
        let i = parse("(declare-const |x!1| String)(assert (let ((t (str.++ |x!1| \"\\u{62}\"))) (= t \"ab\")))");
        let v = i.string_vars().next().unwrap().clone();
        assert_eq!(i.display_name(&v), "x!1");
        assert!(!v.is_reserved());
        let mut m = wordeq_core::Model::new();
        m.insert(v, "a".into());
        assert!(i.problem.verify(&m));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_smtlib("(assert (= y \"a\"))"), Err(InputError::Undeclared { line: 1, col: 12, .. })));
        assert!(matches!(parse_smtlib("(assert"), Err(InputError::Parse { .. })));
        assert!(matches!(parse_smtlib("(declare-const b Bool)"), Err(InputError::Unsupported(_))));
    }
}
