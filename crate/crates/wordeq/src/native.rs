//! The line-oriented native format.
//!
//! ```text
//! alphabet: a b
//! vars: x y
//! x a y = y x
//! len: |x| + 2|y| <= 5
//! (x = a y | x = "ba") & !(y = ε)
//! ```
//!
//! Constraint lines are conjoined and `#` starts a comment. Symbols are
//! whitespace separated; quoted strings are runs of letters.

use std::collections::{BTreeMap, BTreeSet};

use wordeq_core::{Formula, LenAtom, Problem, Sym, VarName, WordEquation, WordTerm};

use crate::InputError;

const SPECIAL: &str = "()|&!=<>+-*\"#";

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    Len(String),
    Eq,
    Neq,
    Le,
    Lt,
    Ge,
    Gt,
    And,
    Or,
    Not,
    LParen,
    RParen,
    Plus,
    Minus,
    Times,
}

impl Tok {
    fn is_rel(&self) -> bool {
        matches!(self, Tok::Eq | Tok::Neq | Tok::Le | Tok::Lt | Tok::Ge | Tok::Gt)
    }

    fn in_atom(&self) -> bool {
        self.is_rel() || matches!(self, Tok::Word(_) | Tok::Str(_) | Tok::Len(_) | Tok::Plus | Tok::Minus | Tok::Times)
    }
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !SPECIAL.contains(c)
}

fn valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_')
}

fn lex(line: &str, ln: usize) -> Result<Vec<(Tok, usize)>, InputError> {
    let cs: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let next = cs.get(i + 1).copied();
        let (tok, len) = match c {
            '#' => break,
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '&' => (Tok::And, 1),
            '=' => (Tok::Eq, 1),
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            '*' => (Tok::Times, 1),
            '!' if next == Some('=') => (Tok::Neq, 2),
            '!' => (Tok::Not, 1),
            '<' if next == Some('=') => (Tok::Le, 2),
            '<' => (Tok::Lt, 1),
            '>' if next == Some('=') => (Tok::Ge, 2),
            '>' => (Tok::Gt, 1),
            '|' => {
                let mut j = i + 1;
                while j < cs.len() && is_word_char(cs[j]) {
                    j += 1;
                }
                if j > i + 1 && cs.get(j) == Some(&'|') {
                    (Tok::Len(cs[i + 1..j].iter().collect()), j + 1 - i)
                } else {
                    (Tok::Or, 1)
                }
            }
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match cs.get(j) {
                        None => return Err(InputError::parse(ln, col, "unterminated string")),
                        Some('"') => break,
                        Some('\\') if matches!(cs.get(j + 1), Some('"') | Some('\\')) => {
                            s.push(cs[j + 1]);
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                (Tok::Str(s), j + 1 - i)
            }
            _ => {
                let mut j = i;
                while j < cs.len() && is_word_char(cs[j]) {
                    j += 1;
                }
                (Tok::Word(cs[i..j].iter().collect()), j - i)
            }
        };
        out.push((tok, col));
        i += len;
    }
    Ok(out)
}

#[derive(Default)]
struct Decls {
    alphabet: Option<BTreeSet<char>>,
    vars: Option<BTreeSet<String>>,
    vars_line: usize,
}

impl Decls {
    fn is_letter(&self, w: &str) -> Option<char> {
        let mut cs = w.chars();
        match (cs.next(), cs.next(), &self.alphabet) {
            (Some(c), None, Some(a)) if a.contains(&c) => Some(c),
            _ => None,
        }
    }

    fn check_letter(&self, c: char, ln: usize, col: usize) -> Result<Sym, InputError> {
        match &self.alphabet {
            Some(a) if !a.contains(&c) => Err(InputError::Undeclared { line: ln, col, name: c.to_string() }),
            _ => Ok(Sym::Const(c)),
        }
    }

    fn var(&self, w: &str, ln: usize, col: usize) -> Result<VarName, InputError> {
        let ok = match &self.vars {
            Some(vs) => vs.contains(w),
            None => valid_ident(w) && self.is_letter(w).is_none(),
        };
        if ok {
            Ok(VarName::new(w))
        } else {
            Err(InputError::Undeclared { line: ln, col, name: w.to_string() })
        }
    }

    fn symbols(&self, tok: &Tok, ln: usize, col: usize, out: &mut Vec<Sym>) -> Result<(), InputError> {
        match tok {
            Tok::Str(s) => {
                for c in s.chars() {
                    out.push(self.check_letter(c, ln, col)?);
                }
            }
            Tok::Word(w) if w == "ε" => {}
            Tok::Word(w) => {
                if self.vars.as_ref().is_some_and(|vs| vs.contains(w)) {
                    out.push(Sym::Var(VarName::new(w)));
                } else if let Some(c) = self.is_letter(w) {
                    out.push(Sym::Const(c));
                } else if let (Some(_), None, Some(c)) = (&self.vars, &self.alphabet, single(w)) {
                    out.push(Sym::Const(c));
                } else if self.vars.is_none() && self.alphabet.is_none() {
                    return Err(InputError::parse(
                        ln,
                        col,
                        format!(
                            "cannot tell whether `{w}` is a variable or a letter; add an `alphabet:` or `vars:` line"
                        ),
                    ));
                } else {
                    out.push(Sym::Var(self.var(w, ln, col)?));
                }
            }
            _ => return Err(InputError::parse(ln, col, "expected a symbol")),
        }
        Ok(())
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    ln: usize,
    end: usize,
    decls: &'a Decls,
}

/// A linear term `Σ c·|x| + k`.
#[derive(Default)]
struct Lin {
    coeffs: BTreeMap<VarName, i64>,
    k: i64,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.1)
    }

    fn err(&self, msg: impl Into<String>) -> InputError {
        InputError::parse(self.ln, self.col(), msg)
    }

    fn expr(&mut self) -> Result<Formula, InputError> {
        let mut parts = vec![self.conj()?];
        while self.peek() == Some(&Tok::Or) {
            self.i += 1;
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conj(&mut self) -> Result<Formula, InputError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.i += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula, InputError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.i += 1;
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let f = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.i += 1;
                Ok(f)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, InputError> {
        let start = self.i;
        while self.peek().is_some_and(Tok::in_atom) {
            self.i += 1;
        }
        let toks = &self.toks[start..self.i];
        match toks {
            [] => return Err(self.err("expected a constraint")),
            [(Tok::Word(w), _)] if w == "true" => return Ok(Formula::True),
            [(Tok::Word(w), _)] if w == "false" => return Ok(Formula::False),
            _ => {}
        }
        let rels: Vec<usize> = (0..toks.len()).filter(|&k| toks[k].0.is_rel()).collect();
        let [r] = rels[..] else {
            let col = rels.get(1).map_or(toks[0].1, |&k| toks[k].1);
            return Err(InputError::parse(self.ln, col, "expected exactly one relation"));
        };
        let (lhs, op, rhs) = (&toks[..r], &toks[r], &toks[r + 1..]);
        if toks.iter().any(|t| matches!(t.0, Tok::Len(_))) {
            let l = self.lin(lhs, op.1)?;
            let rr = self.lin(rhs, self.col())?;
            return self.len_atom(l, &op.0, rr, op.1);
        }
        let side = |ts: &[(Tok, usize)]| -> Result<WordTerm, InputError> {
            let mut syms = Vec::new();
            for (t, c) in ts {
                self.decls.symbols(t, self.ln, *c, &mut syms)?;
            }
            Ok(WordTerm::new(syms))
        };
        let e = WordEquation::new(side(lhs)?, side(rhs)?);
        match op.0 {
            Tok::Eq => Ok(Formula::Eq(e)),
            Tok::Neq => Ok(Formula::Neq(e)),
            _ => Err(InputError::parse(self.ln, op.1, "word equations use `=` or `!=`")),
        }
    }

    fn lin(&self, ts: &[(Tok, usize)], end: usize) -> Result<Lin, InputError> {
        let overflow = |c| InputError::parse(self.ln, c, "coefficient overflow");
        let mut out = Lin::default();
        let mut k = 0;
        if ts.is_empty() {
            return Err(InputError::parse(self.ln, end, "expected a length term"));
        }
        while k < ts.len() {
            let mut sign = 1i64;
            if k > 0 || matches!(ts[k].0, Tok::Minus | Tok::Plus) {
                match ts[k].0 {
                    Tok::Plus => {}
                    Tok::Minus => sign = -1,
                    _ => return Err(InputError::parse(self.ln, ts[k].1, "expected `+` or `-`")),
                }
                k += 1;
            }
            let col = ts.get(k).map_or(end, |t| t.1);
            let mut coeff = sign;
            if let Some((Tok::Word(w), c)) = ts.get(k) {
                let n: i64 =
                    w.parse().map_err(|_| InputError::parse(self.ln, *c, format!("expected a number, found `{w}`")))?;
                coeff = coeff.checked_mul(n).ok_or_else(|| overflow(*c))?;
                k += 1;
                if ts.get(k).map(|t| &t.0) == Some(&Tok::Times) {
                    k += 1;
                }
                if !matches!(ts.get(k), Some((Tok::Len(_), _))) {
                    out.k = out.k.checked_add(coeff).ok_or_else(|| overflow(*c))?;
                    continue;
                }
            }
            match ts.get(k) {
                Some((Tok::Len(v), c)) => {
                    let v = self.decls.var(v, self.ln, c + 1)?;
                    let e = out.coeffs.entry(v).or_insert(0);
                    *e = e.checked_add(coeff).ok_or_else(|| overflow(*c))?;
                    k += 1;
                }
                _ => return Err(InputError::parse(self.ln, col, "expected `|x|` or a number")),
            }
        }
        Ok(out)
    }

    fn len_atom(&self, l: Lin, op: &Tok, r: Lin, col: usize) -> Result<Formula, InputError> {
        let overflow = || InputError::parse(self.ln, col, "coefficient overflow");
        // l - r as Σ c·|x| + k
        let mut coeffs = l.coeffs;
        for (v, c) in r.coeffs {
            let e = coeffs.entry(v).or_insert(0);
            *e = e.checked_sub(c).ok_or_else(overflow)?;
        }
        let k = l.k.checked_sub(r.k).ok_or_else(overflow)?;
        let neg: Vec<(VarName, i64)> = coeffs.iter().map(|(v, c)| (v.clone(), -c)).collect();
        let pos: Vec<(VarName, i64)> = coeffs.into_iter().collect();
        let nk = k.checked_neg().ok_or_else(overflow)?;
        let le = |b: i64| Formula::Len(LenAtom::new(pos.clone(), b));
        let ge = |b: i64| Formula::Len(LenAtom::new(neg.clone(), b));
        Ok(match op {
            Tok::Le => le(nk),
            Tok::Lt => le(nk.checked_sub(1).ok_or_else(overflow)?),
            Tok::Ge => ge(k),
            Tok::Gt => ge(k.checked_sub(1).ok_or_else(overflow)?),
            Tok::Eq => Formula::And(vec![le(nk), ge(k)]),
            Tok::Neq => Formula::Or(vec![
                le(nk.checked_sub(1).ok_or_else(overflow)?),
                ge(k.checked_sub(1).ok_or_else(overflow)?),
            ]),
            _ => unreachable!("not a relation"),
        })
    }
}

fn header(decls: &mut Decls, key: &str, rest: &str, ln: usize, offset: usize) -> Result<(), InputError> {
    let mut col = offset;
    let mut items = Vec::new();
    for part in rest.split(char::is_whitespace) {
        if part.starts_with('#') {
            break;
        }
        if !part.is_empty() {
            items.push((part, col + 1));
        }
        col += part.chars().count() + 1;
    }
    match key {
        "alphabet" => {
            let a = decls.alphabet.get_or_insert_with(BTreeSet::new);
            for (s, c) in items {
                let mut cs = s.chars();
                match (cs.next(), cs.next()) {
                    (Some(ch), None) if is_word_char(ch) => {
                        a.insert(ch);
                    }
                    _ => return Err(InputError::parse(ln, c, format!("`{s}` is not a single letter"))),
                }
            }
        }
        _ => {
            decls.vars_line = ln;
            let vs = decls.vars.get_or_insert_with(BTreeSet::new);
            for (s, c) in items {
                if !valid_ident(s) || s == "true" || s == "false" {
                    return Err(InputError::parse(ln, c, format!("`{s}` is not a valid variable name")));
                }
                vs.insert(s.to_string());
            }
        }
    }
    Ok(())
}

pub fn parse_native(text: &str) -> Result<Problem, InputError> {
    let mut decls = Decls::default();
    let mut body = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let ln = k + 1;
        let trimmed = line.trim_start();
        let indent = line.chars().count() - trimmed.chars().count();
        let key =
            ["alphabet", "vars"].into_iter().find(|h| trimmed.strip_prefix(h).is_some_and(|r| r.starts_with(':')));
        match key {
            Some(h) => header(&mut decls, h, &trimmed[h.len() + 1..], ln, indent + h.len() + 1)?,
            None => body.push((ln, line)),
        }
    }
    if let (Some(a), Some(vs)) = (&decls.alphabet, &decls.vars) {
        if let Some(v) = vs.iter().find(|v| single(v).is_some_and(|c| a.contains(&c))) {
            return Err(InputError::parse(
                decls.vars_line,
                1,
                format!("`{v}` is declared both as a letter and a variable"),
            ));
        }
    }
    let mut parts = Vec::new();
    for (ln, line) in body {
        let mut toks = lex(line, ln)?;
        if matches!(toks.first(), Some((Tok::Word(w), _)) if w == "len:") {
            toks.remove(0);
        }
        if toks.is_empty() {
            continue;
        }
        let end = line.chars().count() + 1;
        let mut p = Parser { toks, i: 0, ln, end, decls: &decls };
        let f = p.expr()?;
        if p.i < p.toks.len() {
            return Err(p.err("unexpected token"));
        }
        parts.push(f);
    }
    let alphabet = decls.alphabet.clone().unwrap_or_default();
    let vars = decls.vars.iter().flatten().map(|v| VarName::new(v));
    Ok(Problem::new(alphabet, vars, Formula::and(parts)))
}

fn single(w: &str) -> Option<char> {
    let mut cs = w.chars();
    match (cs.next(), cs.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}
