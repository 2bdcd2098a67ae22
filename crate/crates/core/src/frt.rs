//! Finite-alphabet register transducers.
//!
//! A machine reads one letter (or nothing) per transition. Registers hold a
//! single [`Sym`] or nothing. Guards, outputs and updates are evaluated
//! against the input letter, the register values before the transition,
//! and the symbols guessed by the transition (a finite nondeterministic
//! choice from the instantiation alphabet).
//!
//! Machines expose their transitions per control state through
//! [`RegisterMachine`], so large parametric families can generate them on
//! demand. [`image`] runs the lazy product with an automaton and only
//! discovers register valuations reachable on that automaton; [`expand`]
//! materializes the full transducer over a given alphabet.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::fa::{Alphabet, Fa};
use crate::sym::{Sym, TrackSym};
use crate::transducer::{TEdge, Transducer};

pub type Reg = u16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// Top component of the input pair.
    Top,
    /// Bottom component of the input pair.
    Bottom,
    Reg(Reg),
    /// The `i`-th symbol guessed by this transition.
    Guess(u8),
    Lit(Sym),
}

/// Domain of a guessed symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Class {
    Var,
    Const,
    /// A variable or a constant.
    Term,
}

impl Class {
    fn admits(self, s: &Sym) -> bool {
        match self {
            Class::Var => s.is_var(),
            Class::Const => s.is_const(),
            Class::Term => s.is_term_symbol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Guard {
    True,
    False,
    Not(Box<Guard>),
    And(Vec<Guard>),
    Or(Vec<Guard>),
    /// Both defined and equal.
    Eq(Term, Term),
    IsVar(Term),
    IsConst(Term),
    IsPad(Term),
    Defined(Term),
    IsPair,
    IsDelim,
    IsLenSep,
    IsBits,
    Letter(TrackSym),
}

impl Guard {
    pub fn and(gs: impl IntoIterator<Item = Guard>) -> Guard {
        let mut out = Vec::new();
        for g in gs {
            match g {
                Guard::True => {}
                Guard::False => return Guard::False,
                Guard::And(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Guard::True,
            1 => out.pop().unwrap(),
            _ => Guard::And(out),
        }
    }

    pub fn or(gs: impl IntoIterator<Item = Guard>) -> Guard {
        let mut out = Vec::new();
        for g in gs {
            match g {
                Guard::False => {}
                Guard::True => return Guard::True,
                Guard::Or(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Guard::False,
            1 => out.pop().unwrap(),
            _ => Guard::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(g: Guard) -> Guard {
        match g {
            Guard::True => Guard::False,
            Guard::False => Guard::True,
            Guard::Not(inner) => *inner,
            g => Guard::Not(Box::new(g)),
        }
    }

    /// Equality that folds syntactically identical terms.
    pub fn eq(a: Term, b: Term) -> Guard {
        match (&a, &b) {
            (Term::Lit(x), Term::Lit(y)) => {
                if x == y {
                    Guard::True
                } else {
                    Guard::False
                }
            }
            _ if a == b && !matches!(a, Term::Reg(_)) => Guard::True,
            _ => Guard::Eq(a, b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Output {
    Eps,
    /// The input letter itself.
    Copy,
    Pair(Term, Term),
    Letter(TrackSym),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Update {
    Set(Reg, Term),
    Clear(Reg),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FrtEdge {
    /// Whether the transition consumes an input letter.
    pub reads: bool,
    pub guesses: Vec<Class>,
    pub guard: Guard,
    pub output: Output,
    pub updates: Vec<Update>,
    pub to: u32,
}

impl FrtEdge {
    pub fn eps(to: u32) -> Self {
        FrtEdge { reads: false, guesses: Vec::new(), guard: Guard::True, output: Output::Eps, updates: Vec::new(), to }
    }
}

/// A register transducer given by its transitions per control state.
pub trait RegisterMachine: Send + Sync {
    fn registers(&self) -> usize;
    fn initial(&self) -> Vec<u32>;
    fn is_final(&self, q: u32) -> bool;
    fn edges(&self, q: u32) -> Vec<FrtEdge>;
    /// Registers fixed to a value for the whole run. A `Set` on a pinned
    /// register only succeeds when it assigns the pinned value.
    fn pins(&self) -> Vec<(Reg, Sym)> {
        Vec::new()
    }
    /// Symbols the machine may output without reading them.
    fn literals(&self) -> Vec<Sym> {
        Vec::new()
    }
}

/// A fully materialized machine.
#[derive(Clone, Debug, Default)]
pub struct Frt {
    pub registers: usize,
    pub edges: Vec<Vec<FrtEdge>>,
    pub initial: Vec<u32>,
    pub finals: Vec<bool>,
    pub pins: Vec<(Reg, Sym)>,
}

impl Frt {
    pub fn new(registers: usize) -> Self {
        Frt { registers, ..Frt::default() }
    }

    pub fn add_state(&mut self, is_final: bool) -> u32 {
        self.edges.push(Vec::new());
        self.finals.push(is_final);
        (self.edges.len() - 1) as u32
    }

    pub fn add_edge(&mut self, from: u32, e: FrtEdge) {
        self.edges[from as usize].push(e);
    }

    /// Copy of an explicit transducer; every letter becomes a literal guard.
    pub fn from_transducer(t: &Transducer) -> Self {
        let mut f = Frt::new(0);
        for q in 0..t.states() as u32 {
            f.add_state(t.is_final(q));
        }
        for q in 0..t.states() as u32 {
            for e in t.edges(q) {
                let output = match e.out {
                    None => Output::Eps,
                    Some(o) => Output::Letter(t.output_alphabet().get(o).clone()),
                };
                let (reads, guard) = match e.inp {
                    None => (false, Guard::True),
                    Some(i) => (true, Guard::Letter(t.input_alphabet().get(i).clone())),
                };
                f.add_edge(q, FrtEdge { reads, guesses: Vec::new(), guard, output, updates: Vec::new(), to: e.to });
            }
        }
        f.initial = t.initial().to_vec();
        f
    }

    /// The identity on every letter.
    pub fn identity() -> Self {
        let mut f = Frt::new(0);
        let q = f.add_state(true);
        f.initial = vec![q];
        f.add_edge(
            q,
            FrtEdge {
                reads: true,
                guesses: Vec::new(),
                guard: Guard::True,
                output: Output::Copy,
                updates: Vec::new(),
                to: q,
            },
        );
        f
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{name}\" {{\n  rankdir=LR;");
        for (q, fin) in self.finals.iter().enumerate() {
            let shape = if *fin { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  s{q} [shape={shape}];");
        }
        for (k, q) in self.initial.iter().enumerate() {
            let _ = writeln!(s, "  start{k} [shape=point];\n  start{k} -> s{q};");
        }
        for (p, es) in self.edges.iter().enumerate() {
            for e in es {
                let _ = writeln!(s, "  s{p} -> s{} [label=\"{}\"];", e.to, edge_label(e).replace('"', "\\\""));
            }
        }
        s.push_str("}\n");
        s
    }
}

impl RegisterMachine for Frt {
    fn registers(&self) -> usize {
        self.registers
    }
    fn initial(&self) -> Vec<u32> {
        self.initial.clone()
    }
    fn is_final(&self, q: u32) -> bool {
        self.finals[q as usize]
    }
    fn edges(&self, q: u32) -> Vec<FrtEdge> {
        self.edges[q as usize].clone()
    }
    fn pins(&self) -> Vec<(Reg, Sym)> {
        self.pins.clone()
    }
    fn literals(&self) -> Vec<Sym> {
        let mut out = BTreeSet::new();
        for e in self.edges.iter().flatten() {
            collect_output_literals(&e.output, &mut out);
        }
        out.into_iter().collect()
    }
}

/// Pins registers of another machine.
pub struct Pinned<M> {
    pub inner: M,
    pub pins: Vec<(Reg, Sym)>,
}

impl<M: RegisterMachine> RegisterMachine for Pinned<M> {
    fn registers(&self) -> usize {
        self.inner.registers()
    }
    fn initial(&self) -> Vec<u32> {
        self.inner.initial()
    }
    fn is_final(&self, q: u32) -> bool {
        self.inner.is_final(q)
    }
    fn edges(&self, q: u32) -> Vec<FrtEdge> {
        self.inner.edges(q)
    }
    fn pins(&self) -> Vec<(Reg, Sym)> {
        let mut p = self.inner.pins();
        p.extend(self.pins.iter().cloned());
        p
    }
    fn literals(&self) -> Vec<Sym> {
        self.inner.literals()
    }
}

/// Sequential composition `M₁.M₂.…`: each part's final states continue
/// into the next part with an ε-move. Registers are shared.
pub struct Chain {
    parts: Vec<Arc<dyn RegisterMachine>>,
}

const PART_SHIFT: u32 = 28;

impl Chain {
    pub fn new(parts: Vec<Arc<dyn RegisterMachine>>) -> Self {
        assert!(!parts.is_empty() && parts.len() < 16);
        Chain { parts }
    }

    fn split(q: u32) -> (usize, u32) {
        ((q >> PART_SHIFT) as usize, q & ((1 << PART_SHIFT) - 1))
    }

    fn join(part: usize, q: u32) -> u32 {
        debug_assert!(q < 1 << PART_SHIFT);
        ((part as u32) << PART_SHIFT) | q
    }
}

impl RegisterMachine for Chain {
    fn registers(&self) -> usize {
        self.parts.iter().map(|p| p.registers()).max().unwrap_or(0)
    }
    fn initial(&self) -> Vec<u32> {
        self.parts[0].initial().into_iter().map(|q| Chain::join(0, q)).collect()
    }
    fn is_final(&self, q: u32) -> bool {
        let (i, q) = Chain::split(q);
        i + 1 == self.parts.len() && self.parts[i].is_final(q)
    }
    fn edges(&self, q: u32) -> Vec<FrtEdge> {
        let (i, inner) = Chain::split(q);
        let mut out: Vec<FrtEdge> = self.parts[i]
            .edges(inner)
            .into_iter()
            .map(|mut e| {
                e.to = Chain::join(i, e.to);
                e
            })
            .collect();
        if i + 1 < self.parts.len() && self.parts[i].is_final(inner) {
            for q2 in self.parts[i + 1].initial() {
                out.push(FrtEdge::eps(Chain::join(i + 1, q2)));
            }
        }
        out
    }
    fn pins(&self) -> Vec<(Reg, Sym)> {
        self.parts.iter().flat_map(|p| p.pins()).collect()
    }
    fn literals(&self) -> Vec<Sym> {
        let mut out: Vec<Sym> = self.parts.iter().flat_map(|p| p.literals()).collect();
        out.sort();
        out.dedup();
        out
    }
}

fn collect_output_literals(o: &Output, out: &mut BTreeSet<Sym>) {
    match o {
        Output::Pair(a, b) => {
            for t in [a, b] {
                if let Term::Lit(s) = t {
                    out.insert(s.clone());
                }
            }
        }
        Output::Letter(TrackSym::Pair(a, b)) => {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        _ => {}
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Top => f.write_str("top"),
            Term::Bottom => f.write_str("bot"),
            Term::Reg(r) => write!(f, "r{r}"),
            Term::Guess(i) => write!(f, "g{i}"),
            Term::Lit(s) => write!(f, "'{s}'"),
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, gs: &[Guard], sep: &str| {
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
            Guard::True => f.write_str("true"),
            Guard::False => f.write_str("false"),
            Guard::Not(g) => write!(f, "¬{g}"),
            Guard::And(gs) => list(f, gs, " ∧ "),
            Guard::Or(gs) => list(f, gs, " ∨ "),
            Guard::Eq(a, b) => write!(f, "{a}={b}"),
            Guard::IsVar(t) => write!(f, "var({t})"),
            Guard::IsConst(t) => write!(f, "const({t})"),
            Guard::IsPad(t) => write!(f, "pad({t})"),
            Guard::Defined(t) => write!(f, "set({t})"),
            Guard::IsPair => f.write_str("pair"),
            Guard::IsDelim => f.write_str("#"),
            Guard::IsLenSep => f.write_str("ℓ"),
            Guard::IsBits => f.write_str("bits"),
            Guard::Letter(l) => write!(f, "{l}"),
        }
    }
}

/// `"action; condition; register update"`.
pub fn edge_label(e: &FrtEdge) -> String {
    let inp = if e.reads { "in" } else { "ε" };
    let out = match &e.output {
        Output::Eps => String::from("ε"),
        Output::Copy => String::from("in"),
        Output::Pair(a, b) => format!("({a}/{b})"),
        Output::Letter(l) => format!("{l}"),
    };
    let mut upd = String::new();
    for (i, c) in e.guesses.iter().enumerate() {
        let _ = write!(upd, "g{i}∈{c:?} ");
    }
    for (i, u) in e.updates.iter().enumerate() {
        if i > 0 {
            upd.push_str(", ");
        }
        match u {
            Update::Set(r, t) => {
                let _ = write!(upd, "r{r}:={t}");
            }
            Update::Clear(r) => {
                let _ = write!(upd, "r{r}:=∅");
            }
        }
    }
    format!("{inp} ↦ {out}; {}; {}", e.guard, upd.trim_end())
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
enum LetterInfo {
    Pair(u32, u32),
    Delim,
    LenSep,
    Bits,
}

/// Interned symbols plus precomputed guess domains.
struct Table {
    syms: Vec<Sym>,
    ids: HashMap<Sym, u32>,
    domain: [Vec<u32>; 3],
}

impl Table {
    fn new(syms: impl IntoIterator<Item = Sym>) -> Self {
        let mut t = Table { syms: Vec::new(), ids: HashMap::new(), domain: Default::default() };
        let mut all: Vec<Sym> = syms.into_iter().collect();
        all.sort();
        all.dedup();
        for s in all {
            t.intern(&s);
        }
        for (k, c) in [Class::Var, Class::Const, Class::Term].into_iter().enumerate() {
            t.domain[k] = (0..t.syms.len() as u32).filter(|&i| c.admits(&t.syms[i as usize])).collect();
        }
        t
    }

    fn intern(&mut self, s: &Sym) -> u32 {
        if let Some(&i) = self.ids.get(s) {
            return i;
        }
        let i = self.syms.len() as u32;
        self.syms.push(s.clone());
        self.ids.insert(s.clone(), i);
        i
    }

    fn domain(&self, c: Class) -> &[u32] {
        match c {
            Class::Var => &self.domain[0],
            Class::Const => &self.domain[1],
            Class::Term => &self.domain[2],
        }
    }

    fn info(&mut self, l: &TrackSym) -> LetterInfo {
        match l {
            TrackSym::Pair(a, b) => LetterInfo::Pair(self.intern(a), self.intern(b)),
            TrackSym::Delim => LetterInfo::Delim,
            TrackSym::LenSep => LetterInfo::LenSep,
            TrackSym::Bits { .. } => LetterInfo::Bits,
        }
    }
}

struct Ctx<'a> {
    letter: Option<(&'a TrackSym, LetterInfo)>,
    val: &'a [u32],
    guesses: &'a [u32],
    table: &'a Table,
}

impl Ctx<'_> {
    fn term(&self, t: &Term) -> u32 {
        match t {
            Term::Top => match self.letter {
                Some((_, LetterInfo::Pair(a, _))) => a,
                _ => NONE,
            },
            Term::Bottom => match self.letter {
                Some((_, LetterInfo::Pair(_, b))) => b,
                _ => NONE,
            },
            Term::Reg(r) => self.val[*r as usize],
            Term::Guess(i) => self.guesses.get(*i as usize).copied().unwrap_or(NONE),
            Term::Lit(s) => self.table.ids.get(s).copied().unwrap_or(NONE),
        }
    }

    fn sym(&self, t: &Term) -> Option<&Sym> {
        let i = self.term(t);
        (i != NONE).then(|| &self.table.syms[i as usize])
    }

    fn guard(&self, g: &Guard) -> bool {
        match g {
            Guard::True => true,
            Guard::False => false,
            Guard::Not(g) => !self.guard(g),
            Guard::And(gs) => gs.iter().all(|g| self.guard(g)),
            Guard::Or(gs) => gs.iter().any(|g| self.guard(g)),
            Guard::Eq(a, b) => {
                let x = self.term(a);
                x != NONE && x == self.term(b)
            }
            Guard::IsVar(t) => self.sym(t).is_some_and(Sym::is_var),
            Guard::IsConst(t) => self.sym(t).is_some_and(Sym::is_const),
            Guard::IsPad(t) => matches!(self.sym(t), Some(Sym::Pad)),
            Guard::Defined(t) => self.term(t) != NONE,
            Guard::IsPair => matches!(self.letter, Some((_, LetterInfo::Pair(..)))),
            Guard::IsDelim => matches!(self.letter, Some((_, LetterInfo::Delim))),
            Guard::IsLenSep => matches!(self.letter, Some((_, LetterInfo::LenSep))),
            Guard::IsBits => matches!(self.letter, Some((_, LetterInfo::Bits))),
            Guard::Letter(l) => self.letter.is_some_and(|(m, _)| m == l),
        }
    }

    /// `Ok(None)` means the output letter is ε, `Err(())` that the output
    /// is undefined.
    fn output(&self, o: &Output) -> core::result::Result<Option<TrackSym>, ()> {
        match o {
            Output::Eps => Ok(None),
            Output::Copy => self.letter.map(|(l, _)| Some(l.clone())).ok_or(()),
            Output::Letter(l) => Ok(Some(l.clone())),
            Output::Pair(a, b) => match (self.sym(a), self.sym(b)) {
                (Some(a), Some(b)) => Ok(Some(TrackSym::Pair(a.clone(), b.clone()))),
                _ => Err(()),
            },
        }
    }

    fn apply(&self, ups: &[Update], pinned: &[u32]) -> Option<Vec<u32>> {
        let mut v = self.val.to_vec();
        for u in ups {
            match u {
                Update::Set(r, t) => {
                    let x = self.term(t);
                    if x == NONE {
                        return None;
                    }
                    let p = pinned[*r as usize];
                    if p != NONE && p != x {
                        return None;
                    }
                    v[*r as usize] = x;
                }
                Update::Clear(r) => {
                    if pinned[*r as usize] == NONE {
                        v[*r as usize] = NONE;
                    }
                }
            }
        }
        Some(v)
    }
}

fn for_each_guess(table: &Table, classes: &[Class], mut f: impl FnMut(&[u32])) {
    if classes.is_empty() {
        f(&[]);
        return;
    }
    let doms: Vec<&[u32]> = classes.iter().map(|&c| table.domain(c)).collect();
    if doms.iter().any(|d| d.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; doms.len()];
    let mut cur: Vec<u32> = doms.iter().map(|d| d[0]).collect();
    loop {
        f(&cur);
        let mut k = doms.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < doms[k].len() {
                cur[k] = doms[k][idx[k]];
                break;
            }
            idx[k] = 0;
            cur[k] = doms[k][0];
        }
    }
}

fn term_syms(letters: &[TrackSym]) -> impl Iterator<Item = Sym> + '_ {
    letters.iter().flat_map(|l| match l {
        TrackSym::Pair(a, b) => vec![a.clone(), b.clone()],
        _ => Vec::new(),
    })
}

/// Counters reported by the lazy product.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ImageStats {
    pub product_states: usize,
    /// Distinct register valuations discovered.
    pub valuations: usize,
    /// Distinct values held per register, maximized over registers.
    pub max_values_per_register: usize,
}

/// What the product records on its result edges.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Record {
    Output,
    Input,
}

struct Product<'a, M: ?Sized> {
    m: &'a M,
    input: &'a Fa,
    out_alpha: &'a Alphabet<TrackSym>,
    filter: Option<&'a Fa>,
    record: Record,
    cap: usize,
}

impl<M: RegisterMachine + ?Sized> Product<'_, M> {
    fn run(&self) -> Result<(Fa, ImageStats)> {
        let mut table = Table::new(
            term_syms(self.input.alphabet().letters())
                .chain(term_syms(self.out_alpha.letters()))
                .chain(self.m.literals())
                .chain(self.m.pins().into_iter().map(|p| p.1)),
        );
        let infos: Vec<LetterInfo> = self.input.alphabet().letters().iter().map(|l| table.info(l)).collect();
        let regs = self.m.registers();
        let mut pinned = vec![NONE; regs];
        for (r, s) in self.m.pins() {
            pinned[r as usize] = table.intern(&s);
        }
        let start_val = pinned.clone();
        let filter_init = self.filter.map(|f| f.initial()[0]).unwrap_or(0);

        let mut vals: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut val_list: Vec<Vec<u32>> = Vec::new();
        vals.insert(start_val.clone(), 0);
        val_list.push(start_val);

        type Key = (u32, u32, u32, u32);
        let mut ids: HashMap<Key, u32> = HashMap::new();
        let mut work: Vec<Key> = Vec::new();
        for q in self.m.initial() {
            for &p in self.input.initial() {
                let k = (p, q, 0, filter_init);
                if !ids.contains_key(&k) {
                    ids.insert(k, work.len() as u32);
                    work.push(k);
                }
            }
        }
        let initial: Vec<u32> = (0..work.len() as u32).collect();
        let mut edge_cache: HashMap<u32, Arc<Vec<FrtEdge>>> = HashMap::new();
        let mut out_edges: Vec<(u32, Option<u32>, u32)> = Vec::new();
        let mut finals = Vec::new();
        let mut i = 0;
        while i < work.len() {
            if work.len() > self.cap {
                return Err(Error::Resource(format!("product exceeded {} states", self.cap)));
            }
            let (p, q, vid, fq) = work[i];
            let id = i as u32;
            i += 1;
            let val = val_list[vid as usize].clone();
            if self.input.is_final(p) && self.m.is_final(q) && self.filter.is_none_or(|f| f.is_final(fq)) {
                finals.push(id);
            }
            let edges = edge_cache.entry(q).or_insert_with(|| Arc::new(self.m.edges(q))).clone();
            let mut succ: Vec<(Key, Option<u32>)> = Vec::new();
            // ε-moves of the automaton
            for &(lab, p2) in self.input.edges(p) {
                if lab.is_none() {
                    succ.push(((p2, q, vid, fq), None));
                }
            }
            for e in edges.iter() {
                let moves: Vec<(Option<u32>, u32)> = if e.reads {
                    self.input.edges(p).iter().filter(|x| x.0.is_some()).copied().collect()
                } else {
                    vec![(None, p)]
                };
                for (lab, p2) in moves {
                    let letter = lab.map(|l| (self.input.alphabet().get(l), infos[l as usize]));
                    for_each_guess(&table, &e.guesses, |gs| {
                        let ctx = Ctx { letter, val: &val, guesses: gs, table: &table };
                        if !ctx.guard(&e.guard) {
                            return;
                        }
                        let Ok(out) = ctx.output(&e.output) else { return };
                        let Some(nv) = ctx.apply(&e.updates, &pinned) else { return };
                        let out_idx = match &out {
                            None => None,
                            Some(l) => match self.out_alpha.index(l) {
                                Some(ix) => Some(ix),
                                None => return,
                            },
                        };
                        let fq2 = match (self.filter, out_idx) {
                            (Some(f), Some(o)) => {
                                let es = f.edges(fq);
                                match es.binary_search_by_key(&Some(o), |x| x.0) {
                                    Ok(k) => es[k].1,
                                    Err(_) => return,
                                }
                            }
                            _ => fq,
                        };
                        let nvid = match vals.get(&nv) {
                            Some(&v) => v,
                            None => {
                                let v = val_list.len() as u32;
                                vals.insert(nv.clone(), v);
                                val_list.push(nv);
                                v
                            }
                        };
                        let rec = match self.record {
                            Record::Output => out_idx,
                            Record::Input => lab,
                        };
                        succ.push(((p2, e.to, nvid, fq2), rec));
                    });
                }
            }
            for (k, lab) in succ {
                let tgt = match ids.get(&k) {
                    Some(&t) => t,
                    None => {
                        let t = work.len() as u32;
                        ids.insert(k, t);
                        work.push(k);
                        t
                    }
                };
                out_edges.push((id, lab, tgt));
            }
        }
        let mut per_reg: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); regs];
        for v in &val_list {
            for (r, &x) in v.iter().enumerate() {
                if x != NONE {
                    per_reg[r].insert(x);
                }
            }
        }
        let stats = ImageStats {
            product_states: work.len(),
            valuations: val_list.len(),
            max_values_per_register: per_reg.iter().map(BTreeSet::len).max().unwrap_or(0),
        };
        let alpha = match self.record {
            Record::Output => self.out_alpha.clone(),
            Record::Input => self.input.alphabet().clone(),
        };
        Ok((Fa::from_raw(alpha, work.len(), out_edges, initial, finals).normalize(), stats))
    }
}

pub const DEFAULT_PRODUCT_CAP: usize = 2_000_000;

/// Lazy image `{ v | ∃u ∈ L(l): (u, v) ∈ R(m) }` over `out_alpha`.
/// Output letters outside `out_alpha` are not produced.
pub fn image<M: RegisterMachine + ?Sized>(m: &M, l: &Fa, out_alpha: &Alphabet<TrackSym>) -> Result<Fa> {
    image_with_stats(m, l, out_alpha, DEFAULT_PRODUCT_CAP).map(|r| r.0)
}

pub fn image_with_stats<M: RegisterMachine + ?Sized>(
    m: &M,
    l: &Fa,
    out_alpha: &Alphabet<TrackSym>,
    cap: usize,
) -> Result<(Fa, ImageStats)> {
    Product { m, input: l, out_alpha, filter: None, record: Record::Output, cap }.run()
}

/// `{ u ∈ L(restrict) | ∃v ∈ L(target): (u, v) ∈ R(m) }`.
pub fn preimage_into<M: RegisterMachine + ?Sized>(m: &M, target: &Fa, restrict: &Fa, cap: usize) -> Result<Fa> {
    let t = target.normalize();
    Product { m, input: restrict, out_alpha: t.alphabet(), filter: Some(&t), record: Record::Input, cap }
        .run()
        .map(|r| r.0)
}

/// Materializes the machine over explicit alphabets. States are the
/// reachable (control state, valuation) pairs.
pub fn expand<M: RegisterMachine + ?Sized>(
    m: &M,
    in_alpha: &Alphabet<TrackSym>,
    out_alpha: &Alphabet<TrackSym>,
) -> Transducer {
    let mut table = Table::new(
        term_syms(in_alpha.letters())
            .chain(term_syms(out_alpha.letters()))
            .chain(m.literals())
            .chain(m.pins().into_iter().map(|p| p.1)),
    );
    let infos: Vec<LetterInfo> = in_alpha.letters().iter().map(|l| table.info(l)).collect();
    let mut pinned = vec![NONE; m.registers()];
    for (r, s) in m.pins() {
        pinned[r as usize] = table.intern(&s);
    }
    let mut ids: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
    let mut work: Vec<(u32, Vec<u32>)> = Vec::new();
    for q in m.initial() {
        let k = (q, pinned.clone());
        if !ids.contains_key(&k) {
            ids.insert(k.clone(), work.len() as u32);
            work.push(k);
        }
    }
    let initial: Vec<u32> = (0..work.len() as u32).collect();
    let mut edges: Vec<Vec<TEdge>> = Vec::new();
    let mut finals = Vec::new();
    let mut i = 0;
    while i < work.len() {
        let (q, val) = work[i].clone();
        i += 1;
        finals.push(m.is_final(q));
        let mut out = Vec::new();
        for e in m.edges(q) {
            let letters: Vec<Option<u32>> =
                if e.reads { (0..in_alpha.len() as u32).map(Some).collect() } else { vec![None] };
            for lab in letters {
                let letter = lab.map(|l| (in_alpha.get(l), infos[l as usize]));
                for_each_guess(&table, &e.guesses, |gs| {
                    let ctx = Ctx { letter, val: &val, guesses: gs, table: &table };
                    if !ctx.guard(&e.guard) {
                        return;
                    }
                    let Ok(o) = ctx.output(&e.output) else { return };
                    let Some(nv) = ctx.apply(&e.updates, &pinned) else { return };
                    let out_idx = match &o {
                        None => None,
                        Some(l) => match out_alpha.index(l) {
                            Some(ix) => Some(ix),
                            None => return,
                        },
                    };
                    let k = (e.to, nv);
                    let to = match ids.get(&k) {
                        Some(&t) => t,
                        None => {
                            let t = work.len() as u32;
                            ids.insert(k.clone(), t);
                            work.push(k);
                            t
                        }
                    };
                    out.push(TEdge { inp: lab, out: out_idx, to });
                });
            }
        }
        edges.push(out);
    }
    Transducer::from_raw(in_alpha.clone(), out_alpha.clone(), edges, initial, finals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha() -> Alphabet<TrackSym> {
        let syms = [Sym::Const('a'), Sym::var("x"), Sym::Pad];
        Alphabet::new(syms.iter().flat_map(|a| syms.iter().map(move |b| TrackSym::Pair(a.clone(), b.clone()))))
    }

    /// Rewrites every top component to the register value guessed first.
    fn top_to_reg() -> Frt {
        let mut f = Frt::new(1);
        let s0 = f.add_state(false);
        let s1 = f.add_state(true);
        f.initial = vec![s0];
        f.add_edge(
            s0,
            FrtEdge {
                reads: false,
                guesses: vec![Class::Term],
                guard: Guard::True,
                output: Output::Eps,
                updates: vec![Update::Set(0, Term::Guess(0))],
                to: s1,
            },
        );
        f.add_edge(
            s1,
            FrtEdge {
                reads: true,
                guesses: Vec::new(),
                guard: Guard::not(Guard::IsPad(Term::Top)),
                output: Output::Pair(Term::Reg(0), Term::Bottom),
                updates: Vec::new(),
                to: s1,
            },
        );
        f
    }

    fn word(letters: &[(Sym, Sym)]) -> Vec<TrackSym> {
        letters.iter().map(|(a, b)| TrackSym::Pair(a.clone(), b.clone())).collect()
    }

    #[test]
    fn lazy_matches_expanded() {
        let f = top_to_reg();
        let w = word(&[(Sym::Const('a'), Sym::var("x")), (Sym::var("x"), Sym::Pad)]);
        let l = Fa::word(alpha(), &w).unwrap();
        let lazy = image(&f, &l, &alpha()).unwrap();
        let t = expand(&f, &alpha(), &alpha());
        assert!(lazy.equivalent(&t.image(&l).unwrap()).unwrap());
        // two guesses: a and x
        assert_eq!(lazy.words_up_to(3, 10).len(), 2);
    }

    #[test]
    fn pinned_register_filters_guesses() {
        let f = Pinned { inner: top_to_reg(), pins: vec![(0, Sym::var("x"))] };
        let w = word(&[(Sym::Const('a'), Sym::Const('a'))]);
        let l = Fa::word(alpha(), &w).unwrap();
        let img = image(&f, &l, &alpha()).unwrap();
        assert_eq!(img.pick_word(), Some(word(&[(Sym::var("x"), Sym::Const('a'))])));
        assert_eq!(img.words_up_to(2, 10).len(), 1);
    }

    #[test]
    fn identity_and_empty() {
        let w = word(&[(Sym::Const('a'), Sym::var("x"))]);
        let l = Fa::word(alpha(), &w).unwrap().star();
        assert!(image(&Frt::identity(), &l, &alpha()).unwrap().equivalent(&l).unwrap());
        assert!(image(&top_to_reg(), &Fa::empty(alpha()), &alpha()).unwrap().is_empty());
    }

    #[test]
    fn preimage_restricts_to_domain() {
        let f = top_to_reg();
        let a = Sym::Const('a');
        let x = Sym::var("x");
        let restrict = Fa::word(alpha(), &word(&[(a.clone(), a.clone())]))
            .unwrap()
            .union(&Fa::word(alpha(), &word(&[(x.clone(), x.clone())])).unwrap())
            .unwrap();
        let target = Fa::word(alpha(), &word(&[(x.clone(), a.clone())])).unwrap();
        let pre = preimage_into(&f, &target, &restrict, DEFAULT_PRODUCT_CAP).unwrap();
        assert_eq!(pre.words_up_to(2, 10), vec![word(&[(a.clone(), a)])]);
    }

    #[test]
    fn labels_follow_action_condition_update() {
        let f = top_to_reg();
        let l = edge_label(&f.edges[0][0]);
        assert_eq!(l, "ε ↦ ε; true; g0∈Term r0:=g0");
        assert!(f.to_dot("t").contains("in ↦ (r0/bot); ¬pad(top);"));
    }

    #[test]
    fn chain_runs_parts_in_order() {
        let a = Sym::Const('a');
        let first: Arc<dyn RegisterMachine> = Arc::new(top_to_reg());
        let second: Arc<dyn RegisterMachine> = Arc::new(Frt::identity());
        let c = Chain::new(vec![first, second]);
        let w = word(&[(a.clone(), a.clone()), (Sym::Pad, Sym::Pad)]);
        let img = image(&c, &Fa::word(alpha(), &w).unwrap(), &alpha()).unwrap();
        assert!(img.accepts(&word(&[(Sym::var("x"), a.clone()), (Sym::Pad, Sym::Pad)])).unwrap());
    }
}
