//! Proof-step transducers: trim, bounded substitutions, guarded single and
//! system steps, and the quartic-to-cubic cut.
//!
//! The substitution relations are length preserving on each track: a
//! track `u⋄ᵖ` is related to `σ(u)⋄ᵖ'` of the same total length. Prepending
//! keeps a queue of pending output symbols; erasing guesses the output
//! ahead of the input and keeps a queue of symbols the input still owes.
//! Both queues have at most `n` entries because each of the at most `n`
//! occurrences of `x` grows them by one.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Result;
use crate::fa::{Alphabet, Fa};
use crate::frt::{Class, FrtEdge, Guard, Output, Pinned, Reg, RegisterMachine, Term, Update};
use crate::sym::{Sym, TrackSym, VarName};
use crate::transducer::Transducer;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleTag {
    /// `x → ε`
    VarEps(VarName),
    /// `x → αx`
    VarPrepend(VarName, Sym),
    /// Cut introducing the variable.
    Cut(VarName),
    EpsAny,
    PrependAny,
}

impl RuleTag {
    pub fn var(&self) -> Option<&VarName> {
        match self {
            RuleTag::VarEps(x) | RuleTag::VarPrepend(x, _) | RuleTag::Cut(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Debug for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleTag::VarEps(x) => write!(f, "{x}→ε"),
            RuleTag::VarPrepend(x, a) => write!(f, "{x}→{a}{x}"),
            RuleTag::Cut(v) => write!(f, "cut({v})"),
            RuleTag::EpsAny => f.write_str("x→ε (any x)"),
            RuleTag::PrependAny => f.write_str("x→αx (any x, α)"),
        }
    }
}

/// Nondeterministic trimming of equal leading letters `(β/β)`.
pub fn build_trim(alpha: &Alphabet<TrackSym>) -> Transducer {
    let mut edges = Vec::new();
    for l in alpha.letters() {
        if let TrackSym::Pair(a, b) = l {
            if a == b && a.is_term_symbol() {
                edges.push((0, Some(l.clone()), None, 0));
            }
        }
        edges.push((0, Some(l.clone()), Some(l.clone()), 1));
        edges.push((1, Some(l.clone()), Some(l.clone()), 1));
    }
    Transducer::from_edges(alpha.clone(), alpha.clone(), 2, edges, [0], [0, 1]).expect("letters come from the alphabet")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subst {
    /// `x ↦ αx`
    Prepend,
    /// `x ↦ ε`
    Erase,
}

pub const REG_X: Reg = 0;
pub const REG_A: Reg = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Start,
    Pass,
    Seg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Ctl {
    phase: Phase,
    count: u8,
    qt: u8,
    qb: u8,
    tpad: bool,
    bpad: bool,
    topad: bool,
    bopad: bool,
    trim: bool,
}

impl Ctl {
    fn start(phase: Phase) -> Self {
        Ctl { phase, count: 0, qt: 0, qb: 0, tpad: false, bpad: false, topad: false, bopad: false, trim: true }
    }
}

/// One of the two substitution families as a register machine.
///
/// * guarded: the first letter of the (first non-empty) equation selects
///   `x` and `α` according to the Nielsen rule, and the result is trimmed.
/// * free: `x` and `α` are guessed up front; no guard, no trim.
///
/// In system layout, a prefix of `(⋄/⋄)` and `(#/#)` is copied, and each
/// following segment gets the same substitution, trimmed, with its own
/// occurrence bound.
#[derive(Clone, Debug)]
pub struct StepMachine {
    pub kind: Subst,
    pub bound: usize,
    pub guarded: bool,
    pub system: bool,
}

struct TrackOpt {
    guard: Guard,
    out: Term,
    updates: Vec<Update>,
    guess: Option<Class>,
    occ: u8,
    q: u8,
    in_pad: bool,
    out_pad: bool,
}

impl StepMachine {
    pub fn guarded(kind: Subst, bound: usize, system: bool) -> Self {
        assert!(bound >= 1);
        StepMachine { kind, bound, guarded: true, system }
    }

    pub fn free(kind: Subst, bound: usize) -> Self {
        assert!(bound >= 1);
        StepMachine { kind, bound, guarded: false, system: false }
    }

    /// The member of the family for one rule.
    pub fn pinned(self, tag: &RuleTag) -> Pinned<StepMachine> {
        let pins = match tag {
            RuleTag::VarEps(x) => vec![(REG_X, Sym::Var(x.clone()))],
            RuleTag::VarPrepend(x, a) => vec![(REG_X, Sym::Var(x.clone())), (REG_A, a.clone())],
            _ => Vec::new(),
        };
        Pinned { inner: self, pins }
    }

    pub fn tag(&self) -> RuleTag {
        match self.kind {
            Subst::Prepend => RuleTag::PrependAny,
            Subst::Erase => RuleTag::EpsAny,
        }
    }

    fn radix(&self) -> u32 {
        self.bound as u32 + 1
    }

    fn pack(&self, c: Ctl) -> u32 {
        let r = self.radix();
        let phase = match c.phase {
            Phase::Start => 0,
            Phase::Pass => 1,
            Phase::Seg => 2,
        };
        let flags = (c.tpad as u32) | (c.bpad as u32) << 1 | (c.topad as u32) << 2 | (c.bopad as u32) << 3;
        ((((phase * r + c.count as u32) * r + c.qt as u32) * r + c.qb as u32) * 16 + flags) * 2 + c.trim as u32
    }

    fn unpack(&self, mut id: u32) -> Ctl {
        let r = self.radix();
        let trim = id % 2 == 1;
        id /= 2;
        let flags = id % 16;
        id /= 16;
        let qb = (id % r) as u8;
        id /= r;
        let qt = (id % r) as u8;
        id /= r;
        let count = (id % r) as u8;
        id /= r;
        let phase = match id {
            0 => Phase::Start,
            1 => Phase::Pass,
            _ => Phase::Seg,
        };
        Ctl {
            phase,
            count,
            qt,
            qb,
            tpad: flags & 1 != 0,
            bpad: flags & 2 != 0,
            topad: flags & 4 != 0,
            bopad: flags & 8 != 0,
            trim,
        }
    }

    fn queue_base(&self, top: bool) -> Reg {
        if top {
            2
        } else {
            2 + self.bound as Reg
        }
    }

    /// Updates turning a queue of length `old` into `items`.
    fn queue_updates(base: Reg, old: u8, items: &[Term]) -> Vec<Update> {
        let mut ups = Vec::new();
        for (k, t) in items.iter().enumerate() {
            let r = base + k as Reg;
            if *t != Term::Reg(r) {
                ups.push(Update::Set(r, t.clone()));
            }
        }
        for k in items.len()..old as usize {
            ups.push(Update::Clear(base + k as Reg));
        }
        ups
    }

    #[allow(clippy::too_many_arguments)]
    fn track_opts(
        &self,
        top: bool,
        q: u8,
        in_pad: bool,
        out_pad: bool,
        xt: &Term,
        at: &Term,
        guess_idx: u8,
    ) -> Vec<TrackOpt> {
        let s = if top { Term::Top } else { Term::Bottom };
        let base = self.queue_base(top);
        let queue: Vec<Term> = (0..q).map(|k| Term::Reg(base + k as Reg)).collect();
        let is_x = Guard::eq(s.clone(), xt.clone());
        let other = Guard::and([Guard::not(Guard::IsPad(s.clone())), Guard::not(is_x.clone())]);
        let pad = Guard::IsPad(s.clone());
        let mut opts = Vec::new();
        let opt = |guard, out, items: &[Term], guess, occ, in_pad, out_pad| TrackOpt {
            guard,
            out,
            updates: Self::queue_updates(base, q, items),
            guess,
            occ,
            q: items.len() as u8,
            in_pad,
            out_pad,
        };
        match self.kind {
            Subst::Prepend => {
                if !in_pad {
                    let mut l = queue.clone();
                    l.push(at.clone());
                    l.push(xt.clone());
                    opts.push(opt(is_x, l[0].clone(), &l[1..], None, 1, false, false));
                    let mut l = queue.clone();
                    l.push(s.clone());
                    opts.push(opt(other, l[0].clone(), &l[1..], None, 0, false, false));
                }
                if q == 0 {
                    opts.push(opt(pad, Term::Lit(Sym::Pad), &[], None, 0, true, false));
                } else {
                    opts.push(opt(pad, queue[0].clone(), &queue[1..], None, 0, true, false));
                }
            }
            Subst::Erase => {
                let g = Term::Guess(guess_idx);
                let fresh = Guard::not(Guard::Eq(g.clone(), xt.clone()));
                if !in_pad {
                    if !out_pad {
                        let mut l = queue.clone();
                        l.push(g.clone());
                        let guard = Guard::and([is_x.clone(), fresh.clone()]);
                        opts.push(opt(guard, g.clone(), &l, Some(Class::Term), 1, false, false));
                    }
                    opts.push(opt(is_x, Term::Lit(Sym::Pad), &queue, None, 1, false, true));
                    if q == 0 {
                        if !out_pad {
                            opts.push(opt(other, s.clone(), &[], None, 0, false, false));
                        }
                    } else {
                        let pop = Guard::and([other, Guard::Eq(s.clone(), queue[0].clone())]);
                        if !out_pad {
                            let mut l = queue[1..].to_vec();
                            l.push(g.clone());
                            let guard = Guard::and([pop.clone(), fresh]);
                            opts.push(opt(guard, g.clone(), &l, Some(Class::Term), 0, false, false));
                        }
                        opts.push(opt(pop, Term::Lit(Sym::Pad), &queue[1..], None, 0, false, true));
                    }
                }
                if q == 0 {
                    opts.push(opt(pad, Term::Lit(Sym::Pad), &[], None, 0, true, true));
                }
            }
        }
        opts
    }

    /// Transitions reading one pair letter in a segment.
    fn pair_edges(&self, c: Ctl, xt: &Term, at: &Term, extra: Guard, sets: &[Update], out: &mut Vec<FrtEdge>) {
        for t in self.track_opts(true, c.qt, c.tpad, c.topad, xt, at, 0) {
            let gi = t.guess.is_some() as u8;
            for b in self.track_opts(false, c.qb, c.bpad, c.bopad, xt, at, gi) {
                let count = c.count + t.occ + b.occ;
                if count as usize > self.bound {
                    continue;
                }
                let guard = Guard::and([Guard::IsPair, extra.clone(), t.guard.clone(), b.guard.clone()]);
                if guard == Guard::False {
                    continue;
                }
                let mut updates = sets.to_vec();
                updates.extend(t.updates.iter().cloned());
                updates.extend(b.updates.iter().cloned());
                let guesses: Vec<Class> = t.guess.into_iter().chain(b.guess).collect();
                let next = Ctl {
                    phase: Phase::Seg,
                    count,
                    qt: t.q,
                    qb: b.q,
                    tpad: t.in_pad,
                    bpad: b.in_pad,
                    topad: t.out_pad,
                    bopad: b.out_pad,
                    trim: false,
                };
                let pair = Output::Pair(t.out.clone(), b.out.clone());
                if c.trim {
                    let same =
                        Guard::and([Guard::eq(t.out.clone(), b.out.clone()), Guard::not(Guard::IsPad(t.out.clone()))]);
                    out.push(FrtEdge {
                        reads: true,
                        guesses: guesses.clone(),
                        guard: Guard::and([guard.clone(), same.clone()]),
                        output: Output::Eps,
                        updates: updates.clone(),
                        to: self.pack(Ctl { trim: true, ..next }),
                    });
                    out.push(FrtEdge {
                        reads: true,
                        guesses,
                        guard: Guard::and([guard, Guard::not(same)]),
                        output: pair,
                        updates,
                        to: self.pack(next),
                    });
                } else {
                    out.push(FrtEdge { reads: true, guesses, guard, output: pair, updates, to: self.pack(next) });
                }
            }
        }
    }

    fn first_letter_edges(&self, out: &mut Vec<FrtEdge>) {
        let seg = Ctl::start(Phase::Seg);
        for (xt, at) in [(Term::Top, Term::Bottom), (Term::Bottom, Term::Top)] {
            let mut sets = vec![Update::Set(REG_X, xt.clone())];
            let guard = match self.kind {
                Subst::Prepend => {
                    sets.push(Update::Set(REG_A, at.clone()));
                    Guard::and([
                        Guard::IsVar(xt.clone()),
                        Guard::not(Guard::IsPad(at.clone())),
                        Guard::not(Guard::Eq(xt.clone(), at.clone())),
                    ])
                }
                Subst::Erase => Guard::IsVar(xt.clone()),
            };
            self.pair_edges(seg, &xt, &at, guard, &sets, out);
        }
    }
}

impl RegisterMachine for StepMachine {
    fn registers(&self) -> usize {
        2 + 2 * self.bound
    }

    fn initial(&self) -> Vec<u32> {
        let phase = if self.system { Phase::Pass } else { Phase::Start };
        vec![self.pack(Ctl::start(phase))]
    }

    fn is_final(&self, q: u32) -> bool {
        let c = self.unpack(q);
        c.phase == Phase::Seg && c.qt == 0 && c.qb == 0
    }

    fn edges(&self, q: u32) -> Vec<FrtEdge> {
        let c = self.unpack(q);
        let mut out = Vec::new();
        let xt = Term::Reg(REG_X);
        let at = Term::Reg(REG_A);
        match c.phase {
            Phase::Start if !self.guarded => {
                let seg = Ctl { trim: false, ..Ctl::start(Phase::Seg) };
                let (guesses, guard, updates) = match self.kind {
                    Subst::Prepend => (
                        vec![Class::Var, Class::Term],
                        Guard::not(Guard::Eq(Term::Guess(0), Term::Guess(1))),
                        vec![Update::Set(REG_X, Term::Guess(0)), Update::Set(REG_A, Term::Guess(1))],
                    ),
                    Subst::Erase => (vec![Class::Var], Guard::True, vec![Update::Set(REG_X, Term::Guess(0))]),
                };
                out.push(FrtEdge { reads: false, guesses, guard, output: Output::Eps, updates, to: self.pack(seg) });
            }
            Phase::Start => self.first_letter_edges(&mut out),
            Phase::Pass => {
                for l in [TrackSym::pad(), TrackSym::Delim] {
                    out.push(FrtEdge {
                        reads: true,
                        guesses: Vec::new(),
                        guard: Guard::Letter(l),
                        output: Output::Copy,
                        updates: Vec::new(),
                        to: q,
                    });
                }
                self.first_letter_edges(&mut out);
            }
            Phase::Seg => {
                self.pair_edges(c, &xt, &at, Guard::True, &[], &mut out);
                if self.system && c.qt == 0 && c.qb == 0 {
                    out.push(FrtEdge {
                        reads: true,
                        guesses: Vec::new(),
                        guard: Guard::IsDelim,
                        output: Output::Copy,
                        updates: Vec::new(),
                        to: self.pack(Ctl::start(Phase::Seg)),
                    });
                }
            }
        }
        out
    }

    fn literals(&self) -> Vec<Sym> {
        vec![Sym::Pad]
    }
}

/// `T^{≤n}_{⇝x→αx}` and `T^{≤n}_{⇝x→ε}` for single equations.
pub fn build_step_single(bound: usize) -> [StepMachine; 2] {
    [StepMachine::guarded(Subst::Erase, bound, false), StepMachine::guarded(Subst::Prepend, bound, false)]
}

/// `T^{⋈,i}` for both rule kinds.
pub fn build_step_system(bound: usize) -> [StepMachine; 2] {
    [StepMachine::guarded(Subst::Erase, bound, true), StepMachine::guarded(Subst::Prepend, bound, true)]
}

/// `S^{≤n}_{x↦αx}`, unguarded and untrimmed.
pub fn build_subst_prepend(bound: usize) -> StepMachine {
    StepMachine::free(Subst::Prepend, bound)
}

/// `S^{≤n}_{x↦ε}`, unguarded and untrimmed.
pub fn build_subst_eps(bound: usize) -> StepMachine {
    StepMachine::free(Subst::Erase, bound)
}

/// All concrete rules over the given variables and symbols, in the order
/// model extraction tries them: erasures, then prepends by `(x, α)`.
pub fn rules(vars: &[VarName], consts: &[char]) -> Vec<RuleTag> {
    let mut out: Vec<RuleTag> = vars.iter().cloned().map(RuleTag::VarEps).collect();
    let mut syms: Vec<Sym> = consts.iter().map(|&c| Sym::Const(c)).collect();
    syms.extend(vars.iter().cloned().map(Sym::Var));
    for x in vars {
        for a in &syms {
            if a.as_var() != Some(x) {
                out.push(RuleTag::VarPrepend(x.clone(), a.clone()));
            }
        }
    }
    out
}

/// Words in which `x` occurs on the tracks exactly `k` times (`exact`) or
/// at most `k` times.
pub fn occurrence_fa(alpha: &Alphabet<TrackSym>, x: &VarName, k: usize, exact: bool) -> Fa {
    let xs = Sym::Var(x.clone());
    let mut edges = Vec::new();
    for (i, l) in alpha.letters().iter().enumerate() {
        let c = match l {
            TrackSym::Pair(a, b) => (*a == xs) as usize + (*b == xs) as usize,
            _ => 0,
        };
        for q in 0..=k {
            if q + c <= k {
                edges.push((q as u32, Some(i as u32), (q + c) as u32));
            }
        }
    }
    let finals: Vec<u32> = if exact { vec![k as u32] } else { (0..=k as u32).collect() };
    Fa::from_raw(alpha.clone(), k + 1, edges, [0], finals).normalize()
}

/// Every variable occurs at most three times.
pub fn cubic_fa(alpha: &Alphabet<TrackSym>, vars: &[VarName]) -> Result<Fa> {
    let mut acc = Fa::universal(alpha.clone());
    for y in vars {
        acc = acc.intersect(&occurrence_fa(alpha, y, 3, false))?;
    }
    Ok(acc)
}

/// `x` occurs exactly four times and every other variable at most three.
pub fn quartic_fa(alpha: &Alphabet<TrackSym>, vars: &[VarName], x: &VarName) -> Result<Fa> {
    let mut acc = occurrence_fa(alpha, x, 4, true);
    for y in vars.iter().filter(|y| *y != x) {
        acc = acc.intersect(&occurrence_fa(alpha, y, 3, false))?;
    }
    Ok(acc)
}

/// Replaces the first two occurrences of `x` (top before bottom within a
/// letter) by `v` on inputs with exactly four occurrences, and appends
/// `(#/#)(x/v)(⋄/⋄)*`.
pub fn build_square_cut(
    in_alpha: &Alphabet<TrackSym>,
    out_alpha: &Alphabet<TrackSym>,
    x: &VarName,
    v: &VarName,
) -> Result<Transducer> {
    let xs = Sym::Var(x.clone());
    let vs = Sym::Var(v.clone());
    let (after_delim, done) = (5u32, 6u32);
    let mut edges = Vec::new();
    for l in in_alpha.letters() {
        for c in 0..=4u32 {
            let (out, c2) = match l {
                TrackSym::Pair(a, b) => {
                    let mut c2 = c;
                    let mut side = |s: &Sym| {
                        if *s == xs {
                            c2 += 1;
                            if c2 <= 2 {
                                return vs.clone();
                            }
                        }
                        s.clone()
                    };
                    let a2 = side(a);
                    let b2 = side(b);
                    (TrackSym::Pair(a2, b2), c2)
                }
                other => (other.clone(), c),
            };
            if c2 <= 4 {
                edges.push((c, Some(l.clone()), Some(out), c2));
            }
        }
    }
    edges.push((4, None, Some(TrackSym::Delim), after_delim));
    edges.push((after_delim, None, Some(TrackSym::Pair(xs, vs)), done));
    edges.push((done, None, Some(TrackSym::pad()), done));
    Ok(Transducer::from_edges(in_alpha.clone(), out_alpha.clone(), 7, edges, [0], [done])?
        .with_tag(RuleTag::Cut(v.clone())))
}

/// `T_{C_v}` as one explicit transducer: the identity on cubic words plus
/// the square cut for each variable.
pub fn build_cut(
    in_alpha: &Alphabet<TrackSym>,
    out_alpha: &Alphabet<TrackSym>,
    vars: &[VarName],
    v: &VarName,
) -> Result<Transducer> {
    let cubic = cubic_fa(in_alpha, vars)?;
    let id = Transducer::identity(&cubic);
    let lifted = Transducer::compose(&identity_into(in_alpha, out_alpha)?, &id)?;
    let mut acc = lifted;
    for x in vars {
        let quartic = Transducer::identity(&quartic_fa(in_alpha, vars, x)?);
        let sq = Transducer::compose(&build_square_cut(in_alpha, out_alpha, x, v)?, &quartic)?;
        acc = acc.union(&sq)?;
    }
    Ok(acc.with_tag(RuleTag::Cut(v.clone())))
}

/// The identity from a sub-alphabet into a larger one.
fn identity_into(in_alpha: &Alphabet<TrackSym>, out_alpha: &Alphabet<TrackSym>) -> Result<Transducer> {
    Transducer::from_edges(
        in_alpha.clone(),
        out_alpha.clone(),
        1,
        in_alpha.letters().iter().map(|l| (0, Some(l.clone()), Some(l.clone()), 0)),
        [0],
        [0],
    )
}

/// `T_{C_v}(L)` computed per branch, avoiding the product of all counters
/// with the transducer.
pub fn cut_image(l: &Fa, out_alpha: &Alphabet<TrackSym>, vars: &[VarName], v: &VarName) -> Result<Fa> {
    let in_alpha = l.alphabet().clone();
    let mut parts = vec![l.intersect(&cubic_fa(&in_alpha, vars)?)?.with_alphabet(out_alpha)?];
    for x in vars {
        let q = l.intersect(&quartic_fa(&in_alpha, vars, x)?)?;
        if q.is_empty() {
            continue;
        }
        parts.push(build_square_cut(&in_alpha, out_alpha, x, v)?.image(&q)?);
    }
    Fa::union_all(out_alpha, parts.iter())
}

/// `T_{C_v}⁻¹(target)` over `in_alpha`.
pub fn cut_preimage(target: &Fa, in_alpha: &Alphabet<TrackSym>, vars: &[VarName], v: &VarName) -> Result<Fa> {
    let vs = Sym::Var(v.clone());
    let without_v = target.relabel(in_alpha, |l| match l {
        TrackSym::Pair(a, b) if *a == vs || *b == vs => Vec::new(),
        l => vec![Some(l.clone())],
    })?;
    let mut parts = vec![without_v.intersect(&cubic_fa(in_alpha, vars)?)?];
    for x in vars {
        let sq = build_square_cut(in_alpha, target.alphabet(), x, v)?;
        let pre = sq.inverse().image(target)?;
        parts.push(pre.intersect(&quartic_fa(in_alpha, vars, x)?)?);
    }
    Fa::union_all(in_alpha, parts.iter())
}

/// The reserved name of the `i`-th cut variable.
pub fn cut_var(i: usize) -> VarName {
    VarName::from(format!("v~{i}"))
}
