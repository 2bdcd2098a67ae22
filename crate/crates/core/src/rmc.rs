//! The reachability loop over configuration languages and backward model
//! extraction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::encoding::{dest_set, split_length, Layout, Universe};
use crate::error::{Error, Result};
use crate::fa::{Alphabet, Fa};
use crate::formula::Model;
use crate::frt::{image_with_stats, preimage_into, RegisterMachine, DEFAULT_PRODUCT_CAP};
use crate::length::{build_len_step, combine_eq_len, decode_bits};
use crate::nielsen::{cut_image, cut_preimage, cut_var, quartic_fa, rules, RuleTag, StepMachine, Subst};
use crate::sym::{Sym, TrackSym, VarName};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Fixed bound 2. Terminates on quadratic inputs.
    Quadratic,
    /// Bound 3 after a cut that introduces a fresh variable each round.
    CubicCut,
    /// Growing bounds, no cut.
    Complete,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Quadratic => "quadratic",
            Mode::CubicCut => "cubic",
            Mode::Complete => "complete",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_iters: usize,
    pub timeout: Option<Duration>,
    /// Limit on product states per image or preimage computation.
    pub product_cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_iters: 1000, timeout: Some(Duration::from_secs(20)), product_cap: DEFAULT_PRODUCT_CAP }
    }
}

/// Time since the solve started.
pub trait Clock {
    fn elapsed(&self) -> Duration;
}

/// A clock that never advances; only the iteration budget applies.
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    Budget,
    CnfCap,
    Resource(String),
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnknownReason::Budget => f.write_str("budget"),
            UnknownReason::CnfCap => f.write_str("cnf-cap"),
            UnknownReason::Resource(m) => write!(f, "resource: {m}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Model),
    Unsat,
    Unknown(UnknownReason),
}

impl SolveResult {
    pub fn verdict(&self) -> &'static str {
        match self {
            SolveResult::Sat(_) => "sat",
            SolveResult::Unsat => "unsat",
            SolveResult::Unknown(_) => "unknown",
        }
    }
}

/// The initial set, its universe and the shape of its words.
#[derive(Clone, Debug)]
pub struct RmcProblem {
    pub universe: Universe,
    pub layout: Layout,
    pub initial: Fa,
    pub destination: Fa,
    pub mode: Mode,
    /// The length-tracked variables in track order, when lengths are encoded.
    pub len_vars: Option<Vec<VarName>>,
}

impl RmcProblem {
    pub fn new(
        universe: Universe,
        layout: Layout,
        initial: Fa,
        mode: Mode,
        len_vars: Option<Vec<VarName>>,
    ) -> Result<Self> {
        let alpha = universe.alphabet();
        if *initial.alphabet() != alpha {
            return Err(Error::AlphabetMismatch(String::from("initial set is not over the universe alphabet")));
        }
        if let Some(v) = &len_vars {
            if universe.len_width != Some(v.len() as u8) || mode == Mode::CubicCut {
                return Err(Error::Contract(String::from("length tracks need a matching width and no cut")));
            }
        }
        if layout == Layout::System && !universe.delim {
            return Err(Error::Contract(String::from("system layout needs the delimiter letter")));
        }
        let destination = dest_set(layout, universe.len_width, &alpha)?;
        Ok(RmcProblem { universe, layout, initial, destination, mode, len_vars })
    }

    fn saturate(&self, l: &Fa) -> Fa {
        if self.layout == Layout::Single && self.len_vars.is_none() {
            saturate(l)
        } else {
            saturate_mid(l)
        }
    }
}

/// One round: `reach_i` and the relation applied to it.
#[derive(Clone, Debug)]
pub struct Iteration {
    pub reach: Fa,
    /// Variables of the alphabet of `reach`.
    pub vars: Vec<VarName>,
    pub bound: usize,
    /// The cut variable and `T_cut(reach)`, when a cut changed something.
    pub cut: Option<(VarName, Fa)>,
}

#[derive(Clone, Debug)]
pub struct ReachHistory {
    pub iterations: Vec<Iteration>,
    /// The last reach set, which was not stepped.
    pub last: Fa,
    pub processed: Fa,
}

impl ReachHistory {
    /// `reach_i`.
    pub fn reach(&self, i: usize) -> &Fa {
        self.iterations.get(i).map_or(&self.last, |it| &it.reach)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepLog {
    pub iteration: usize,
    pub bound: usize,
    pub family: usize,
    pub reach_states: usize,
    pub processed_states: usize,
    pub product_states: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub iterations: usize,
    /// Largest reach or processed automaton.
    pub peak_states: usize,
    pub max_product_states: usize,
    pub log: Vec<StepLog>,
}

fn pad_index(alpha: &Alphabet<TrackSym>) -> Option<u32> {
    alpha.index(&TrackSym::pad())
}

/// Makes final every state that reaches a final state over `(⋄/⋄)` alone,
/// so trailing pads may be dropped.
pub fn saturate(l: &Fa) -> Fa {
    let Some(pad) = pad_index(l.alphabet()) else { return l.normalize() };
    let n = l.states();
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for p in 0..n as u32 {
        for &(a, q) in l.edges(p) {
            if a == Some(pad) || a.is_none() {
                rev[q as usize].push(p);
            }
        }
    }
    let mut fin: Vec<bool> = (0..n as u32).map(|q| l.is_final(q)).collect();
    let mut stack: Vec<u32> = (0..n as u32).filter(|&q| fin[q as usize]).collect();
    while let Some(q) = stack.pop() {
        for &p in &rev[q as usize] {
            if !fin[p as usize] {
                fin[p as usize] = true;
                stack.push(p);
            }
        }
    }
    let edges: Vec<(u32, Option<u32>, u32)> =
        (0..n as u32).flat_map(|p| l.edges(p).iter().map(move |&(a, q)| (p, a, q))).collect();
    let finals: Vec<u32> = (0..n as u32).filter(|&q| fin[q as usize]).collect();
    Fa::from_raw(l.alphabet().clone(), n, edges, l.initial().iter().copied(), finals).normalize()
}

/// Also drops `(⋄/⋄)` letters inside the word.
pub fn saturate_mid(l: &Fa) -> Fa {
    let Some(pad) = pad_index(l.alphabet()) else { return l.normalize() };
    let n = l.states();
    let mut edges = Vec::new();
    for p in 0..n as u32 {
        for &(a, q) in l.edges(p) {
            edges.push((p, a, q));
            if a == Some(pad) {
                edges.push((p, None, q));
            }
        }
    }
    let finals: Vec<u32> = (0..n as u32).filter(|&q| l.is_final(q)).collect();
    Fa::from_raw(l.alphabet().clone(), n, edges, l.initial().iter().copied(), finals).normalize()
}

/// Largest number of occurrences of any variable, per `(#/#)` segment or
/// over the whole word; `None` when unbounded.
pub fn max_occurrences(l: &Fa, per_segment: bool) -> Option<usize> {
    let fa = l.normalize();
    if fa.is_empty() {
        return Some(0);
    }
    let alpha = fa.alphabet();
    let vars: Vec<Sym> = {
        let mut v: Vec<Sym> = alpha
            .letters()
            .iter()
            .flat_map(|l| match l {
                TrackSym::Pair(a, b) => vec![a.clone(), b.clone()],
                _ => Vec::new(),
            })
            .filter(Sym::is_var)
            .collect();
        v.sort();
        v.dedup();
        v
    };
    let weight = |l: u32, k: usize| -> i64 {
        match alpha.get(l) {
            TrackSym::Pair(a, b) => (*a == vars[k]) as i64 + (*b == vars[k]) as i64,
            _ => 0,
        }
    };
    let n = fa.states();
    let mut best = 0usize;
    for k in 0..vars.len() {
        let mut val: Vec<i64> = vec![-1; n];
        for &q in fa.initial() {
            val[q as usize] = 0;
        }
        let mut changed = true;
        let mut rounds = 0;
        while changed {
            changed = false;
            rounds += 1;
            if rounds > n + 1 {
                return None;
            }
            for p in 0..n {
                if val[p] < 0 {
                    continue;
                }
                for &(a, q) in fa.edges(p as u32) {
                    let a = a.expect("normalized automata have no ε-edges");
                    let v = if per_segment && *alpha.get(a) == TrackSym::Delim { 0 } else { val[p] + weight(a, k) };
                    if v > val[q as usize] {
                        val[q as usize] = v;
                        changed = true;
                    }
                }
            }
        }
        best = best.max(val.iter().copied().max().unwrap_or(0).max(0) as usize);
    }
    Some(best)
}

/// One member of a step family.
#[derive(Clone)]
pub struct Step {
    pub tag: RuleTag,
    pub machine: Arc<dyn RegisterMachine>,
}

fn kind_of(tag: &RuleTag) -> Subst {
    match tag {
        RuleTag::VarEps(_) => Subst::Erase,
        _ => Subst::Prepend,
    }
}

/// The forward relation as a union of machines. Without lengths the two
/// guarded families suffice; with lengths every rule carries its own length
/// effect.
pub fn step_family(uni: &Universe, layout: Layout, bound: usize, len_vars: Option<&[VarName]>) -> Result<Vec<Step>> {
    let system = layout == Layout::System;
    match len_vars {
        None => Ok([Subst::Erase, Subst::Prepend]
            .into_iter()
            .map(|k| {
                let m = StepMachine::guarded(k, bound, system);
                Step { tag: m.tag(), machine: Arc::new(m) as Arc<dyn RegisterMachine> }
            })
            .collect()),
        Some(lv) => rule_steps(uni, layout, bound, Some(lv)),
    }
}

/// One machine per concrete rule, in extraction order.
pub fn rule_steps(uni: &Universe, layout: Layout, bound: usize, len_vars: Option<&[VarName]>) -> Result<Vec<Step>> {
    let system = layout == Layout::System;
    let alpha = uni.alphabet();
    let mut out = Vec::new();
    for tag in rules(&uni.vars, &uni.consts) {
        let eq = StepMachine::guarded(kind_of(&tag), bound, system).pinned(&tag);
        let machine: Arc<dyn RegisterMachine> = match len_vars {
            None => Arc::new(eq),
            Some(lv) => Arc::new(combine_eq_len(Arc::new(eq), &build_len_step(&tag, lv, &alpha)?)),
        };
        out.push(Step { tag, machine });
    }
    Ok(out)
}

fn resource(e: Error) -> core::result::Result<SolveResult, Error> {
    match e {
        Error::Resource(m) => Ok(SolveResult::Unknown(UnknownReason::Resource(m))),
        other => Err(other),
    }
}

macro_rules! try_res {
    ($e:expr, $hist:expr, $stats:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return resource(e).map(|r| (r, $hist, $stats)),
        }
    };
}

/// Runs the loop. Resource exhaustion is reported as `Unknown`; contract
/// violations and internal failures as errors.
pub fn rmc_solve(p: &RmcProblem, budget: &Budget, clock: &dyn Clock) -> Result<(SolveResult, ReachHistory, Stats)> {
    let limit = match p.mode {
        Mode::Quadratic => Some(2),
        Mode::CubicCut => Some(3),
        Mode::Complete => None,
    };
    if let Some(k) = limit {
        match max_occurrences(&p.initial, false) {
            Some(m) if m <= k => {}
            _ => return Err(Error::Contract(format!("{} mode needs at most {k} occurrences per variable", p.mode))),
        }
    }
    let mut uni = p.universe.clone();
    let mut alpha = uni.alphabet();
    let mut reach = p.initial.normalize();
    let mut processed = Fa::empty(alpha.clone());
    let mut dest = p.destination.clone();
    let mut stats = Stats::default();
    let mut iterations: Vec<Iteration> = Vec::new();
    let len_vars = p.len_vars.as_deref();
    let mut cuts = 0usize;
    loop {
        let i = iterations.len();
        stats.peak_states = stats.peak_states.max(reach.states()).max(processed.states());
        let hist = |iterations: Vec<Iteration>, last: Fa, processed: Fa| ReachHistory { iterations, last, processed };
        if reach.included_in(&processed)? {
            return Ok((SolveResult::Unsat, hist(iterations, reach, processed), stats));
        }
        let hit = dest.intersect(&reach)?;
        if !hit.is_empty() {
            let h = hist(iterations, reach, processed);
            let w = hit.pick_word().expect("non-empty");
            let model = try_res!(extract_model(p, &h, &w, budget.product_cap), h, stats);
            return Ok((SolveResult::Sat(model), h, stats));
        }
        let timed_out = budget.timeout.is_some_and(|t| clock.elapsed() > t);
        if i >= budget.max_iters || timed_out {
            return Ok((SolveResult::Unknown(UnknownReason::Budget), hist(iterations, reach, processed), stats));
        }
        processed = processed.union(&reach)?;
        let vars = uni.vars.clone();
        let (bound, input, cut) = match p.mode {
            Mode::Quadratic => (2, reach.clone(), None),
            Mode::Complete => {
                let cap = 1usize << (i + 2).min(20);
                let b = max_occurrences(&reach, p.layout == Layout::System).map_or(cap, |m| m.min(cap));
                (b.max(1), reach.clone(), None)
            }
            Mode::CubicCut => {
                let mut quartic = false;
                for x in &vars {
                    if !reach.intersect(&quartic_fa(&alpha, &vars, x)?)?.is_empty() {
                        quartic = true;
                        break;
                    }
                }
                if quartic {
                    let v = cut_var(cuts);
                    cuts += 1;
                    uni.add_var(v.clone());
                    alpha = uni.alphabet();
                    let img = cut_image(&reach, &alpha, &vars, &v)?;
                    processed = processed.with_alphabet(&alpha)?;
                    dest = dest.with_alphabet(&alpha)?;
                    (3, img.clone(), Some((v, img)))
                } else {
                    (3, reach.clone(), None)
                }
            }
        };
        let family = step_family(&uni, p.layout, bound, len_vars)?;
        let mut parts = Vec::new();
        let mut product = 0;
        for s in &family {
            let (img, st) = try_res!(
                image_with_stats(s.machine.as_ref(), &input, &alpha, budget.product_cap),
                hist(iterations, reach, processed),
                stats
            );
            product = product.max(st.product_states);
            parts.push(img);
        }
        let next = p.saturate(&Fa::union_all(&alpha, parts.iter())?);
        stats.max_product_states = stats.max_product_states.max(product);
        stats.log.push(StepLog {
            iteration: i,
            bound,
            family: family.len(),
            reach_states: reach.states(),
            processed_states: processed.states(),
            product_states: product,
        });
        stats.iterations = i + 1;
        iterations.push(Iteration { reach, vars, bound, cut });
        reach = next;
    }
}

/// `w` with any number of `(⋄/⋄)` letters inserted anywhere.
fn pad_closure(w: &[TrackSym], alpha: &Alphabet<TrackSym>) -> Result<Fa> {
    let n = w.len() as u32;
    let mut edges: Vec<(u32, Option<TrackSym>, u32)> =
        w.iter().enumerate().map(|(i, l)| (i as u32, Some(l.clone()), i as u32 + 1)).collect();
    if alpha.contains(&TrackSym::pad()) {
        for q in 0..=n {
            edges.push((q, Some(TrackSym::pad()), q));
        }
    }
    Fa::from_edges(alpha.clone(), n as usize + 1, edges, [0], [n])
}

/// Backward run from a destination word `w` of the last reach set.
pub fn extract_model(p: &RmcProblem, h: &ReachHistory, w: &[TrackSym], cap: usize) -> Result<Model> {
    let mut model: BTreeMap<VarName, String> = BTreeMap::new();
    if let Some(lv) = &p.len_vars {
        let (_, bits) = split_length(w);
        let vals = decode_bits(bits.unwrap_or(&[]), lv.len())?;
        let c = *p.universe.consts.first().ok_or_else(|| Error::Internal(String::from("empty alphabet")))?;
        for (x, &n) in lv.iter().zip(&vals) {
            model.insert(x.clone(), core::iter::repeat_n(c, n as usize).collect());
        }
    }
    let mut w = w.to_vec();
    for it in h.iterations.iter().rev() {
        let (restrict, vars_after) = match &it.cut {
            Some((v, img)) => {
                let mut vs = it.vars.clone();
                vs.push(v.clone());
                vs.sort();
                (img, vs)
            }
            None => (&it.reach, it.vars.clone()),
        };
        let alpha = restrict.alphabet().clone();
        let mut uni = p.universe.clone();
        uni.vars = vars_after;
        let target = pad_closure(&w, &alpha)?;
        let mut found = None;
        for s in rule_steps(&uni, p.layout, it.bound, p.len_vars.as_deref())? {
            let pre = preimage_into(s.machine.as_ref(), &target, restrict, cap)?;
            if let Some(u) = pre.pick_word() {
                found = Some((s.tag, u));
                break;
            }
        }
        let Some((tag, u)) = found else {
            return Err(Error::Internal(format!("no rule explains {}", crate::fa::show_word(&w))));
        };
        match &tag {
            RuleTag::VarEps(x) => {
                model.insert(x.clone(), String::new());
            }
            RuleTag::VarPrepend(x, a) => {
                let mut s = match a {
                    Sym::Const(c) => String::from(*c),
                    Sym::Var(y) => model.get(y).cloned().unwrap_or_default(),
                    _ => String::new(),
                };
                s.push_str(model.get(x).map_or("", |v| v.as_str()));
                model.insert(x.clone(), s);
            }
            _ => return Err(Error::Internal(format!("unexpected rule {tag}"))),
        }
        w = match &it.cut {
            None => u,
            Some((v, _)) => {
                let back = cut_preimage(&Fa::word(alpha.clone(), &u)?, it.reach.alphabet(), &it.vars, v)?;
                let back = back.intersect(&it.reach)?;
                back.pick_word().ok_or_else(|| Error::Internal(String::from("cut has no preimage")))?
            }
        };
    }
    Ok(model)
}
