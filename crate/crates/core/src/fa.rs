//! Finite automata over an explicit finite alphabet.
//!
//! Transitions carry letter indices into the automaton's [`Alphabet`];
//! `None` labels are ε-moves. [`Fa::normalize`] produces the canonical
//! minimal DFA (partial, with an implicit dead sink) numbered in BFS order,
//! so two normalized automata over the same alphabet are equal iff their
//! languages are.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Debug, Display, Write};
use core::hash::Hash;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::sym::TrackSym;

pub trait Letter: Clone + Ord + Hash + Debug + Display {}
impl<T: Clone + Ord + Hash + Debug + Display> Letter for T {}

/// A sorted, duplicate-free set of letters shared between automata.
#[derive(Clone)]
pub struct Alphabet<L>(Arc<[L]>);

impl<L: Letter> Alphabet<L> {
    pub fn new(letters: impl IntoIterator<Item = L>) -> Self {
        let mut v: Vec<L> = letters.into_iter().collect();
        v.sort();
        v.dedup();
        Alphabet(v.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[L] {
        &self.0
    }

    pub fn get(&self, i: u32) -> &L {
        &self.0[i as usize]
    }

    pub fn index(&self, l: &L) -> Option<u32> {
        self.0.binary_search(l).ok().map(|i| i as u32)
    }

    pub fn contains(&self, l: &L) -> bool {
        self.index(l).is_some()
    }

    pub fn union(&self, other: &Self) -> Self {
        if self == other {
            return self.clone();
        }
        Alphabet::new(self.0.iter().chain(other.0.iter()).cloned())
    }

    pub fn is_superset(&self, other: &Self) -> bool {
        other.0.iter().all(|l| self.contains(l))
    }
}

impl<L: PartialEq> PartialEq for Alphabet<L> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl<L: Eq> Eq for Alphabet<L> {}

impl<L: Debug> Debug for Alphabet<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// Writes a word as the concatenation of its letters, `ε` when empty.
pub fn show_word<L: Display>(w: &[L]) -> String {
    if w.is_empty() {
        return String::from("ε");
    }
    let mut s = String::new();
    for l in w {
        let _ = write!(s, "{l}");
    }
    s
}

pub type Edge = (Option<u32>, u32);

#[derive(Clone, PartialEq, Eq)]
pub struct Fa<L = TrackSym> {
    alphabet: Alphabet<L>,
    edges: Vec<Vec<Edge>>,
    initial: Vec<u32>,
    finals: Vec<bool>,
    normalized: bool,
}

impl<L: Letter> Debug for Fa<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fa({} states, {} edges, {} letters)", self.states(), self.edge_count(), self.alphabet.len())
    }
}

fn mismatch<L: Letter>(a: &Alphabet<L>, b: &Alphabet<L>) -> Error {
    Error::AlphabetMismatch(format!("{} vs {} letters", a.len(), b.len()))
}

impl<L: Letter> Fa<L> {
    /// Builds an automaton from index-labelled edges. Endpoints must be
    /// below `states`.
    pub fn from_raw(
        alphabet: Alphabet<L>,
        states: usize,
        edges: impl IntoIterator<Item = (u32, Option<u32>, u32)>,
        initial: impl IntoIterator<Item = u32>,
        finals: impl IntoIterator<Item = u32>,
    ) -> Self {
        let mut adj = vec![Vec::new(); states];
        for (p, l, q) in edges {
            debug_assert!((q as usize) < states);
            debug_assert!(l.is_none_or(|l| (l as usize) < alphabet.len()));
            adj[p as usize].push((l, q));
        }
        let mut fin = vec![false; states];
        for q in finals {
            fin[q as usize] = true;
        }
        let mut initial: Vec<u32> = initial.into_iter().collect();
        initial.sort_unstable();
        initial.dedup();
        Fa { alphabet, edges: adj, initial, finals: fin, normalized: false }
    }

    /// Builds an automaton from letter-labelled edges.
    pub fn from_edges(
        alphabet: Alphabet<L>,
        states: usize,
        edges: impl IntoIterator<Item = (u32, Option<L>, u32)>,
        initial: impl IntoIterator<Item = u32>,
        finals: impl IntoIterator<Item = u32>,
    ) -> Result<Self> {
        let mut raw = Vec::new();
        for (p, l, q) in edges {
            if p as usize >= states || q as usize >= states {
                return Err(Error::Internal(format!("edge {p}->{q} outside {states} states")));
            }
            let idx = match l {
                None => None,
                Some(l) => Some(
                    alphabet.index(&l).ok_or_else(|| Error::AlphabetMismatch(format!("letter {l} not declared")))?,
                ),
            };
            raw.push((p, idx, q));
        }
        Ok(Fa::from_raw(alphabet, states, raw, initial, finals))
    }

    pub fn empty(alphabet: Alphabet<L>) -> Self {
        Fa { alphabet, edges: vec![Vec::new()], initial: vec![0], finals: vec![false], normalized: true }
    }

    pub fn epsilon(alphabet: Alphabet<L>) -> Self {
        Fa { alphabet, edges: vec![Vec::new()], initial: vec![0], finals: vec![true], normalized: true }
    }

    /// The language `{w}`.
    pub fn word(alphabet: Alphabet<L>, w: &[L]) -> Result<Self> {
        let n = w.len();
        Fa::from_edges(
            alphabet,
            n + 1,
            w.iter().enumerate().map(|(i, l)| (i as u32, Some(l.clone()), i as u32 + 1)),
            [0],
            [n as u32],
        )
    }

    /// `letters*`.
    pub fn star_of(alphabet: Alphabet<L>, letters: &[L]) -> Result<Self> {
        Fa::from_edges(alphabet, 1, letters.iter().map(|l| (0, Some(l.clone()), 0)), [0], [0])
    }

    /// All words over the alphabet.
    pub fn universal(alphabet: Alphabet<L>) -> Self {
        let k = alphabet.len() as u32;
        let mut fa = Fa::from_raw(alphabet, 1, (0..k).map(|i| (0, Some(i), 0)), [0], [0]);
        fa.normalized = true;
        fa
    }

    pub fn alphabet(&self) -> &Alphabet<L> {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn edges(&self, q: u32) -> &[Edge] {
        &self.edges[q as usize]
    }

    pub fn initial(&self) -> &[u32] {
        &self.initial
    }

    pub fn is_final(&self, q: u32) -> bool {
        self.finals[q as usize]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Re-indexes the automaton over a superset alphabet.
    pub fn with_alphabet(&self, alphabet: &Alphabet<L>) -> Result<Self> {
        if &self.alphabet == alphabet {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(self.alphabet.len());
        for l in self.alphabet.letters() {
            map.push(
                alphabet
                    .index(l)
                    .ok_or_else(|| Error::AlphabetMismatch(format!("letter {l} missing from the target alphabet")))?,
            );
        }
        let edges =
            self.edges.iter().map(|es| es.iter().map(|&(l, q)| (l.map(|l| map[l as usize]), q)).collect()).collect();
        // Index order is preserved because both alphabets are sorted.
        Ok(Fa {
            alphabet: alphabet.clone(),
            edges,
            initial: self.initial.clone(),
            finals: self.finals.clone(),
            normalized: self.normalized,
        })
    }

    /// Replaces every letter by a set of alternatives (`None` = ε); an
    /// empty set deletes the edge.
    pub fn relabel<M: Letter>(&self, alphabet: &Alphabet<M>, mut f: impl FnMut(&L) -> Vec<Option<M>>) -> Result<Fa<M>> {
        let mut table: Vec<Vec<Option<u32>>> = Vec::with_capacity(self.alphabet.len());
        for l in self.alphabet.letters() {
            let mut alts = Vec::new();
            for m in f(l) {
                alts.push(match m {
                    None => None,
                    Some(m) => Some(alphabet.index(&m).ok_or_else(|| {
                        Error::AlphabetMismatch(format!("letter {m} missing from the target alphabet"))
                    })?),
                });
            }
            table.push(alts);
        }
        let mut raw = Vec::new();
        for (p, es) in self.edges.iter().enumerate() {
            for &(l, q) in es {
                match l {
                    None => raw.push((p as u32, None, q)),
                    Some(l) => {
                        for &m in &table[l as usize] {
                            raw.push((p as u32, m, q));
                        }
                    }
                }
            }
        }
        Ok(Fa::from_raw(
            alphabet.clone(),
            self.states(),
            raw,
            self.initial.iter().copied(),
            (0..self.states() as u32).filter(|&q| self.is_final(q)),
        ))
    }

    fn eps_closure(&self, set: &mut Vec<u32>) {
        let mut stack: Vec<u32> = set.clone();
        let mut seen: hashbrown::HashSet<u32> = set.iter().copied().collect();
        while let Some(p) = stack.pop() {
            for &(l, q) in &self.edges[p as usize] {
                if l.is_none() && seen.insert(q) {
                    set.push(q);
                    stack.push(q);
                }
            }
        }
        set.sort_unstable();
        set.dedup();
    }

    fn has_eps(&self) -> bool {
        self.edges.iter().any(|es| es.iter().any(|e| e.0.is_none()))
    }

    fn is_deterministic(&self) -> bool {
        if self.initial.len() > 1 || self.has_eps() {
            return false;
        }
        self.edges.iter().all(|es| {
            let mut ls: Vec<u32> = es.iter().map(|e| e.0.unwrap()).collect();
            ls.sort_unstable();
            ls.windows(2).all(|w| w[0] != w[1])
        })
    }

    /// Subset construction. The result has no ε-moves, one initial state,
    /// and sorted edges.
    fn determinize(&self) -> (Vec<Vec<(u32, u32)>>, Vec<bool>) {
        if self.is_deterministic() {
            let mut edges: Vec<Vec<(u32, u32)>> =
                self.edges.iter().map(|es| es.iter().map(|&(l, q)| (l.unwrap(), q)).collect()).collect();
            for es in &mut edges {
                es.sort_unstable();
            }
            if self.initial.is_empty() {
                return (vec![Vec::new()], vec![false]);
            }
            // Move the initial state to index 0.
            let init = self.initial[0];
            let perm = |q: u32| {
                if q == init {
                    0
                } else if q == 0 {
                    init
                } else {
                    q
                }
            };
            let mut out = vec![Vec::new(); edges.len()];
            let mut fin = vec![false; edges.len()];
            for (p, es) in edges.into_iter().enumerate() {
                let np = perm(p as u32) as usize;
                out[np] = es.into_iter().map(|(l, q)| (l, perm(q))).collect();
                fin[np] = self.finals[p];
            }
            return (out, fin);
        }
        let mut start = self.initial.clone();
        self.eps_closure(&mut start);
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut sets: Vec<Vec<u32>> = Vec::new();
        ids.insert(start.clone(), 0);
        sets.push(start);
        let mut edges: Vec<Vec<(u32, u32)>> = Vec::new();
        let mut fin = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let set = sets[i].clone();
            fin.push(set.iter().any(|&q| self.finals[q as usize]));
            let mut moves: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for &p in &set {
                for &(l, q) in &self.edges[p as usize] {
                    if let Some(l) = l {
                        moves.entry(l).or_default().push(q);
                    }
                }
            }
            let mut out = Vec::with_capacity(moves.len());
            for (l, mut tgt) in moves {
                tgt.sort_unstable();
                tgt.dedup();
                self.eps_closure(&mut tgt);
                let next = sets.len() as u32;
                let id = *ids.entry(tgt.clone()).or_insert_with(|| {
                    sets.push(tgt);
                    next
                });
                out.push((l, id));
            }
            edges.push(out);
            i += 1;
        }
        (edges, fin)
    }

    /// Deterministic, minimal, canonically numbered. The dead sink stays
    /// implicit; use [`Fa::complete`] to materialize it.
    pub fn normalize(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let (edges, fin) = self.determinize();
        minimize(self.alphabet.clone(), edges, fin)
    }

    /// Adds the dead sink so that every state has every letter.
    pub fn complete(&self) -> Self {
        let fa = self.normalize();
        if fa.finals.iter().all(|f| !f) {
            return Fa::from_raw(
                fa.alphabet.clone(),
                1,
                (0..fa.alphabet.len() as u32).map(|l| (0, Some(l), 0)),
                [0],
                [],
            );
        }
        let k = fa.alphabet.len() as u32;
        let n = fa.states() as u32;
        let mut needs_sink = false;
        let mut edges = fa.edges.clone();
        for es in &mut edges {
            if es.len() < k as usize {
                needs_sink = true;
                let have: Vec<u32> = es.iter().map(|e| e.0.unwrap()).collect();
                for l in 0..k {
                    if have.binary_search(&l).is_err() {
                        es.push((Some(l), n));
                    }
                }
                es.sort_unstable_by_key(|e| e.0);
            }
        }
        let mut finals = fa.finals.clone();
        if needs_sink {
            edges.push((0..k).map(|l| (Some(l), n)).collect());
            finals.push(false);
        }
        Fa { alphabet: fa.alphabet, edges, initial: fa.initial, finals, normalized: false }
    }

    pub fn complement(&self) -> Self {
        let mut c = self.complete();
        for f in &mut c.finals {
            *f = !*f;
        }
        c.normalize()
    }

    pub fn is_empty(&self) -> bool {
        let mut seen = vec![false; self.states()];
        let mut stack: Vec<u32> = self.initial.clone();
        for &q in &stack {
            seen[q as usize] = true;
        }
        while let Some(p) = stack.pop() {
            if self.finals[p as usize] {
                return false;
            }
            for &(_, q) in &self.edges[p as usize] {
                if !seen[q as usize] {
                    seen[q as usize] = true;
                    stack.push(q);
                }
            }
        }
        true
    }

    pub fn accepts(&self, w: &[L]) -> Result<bool> {
        let mut cur = self.initial.clone();
        self.eps_closure(&mut cur);
        for l in w {
            let idx = self
                .alphabet
                .index(l)
                .ok_or_else(|| Error::AlphabetMismatch(format!("letter {l} not in the alphabet")))?;
            let mut next = Vec::new();
            for &p in &cur {
                for &(m, q) in &self.edges[p as usize] {
                    if m == Some(idx) {
                        next.push(q);
                    }
                }
            }
            next.sort_unstable();
            next.dedup();
            self.eps_closure(&mut next);
            cur = next;
            if cur.is_empty() {
                return Ok(false);
            }
        }
        Ok(cur.iter().any(|&q| self.finals[q as usize]))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.alphabet != other.alphabet {
            return Err(mismatch(&self.alphabet, &other.alphabet));
        }
        Ok(self.union_nfa(other).normalize())
    }

    /// Union without determinization.
    pub fn union_nfa(&self, other: &Self) -> Self {
        let off = self.states() as u32;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|es| es.iter().map(|&(l, q)| (l, q + off)).collect()));
        let mut initial = self.initial.clone();
        initial.extend(other.initial.iter().map(|q| q + off));
        let mut finals = self.finals.clone();
        finals.extend_from_slice(&other.finals);
        Fa { alphabet: self.alphabet.clone(), edges, initial, finals, normalized: false }
    }

    pub fn union_all<'a>(alphabet: &Alphabet<L>, fas: impl IntoIterator<Item = &'a Self>) -> Result<Self>
    where
        L: 'a,
    {
        let mut acc = Fa::empty(alphabet.clone());
        acc.normalized = false;
        for fa in fas {
            if &fa.alphabet != alphabet {
                return Err(mismatch(alphabet, &fa.alphabet));
            }
            acc = acc.union_nfa(fa);
        }
        Ok(acc.normalize())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.alphabet != other.alphabet {
            return Err(mismatch(&self.alphabet, &other.alphabet));
        }
        let a = self.normalize();
        let b = other.normalize();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs = vec![(0u32, 0u32)];
        ids.insert((0, 0), 0);
        let mut edges = Vec::new();
        let mut finals = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            finals.push(a.finals[p as usize] && b.finals[q as usize]);
            let mut out = Vec::new();
            let (ea, eb) = (&a.edges[p as usize], &b.edges[q as usize]);
            let (mut x, mut y) = (0, 0);
            while x < ea.len() && y < eb.len() {
                let (la, ta) = ea[x];
                let (lb, tb) = eb[y];
                match la.cmp(&lb) {
                    core::cmp::Ordering::Less => x += 1,
                    core::cmp::Ordering::Greater => y += 1,
                    core::cmp::Ordering::Equal => {
                        let n = pairs.len() as u32;
                        let id = *ids.entry((ta, tb)).or_insert_with(|| {
                            pairs.push((ta, tb));
                            n
                        });
                        out.push((la, id));
                        x += 1;
                        y += 1;
                    }
                }
            }
            edges.push(out);
            i += 1;
        }
        let fa = Fa { alphabet: a.alphabet.clone(), edges, initial: vec![0], finals, normalized: false };
        Ok(fa.normalize())
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.alphabet != other.alphabet {
            return Err(mismatch(&self.alphabet, &other.alphabet));
        }
        self.intersect(&other.complement())
    }

    /// `L(self).L(other)`, over the union of both alphabets.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        Ok(self.concat_nfa(other)?.normalize())
    }

    pub fn concat_nfa(&self, other: &Self) -> Result<Self> {
        let alphabet = self.alphabet.union(&other.alphabet);
        let a = self.with_alphabet(&alphabet)?;
        let b = other.with_alphabet(&alphabet)?;
        let off = a.states() as u32;
        let mut edges = a.edges.clone();
        for (p, f) in a.finals.iter().enumerate() {
            if *f {
                for &q in &b.initial {
                    edges[p].push((None, q + off));
                }
            }
        }
        edges.extend(b.edges.iter().map(|es| es.iter().map(|&(l, q)| (l, q + off)).collect()));
        let mut finals = vec![false; a.states()];
        finals.extend_from_slice(&b.finals);
        Ok(Fa { alphabet, edges, initial: a.initial.clone(), finals, normalized: false })
    }

    pub fn star(&self) -> Self {
        let n = self.states() as u32;
        let mut edges = self.edges.clone();
        edges.push(self.initial.iter().map(|&q| (None, q)).collect());
        for (p, f) in self.finals.iter().enumerate() {
            if *f {
                edges[p].push((None, n));
            }
        }
        let mut finals = self.finals.clone();
        finals.push(true);
        Fa { alphabet: self.alphabet.clone(), edges, initial: vec![n], finals, normalized: false }.normalize()
    }

    /// `L(self) ⊆ L(other)`.
    pub fn included_in(&self, other: &Self) -> Result<bool> {
        if self.alphabet != other.alphabet {
            return Err(mismatch(&self.alphabet, &other.alphabet));
        }
        let a = self.normalize();
        let b = other.normalize();
        const SINK: u32 = u32::MAX;
        let mut seen: hashbrown::HashSet<(u32, u32)> = hashbrown::HashSet::new();
        let mut stack = vec![(0u32, 0u32)];
        seen.insert((0, 0));
        while let Some((p, q)) = stack.pop() {
            let bq_final = q != SINK && b.finals[q as usize];
            if a.finals[p as usize] && !bq_final {
                return Ok(false);
            }
            for &(l, pt) in &a.edges[p as usize] {
                let qt = if q == SINK {
                    SINK
                } else {
                    let eb = &b.edges[q as usize];
                    match eb.binary_search_by_key(&l, |e| e.0) {
                        Ok(i) => eb[i].1,
                        Err(_) => SINK,
                    }
                };
                if seen.insert((pt, qt)) {
                    stack.push((pt, qt));
                }
            }
        }
        Ok(true)
    }

    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        if self.alphabet != other.alphabet {
            return Err(mismatch(&self.alphabet, &other.alphabet));
        }
        Ok(self.normalize() == other.normalize())
    }

    /// A shortest word, least in the letter order among the shortest ones.
    pub fn pick_word(&self) -> Option<Vec<L>> {
        let fa = self.normalize();
        let n = fa.states();
        let mut parent: Vec<Option<(u32, u32)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0u32);
        while let Some(p) = queue.pop_front() {
            if fa.finals[p as usize] {
                let mut w = Vec::new();
                let mut cur = p;
                while let Some((prev, l)) = parent[cur as usize] {
                    w.push(fa.alphabet.get(l).clone());
                    cur = prev;
                }
                w.reverse();
                return Some(w);
            }
            for &(l, q) in &fa.edges[p as usize] {
                if !seen[q as usize] {
                    seen[q as usize] = true;
                    parent[q as usize] = Some((p, l.unwrap()));
                    queue.push_back(q);
                }
            }
        }
        None
    }

    /// All words of length at most `max_len` in shortlex order, stopping
    /// after `cap` words.
    pub fn words_up_to(&self, max_len: usize, cap: usize) -> Vec<Vec<L>> {
        let fa = self.normalize();
        let mut out = Vec::new();
        let mut layer: Vec<(u32, Vec<u32>)> = vec![(0, Vec::new())];
        for len in 0..=max_len {
            for (q, w) in &layer {
                if fa.finals[*q as usize] {
                    if out.len() >= cap {
                        return out;
                    }
                    out.push(w.iter().map(|&l| fa.alphabet.get(l).clone()).collect());
                }
            }
            if len == max_len {
                break;
            }
            let mut next = Vec::new();
            for (q, w) in &layer {
                for &(l, t) in &fa.edges[*q as usize] {
                    let mut w2 = w.clone();
                    w2.push(l.unwrap());
                    next.push((t, w2));
                }
            }
            next.sort_by(|a, b| a.1.cmp(&b.1));
            layer = next;
            if layer.is_empty() {
                break;
            }
        }
        out
    }

    /// Whether the language is finite. Works on the trimmed DFA, where any
    /// cycle is productive.
    pub fn is_finite(&self) -> bool {
        let fa = self.normalize();
        let n = fa.states();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark = vec![0u8; n];
        let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
        mark[0] = 1;
        while let Some(&mut (p, ref mut i)) = stack.last_mut() {
            let es = &fa.edges[p as usize];
            if *i < es.len() {
                let q = es[*i].1;
                *i += 1;
                match mark[q as usize] {
                    0 => {
                        mark[q as usize] = 1;
                        stack.push((q, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            } else {
                mark[p as usize] = 2;
                stack.pop();
            }
        }
        true
    }

    pub fn to_dot(&self, name: &str) -> String {
        let fa = self.normalize();
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{name}\" {{");
        let _ = writeln!(s, "  rankdir=LR;");
        let _ = writeln!(s, "  start [shape=point];");
        for q in 0..fa.states() {
            let shape = if fa.finals[q] { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  s{q} [shape={shape}];");
        }
        let _ = writeln!(s, "  start -> s0;");
        for (p, es) in fa.edges.iter().enumerate() {
            for &(l, q) in es {
                let label = l.map(|l| format!("{}", fa.alphabet.get(l))).unwrap_or_else(|| "ε".into());
                let _ = writeln!(s, "  s{p} -> s{q} [label=\"{}\"];", label.replace('"', "\\\""));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Trim plus Moore refinement plus canonical renumbering of a DFA whose
/// initial state is 0.
fn minimize<L: Letter>(alphabet: Alphabet<L>, edges: Vec<Vec<(u32, u32)>>, fin: Vec<bool>) -> Fa<L> {
    let n = edges.len();
    // Reachable from 0 already holds for determinize output; compute the
    // co-reachable part.
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (p, es) in edges.iter().enumerate() {
        for &(_, q) in es {
            rev[q as usize].push(p as u32);
        }
    }
    let mut live = fin.clone();
    let mut stack: Vec<u32> = (0..n as u32).filter(|&q| fin[q as usize]).collect();
    while let Some(q) = stack.pop() {
        for &p in &rev[q as usize] {
            if !live[p as usize] {
                live[p as usize] = true;
                stack.push(p);
            }
        }
    }
    if !live[0] {
        return Fa::empty(alphabet);
    }
    let states: Vec<u32> = (0..n as u32).filter(|&q| live[q as usize]).collect();
    let mut class = vec![u32::MAX; n];
    for &q in &states {
        class[q as usize] = fin[q as usize] as u32;
    }
    let mut count = {
        let mut c: Vec<u32> = states.iter().map(|&q| class[q as usize]).collect();
        c.sort_unstable();
        c.dedup();
        c.len()
    };
    loop {
        let mut sigs: HashMap<(u32, Vec<(u32, u32)>), u32> = HashMap::new();
        let mut next = vec![u32::MAX; n];
        for &q in &states {
            let sig: Vec<(u32, u32)> =
                edges[q as usize].iter().filter(|e| live[e.1 as usize]).map(|&(l, t)| (l, class[t as usize])).collect();
            let k = sigs.len() as u32;
            next[q as usize] = *sigs.entry((class[q as usize], sig)).or_insert(k);
        }
        let new_count = sigs.len();
        class = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    // Canonical BFS numbering over classes.
    let mut rep = vec![u32::MAX; count];
    for &q in &states {
        let c = class[q as usize] as usize;
        if rep[c] == u32::MAX {
            rep[c] = q;
        }
    }
    let mut num = vec![u32::MAX; count];
    let mut order = vec![class[0]];
    num[class[0] as usize] = 0;
    let mut i = 0;
    while i < order.len() {
        let q = rep[order[i] as usize];
        for &(_, t) in &edges[q as usize] {
            if live[t as usize] {
                let c = class[t as usize];
                if num[c as usize] == u32::MAX {
                    num[c as usize] = order.len() as u32;
                    order.push(c);
                }
            }
        }
        i += 1;
    }
    let mut out_edges = Vec::with_capacity(order.len());
    let mut out_fin = Vec::with_capacity(order.len());
    for &c in &order {
        let q = rep[c as usize];
        out_fin.push(fin[q as usize]);
        out_edges.push(
            edges[q as usize]
                .iter()
                .filter(|e| live[e.1 as usize])
                .map(|&(l, t)| (Some(l), num[class[t as usize] as usize]))
                .collect(),
        );
    }
    Fa { alphabet, edges: out_edges, initial: vec![0], finals: out_fin, normalized: true }
}
