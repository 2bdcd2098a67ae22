//! Explicit 2-tape transducers.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use hashbrown::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::fa::{Alphabet, Fa, Letter};
use crate::nielsen::RuleTag;
use crate::sym::TrackSym;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TEdge {
    pub inp: Option<u32>,
    pub out: Option<u32>,
    pub to: u32,
}

#[derive(Clone, Debug)]
pub struct Transducer<L = TrackSym> {
    input: Alphabet<L>,
    output: Alphabet<L>,
    edges: Vec<Vec<TEdge>>,
    initial: Vec<u32>,
    finals: Vec<bool>,
    /// `None` for plain transducers.
    pub tag: Option<RuleTag>,
}

fn lookup<L: Letter>(a: &Alphabet<L>, l: &L) -> Result<u32> {
    a.index(l).ok_or_else(|| Error::AlphabetMismatch(format!("letter {l} not declared")))
}

impl<L: Letter> Transducer<L> {
    /// Builds a transducer from letter-labelled edges `(p, in, out, q)`.
    pub fn from_edges(
        input: Alphabet<L>,
        output: Alphabet<L>,
        states: usize,
        edges: impl IntoIterator<Item = (u32, Option<L>, Option<L>, u32)>,
        initial: impl IntoIterator<Item = u32>,
        finals: impl IntoIterator<Item = u32>,
    ) -> Result<Self> {
        let mut adj = vec![Vec::new(); states];
        for (p, i, o, q) in edges {
            if p as usize >= states || q as usize >= states {
                return Err(Error::Internal(format!("edge {p}->{q} outside {states} states")));
            }
            let inp = i.map(|l| lookup(&input, &l)).transpose()?;
            let out = o.map(|l| lookup(&output, &l)).transpose()?;
            adj[p as usize].push(TEdge { inp, out, to: q });
        }
        let mut fin = vec![false; states];
        for q in finals {
            fin[q as usize] = true;
        }
        Ok(Transducer { input, output, edges: adj, initial: initial.into_iter().collect(), finals: fin, tag: None })
    }

    pub fn from_raw(
        input: Alphabet<L>,
        output: Alphabet<L>,
        edges: Vec<Vec<TEdge>>,
        initial: Vec<u32>,
        finals: Vec<bool>,
    ) -> Self {
        Transducer { input, output, edges, initial, finals, tag: None }
    }

    pub fn with_tag(mut self, tag: RuleTag) -> Self {
        self.tag = Some(tag);
        self
    }

    /// The identity relation on `L(fa)`.
    pub fn identity(fa: &Fa<L>) -> Self {
        let edges = (0..fa.states() as u32)
            .map(|p| fa.edges(p).iter().map(|&(l, q)| TEdge { inp: l, out: l, to: q }).collect())
            .collect();
        Transducer {
            input: fa.alphabet().clone(),
            output: fa.alphabet().clone(),
            edges,
            initial: fa.initial().to_vec(),
            finals: (0..fa.states() as u32).map(|q| fa.is_final(q)).collect(),
            tag: None,
        }
    }

    /// The empty relation.
    pub fn empty(input: Alphabet<L>, output: Alphabet<L>) -> Self {
        Transducer { input, output, edges: vec![Vec::new()], initial: vec![0], finals: vec![false], tag: None }
    }

    pub fn input_alphabet(&self) -> &Alphabet<L> {
        &self.input
    }

    pub fn output_alphabet(&self) -> &Alphabet<L> {
        &self.output
    }

    pub fn states(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self, q: u32) -> &[TEdge] {
        &self.edges[q as usize]
    }

    pub fn initial(&self) -> &[u32] {
        &self.initial
    }

    pub fn is_final(&self, q: u32) -> bool {
        self.finals[q as usize]
    }

    pub fn is_length_preserving(&self) -> bool {
        self.edges.iter().flatten().all(|e| e.inp.is_some() && e.out.is_some())
    }

    pub fn inverse(&self) -> Self {
        Transducer {
            input: self.output.clone(),
            output: self.input.clone(),
            edges: self
                .edges
                .iter()
                .map(|es| es.iter().map(|e| TEdge { inp: e.out, out: e.inp, to: e.to }).collect())
                .collect(),
            initial: self.initial.clone(),
            finals: self.finals.clone(),
            tag: self.tag.clone(),
        }
    }

    /// `{ v | ∃u ∈ L(l): (u, v) ∈ R }`.
    pub fn image(&self, l: &Fa<L>) -> Result<Fa<L>> {
        // Map l's letter indices to ours; unknown letters cannot be read.
        let map: Vec<Option<u32>> = l.alphabet().letters().iter().map(|x| self.input.index(x)).collect();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut work: Vec<(u32, u32)> = Vec::new();
        for &t in &self.initial {
            for &q in l.initial() {
                if ids.insert((t, q), work.len() as u32).is_none() {
                    work.push((t, q));
                }
            }
        }
        let initial: Vec<u32> = (0..work.len() as u32).collect();
        let mut out_edges = Vec::new();
        let mut finals = Vec::new();
        let mut i = 0;
        while i < work.len() {
            let (t, q) = work[i];
            let id = i as u32;
            if self.finals[t as usize] && l.is_final(q) {
                finals.push(id);
            }
            let mut push = |key: (u32, u32), lab: Option<u32>, work: &mut Vec<(u32, u32)>| {
                let n = work.len() as u32;
                let tgt = *ids.entry(key).or_insert_with(|| {
                    work.push(key);
                    n
                });
                out_edges.push((id, lab, tgt));
            };
            for e in &self.edges[t as usize] {
                if e.inp.is_none() {
                    push((e.to, q), e.out, &mut work);
                }
            }
            for &(lab, q2) in l.edges(q) {
                match lab {
                    None => push((t, q2), None, &mut work),
                    Some(lab) => {
                        let Some(a) = map[lab as usize] else { continue };
                        for e in &self.edges[t as usize] {
                            if e.inp == Some(a) {
                                push((e.to, q2), e.out, &mut work);
                            }
                        }
                    }
                }
            }
            i += 1;
        }
        Ok(Fa::from_raw(self.output.clone(), work.len(), out_edges, initial, finals).normalize())
    }

    /// `R⁻¹(L(target)) ∩ L(restrict)`.
    pub fn preimage_into(&self, target: &Fa<L>, restrict: &Fa<L>) -> Result<Fa<L>> {
        let pre = self.inverse().image(target)?;
        pre.with_alphabet(restrict.alphabet())?.intersect(restrict)
    }

    /// `R⁻¹(w) ∩ L(restrict)`.
    pub fn preimage_word_into(&self, w: &[L], restrict: &Fa<L>) -> Result<Fa<L>> {
        let target = Fa::word(self.output.clone(), w)?;
        self.preimage_into(&target, restrict)
    }

    /// `{(x, z) | ∃y: (x, y) ∈ inner ∧ (y, z) ∈ outer}`.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if inner.output != outer.input {
            return Err(Error::AlphabetMismatch(String::from("inner output differs from outer input")));
        }
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut work: Vec<(u32, u32)> = Vec::new();
        for &p in &inner.initial {
            for &q in &outer.initial {
                if ids.insert((p, q), work.len() as u32).is_none() {
                    work.push((p, q));
                }
            }
        }
        let initial = (0..work.len() as u32).collect();
        let mut edges: Vec<Vec<TEdge>> = Vec::new();
        let mut finals = Vec::new();
        let mut i = 0;
        while i < work.len() {
            let (p, q) = work[i];
            finals.push(inner.finals[p as usize] && outer.finals[q as usize]);
            let mut out = Vec::new();
            let mut go = |key: (u32, u32), inp, o, work: &mut Vec<(u32, u32)>| {
                let n = work.len() as u32;
                let to = *ids.entry(key).or_insert_with(|| {
                    work.push(key);
                    n
                });
                out.push(TEdge { inp, out: o, to });
            };
            for e in &inner.edges[p as usize] {
                match e.out {
                    None => go((e.to, q), e.inp, None, &mut work),
                    Some(m) => {
                        for f in &outer.edges[q as usize] {
                            if f.inp == Some(m) {
                                go((e.to, f.to), e.inp, f.out, &mut work);
                            }
                        }
                    }
                }
            }
            for f in &outer.edges[q as usize] {
                if f.inp.is_none() {
                    go((p, f.to), None, f.out, &mut work);
                }
            }
            edges.push(out);
            i += 1;
        }
        Ok(Transducer {
            input: inner.input.clone(),
            output: outer.output.clone(),
            edges,
            initial,
            finals,
            tag: outer.tag.clone().or_else(|| inner.tag.clone()),
        })
    }

    fn same_alphabets(&self, other: &Self) -> Result<()> {
        if self.input != other.input || self.output != other.output {
            return Err(Error::AlphabetMismatch(String::from("transducer alphabets differ")));
        }
        Ok(())
    }

    fn disjoint(&self, other: &Self) -> (Vec<Vec<TEdge>>, u32) {
        let off = self.states() as u32;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|es| es.iter().map(|e| TEdge { to: e.to + off, ..*e }).collect()));
        (edges, off)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_alphabets(other)?;
        let (edges, off) = self.disjoint(other);
        let mut initial = self.initial.clone();
        initial.extend(other.initial.iter().map(|q| q + off));
        let mut finals = self.finals.clone();
        finals.extend_from_slice(&other.finals);
        Ok(Transducer { input: self.input.clone(), output: self.output.clone(), edges, initial, finals, tag: None })
    }

    /// Pairwise concatenation `{(u₁u₂, v₁v₂)}`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        self.same_alphabets(other)?;
        let (mut edges, off) = self.disjoint(other);
        for (p, f) in self.finals.iter().enumerate() {
            if *f {
                for &q in &other.initial {
                    edges[p].push(TEdge { inp: None, out: None, to: q + off });
                }
            }
        }
        let mut finals = vec![false; self.states()];
        finals.extend_from_slice(&other.finals);
        Ok(Transducer {
            input: self.input.clone(),
            output: self.output.clone(),
            edges,
            initial: self.initial.clone(),
            finals,
            tag: None,
        })
    }

    pub fn star(&self) -> Self {
        let n = self.states() as u32;
        let mut edges = self.edges.clone();
        edges.push(self.initial.iter().map(|&q| TEdge { inp: None, out: None, to: q }).collect());
        for (p, f) in self.finals.iter().enumerate() {
            if *f {
                edges[p].push(TEdge { inp: None, out: None, to: n });
            }
        }
        let mut finals = self.finals.clone();
        finals.push(true);
        Transducer {
            input: self.input.clone(),
            output: self.output.clone(),
            edges,
            initial: vec![n],
            finals,
            tag: None,
        }
    }

    pub fn accepts_pair(&self, u: &[L], v: &[L]) -> Result<bool> {
        let u: Vec<u32> = u.iter().map(|l| lookup(&self.input, l)).collect::<Result<_>>()?;
        let v: Vec<u32> = v.iter().map(|l| lookup(&self.output, l)).collect::<Result<_>>()?;
        let mut seen: HashSet<(u32, usize, usize)> = HashSet::new();
        let mut stack: Vec<(u32, usize, usize)> = self.initial.iter().map(|&q| (q, 0, 0)).collect();
        while let Some(cfg @ (q, i, j)) = stack.pop() {
            if !seen.insert(cfg) {
                continue;
            }
            if i == u.len() && j == v.len() && self.finals[q as usize] {
                return Ok(true);
            }
            for e in &self.edges[q as usize] {
                let i2 = match e.inp {
                    None => i,
                    Some(a) if i < u.len() && u[i] == a => i + 1,
                    _ => continue,
                };
                let j2 = match e.out {
                    None => j,
                    Some(b) if j < v.len() && v[j] == b => j + 1,
                    _ => continue,
                };
                stack.push((e.to, i2, j2));
            }
        }
        Ok(false)
    }

    /// All pairs with both sides of length at most `max`.
    pub fn pairs_up_to(&self, max: usize) -> BTreeSet<(Vec<L>, Vec<L>)> {
        let mut out = BTreeSet::new();
        let mut seen: HashSet<(u32, Vec<u32>, Vec<u32>)> = HashSet::new();
        let mut stack: Vec<(u32, Vec<u32>, Vec<u32>)> =
            self.initial.iter().map(|&q| (q, Vec::new(), Vec::new())).collect();
        while let Some((q, u, v)) = stack.pop() {
            if !seen.insert((q, u.clone(), v.clone())) {
                continue;
            }
            if self.finals[q as usize] {
                out.insert((
                    u.iter().map(|&l| self.input.get(l).clone()).collect(),
                    v.iter().map(|&l| self.output.get(l).clone()).collect(),
                ));
            }
            for e in &self.edges[q as usize] {
                let mut u2 = u.clone();
                let mut v2 = v.clone();
                if let Some(a) = e.inp {
                    u2.push(a);
                }
                if let Some(b) = e.out {
                    v2.push(b);
                }
                if u2.len() <= max && v2.len() <= max {
                    stack.push((e.to, u2, v2));
                }
            }
        }
        out
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{name}\" {{");
        let _ = writeln!(s, "  rankdir=LR;");
        for q in 0..self.states() {
            let shape = if self.finals[q] { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  s{q} [shape={shape}];");
        }
        for (k, &q) in self.initial.iter().enumerate() {
            let _ = writeln!(s, "  start{k} [shape=point];\n  start{k} -> s{q};");
        }
        for (p, es) in self.edges.iter().enumerate() {
            for e in es {
                let i = e.inp.map(|l| format!("{}", self.input.get(l))).unwrap_or_else(|| "ε".into());
                let o = e.out.map(|l| format!("{}", self.output.get(l))).unwrap_or_else(|| "ε".into());
                let _ = writeln!(s, "  s{p} -> s{} [label=\"{i} ↦ {o}\"];", e.to);
            }
        }
        s.push_str("}\n");
        s
    }
}
