//! Equations as regular languages over the padded 2-track alphabet.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fa::{Alphabet, Fa};
use crate::formula::{EquationSystem, WordEquation, WordTerm};
use crate::sym::{Sym, TrackSym, VarName};

/// The symbols a solve works with; determines the letter set.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Universe {
    pub consts: Vec<char>,
    pub vars: Vec<VarName>,
    /// Whether `(#/#)` is a letter.
    pub delim: bool,
    /// Number of LSBF length tracks, if length constraints are encoded.
    pub len_width: Option<u8>,
}

impl Universe {
    pub fn new(consts: impl IntoIterator<Item = char>, vars: impl IntoIterator<Item = VarName>) -> Self {
        let c: BTreeSet<char> = consts.into_iter().collect();
        let v: BTreeSet<VarName> = vars.into_iter().collect();
        Universe { consts: c.into_iter().collect(), vars: v.into_iter().collect(), delim: false, len_width: None }
    }

    pub fn with_delim(mut self) -> Self {
        self.delim = true;
        self
    }

    pub fn with_len_width(mut self, w: u8) -> Self {
        self.len_width = Some(w);
        self
    }

    pub fn add_var(&mut self, v: VarName) {
        if let Err(i) = self.vars.binary_search(&v) {
            self.vars.insert(i, v);
        }
    }

    /// Constants, variables and the pad.
    pub fn track_syms(&self) -> Vec<Sym> {
        let mut s: Vec<Sym> = self.consts.iter().map(|&c| Sym::Const(c)).collect();
        s.extend(self.vars.iter().cloned().map(Sym::Var));
        s.push(Sym::Pad);
        s
    }

    pub fn alphabet(&self) -> Alphabet<TrackSym> {
        let syms = self.track_syms();
        let mut letters = Vec::with_capacity(syms.len() * syms.len() + 2);
        for a in &syms {
            for b in &syms {
                letters.push(TrackSym::Pair(a.clone(), b.clone()));
            }
        }
        if self.delim {
            letters.push(TrackSym::Delim);
        }
        if let Some(w) = self.len_width {
            letters.push(TrackSym::LenSep);
            letters.extend(bit_letters(w));
        }
        Alphabet::new(letters)
    }
}

pub fn bit_letters(width: u8) -> impl Iterator<Item = TrackSym> {
    (0..1u32 << width).map(move |value| TrackSym::Bits { width, value })
}

/// The shortest encoding of an already trimmed pair, without pads.
pub fn pair_word(e: &WordEquation) -> Vec<TrackSym> {
    let n = e.lhs.len().max(e.rhs.len());
    (0..n)
        .map(|i| {
            let a = e.lhs.syms().get(i).cloned().unwrap_or(Sym::Pad);
            let b = e.rhs.syms().get(i).cloned().unwrap_or(Sym::Pad);
            TrackSym::Pair(a, b)
        })
        .collect()
}

/// The shortest word of `eq_encode(e)`.
pub fn shortest_encoding(e: &WordEquation) -> Vec<TrackSym> {
    pair_word(&e.trimmed())
}

/// `encode(e)`: the trimmed pair word followed by `(⋄/⋄)*`.
pub fn eq_encode(e: &WordEquation, alpha: &Alphabet<TrackSym>) -> Result<Fa> {
    let w = shortest_encoding(e);
    let n = w.len() as u32;
    let mut edges: Vec<(u32, Option<TrackSym>, u32)> =
        w.into_iter().enumerate().map(|(i, l)| (i as u32, Some(l), i as u32 + 1)).collect();
    edges.push((n, Some(TrackSym::pad()), n));
    Fa::from_edges(alpha.clone(), n as usize + 1, edges, [0], [n]).map(|f| f.normalize())
}

fn delim(alpha: &Alphabet<TrackSym>) -> Result<Fa> {
    Fa::word(alpha.clone(), &[TrackSym::Delim])
}

/// `encode(e₁).(#/#).….(#/#).encode(eₙ)` for a conjunction.
pub fn sys_encode(s: &EquationSystem, alpha: &Alphabet<TrackSym>) -> Result<Fa> {
    if !s.is_conjunction() {
        return Err(Error::MalformedCnf(String::from("system encoding needs singleton clauses")));
    }
    cnf_encode(s, alpha)
}

/// Per-clause unions of equation encodings joined by `(#/#)`.
pub fn cnf_encode(s: &EquationSystem, alpha: &Alphabet<TrackSym>) -> Result<Fa> {
    if s.clauses.is_empty() {
        return Err(Error::MalformedCnf(String::from("no clauses")));
    }
    let mut acc: Option<Fa> = None;
    for (i, c) in s.clauses.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::MalformedCnf(format!("clause {i} is empty")));
        }
        let encs: Vec<Fa> = c.iter().map(|e| eq_encode(e, alpha)).collect::<Result<_>>()?;
        let clause = Fa::union_all(alpha, encs.iter())?;
        acc = Some(match acc {
            None => clause,
            Some(a) => a.concat_nfa(&delim(alpha)?)?.concat_nfa(&clause)?.normalize(),
        });
    }
    Ok(acc.unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// One equation, no delimiters.
    Single,
    /// Equations joined by `(#/#)`.
    System,
}

/// `(⋄/⋄)*` or `{(⋄/⋄),(#/#)}*`, followed by `ℓ.(bits)*` when a length
/// width is given.
pub fn dest_set(layout: Layout, len_width: Option<u8>, alpha: &Alphabet<TrackSym>) -> Result<Fa> {
    let eq = match layout {
        Layout::Single => Fa::star_of(alpha.clone(), &[TrackSym::pad()])?,
        Layout::System => Fa::star_of(alpha.clone(), &[TrackSym::pad(), TrackSym::Delim])?,
    };
    match len_width {
        None => Ok(eq.normalize()),
        Some(w) => {
            let sep = Fa::word(alpha.clone(), &[TrackSym::LenSep])?;
            let bits: Vec<TrackSym> = bit_letters(w).collect();
            let tail = Fa::star_of(alpha.clone(), &bits)?;
            Ok(eq.concat_nfa(&sep)?.concat_nfa(&tail)?.normalize())
        }
    }
}

/// Splits a word at the length separator.
pub fn split_length(w: &[TrackSym]) -> (&[TrackSym], Option<&[TrackSym]>) {
    match w.iter().position(|l| *l == TrackSym::LenSep) {
        Some(i) => (&w[..i], Some(&w[i + 1..])),
        None => (w, None),
    }
}

fn decode_segment(seg: &[TrackSym]) -> Result<WordEquation> {
    let mut top = Vec::new();
    let mut bot = Vec::new();
    let (mut top_done, mut bot_done) = (false, false);
    for l in seg {
        let TrackSym::Pair(a, b) = l else {
            return Err(Error::Decode(format!("unexpected letter {l} inside an equation")));
        };
        for (s, track, done) in [(a, &mut top, &mut top_done), (b, &mut bot, &mut bot_done)] {
            match s {
                Sym::Pad => *done = true,
                Sym::Const(_) | Sym::Var(_) => {
                    if *done {
                        return Err(Error::Decode(format!("pad before {s}")));
                    }
                    track.push(s.clone());
                }
                _ => return Err(Error::Decode(format!("reserved symbol {s} on a track"))),
            }
        }
    }
    Ok(WordEquation::new(WordTerm(top), WordTerm(bot)))
}

/// The conjunction of equations a configuration word denotes. A length
/// part after `ℓ` is ignored.
pub fn decode_config(w: &[TrackSym]) -> Result<EquationSystem> {
    let (eq, _) = split_length(w);
    let eqs: Vec<WordEquation> = eq.split(|l| *l == TrackSym::Delim).map(decode_segment).collect::<Result<_>>()?;
    Ok(EquationSystem::conjunction(eqs))
}

/// The equation sequences of a language whose words differ only in pads.
/// Fails on languages with infinitely many configurations or more than
/// `cap` of them.
pub fn configs(fa: &Fa, cap: usize) -> Result<BTreeSet<Vec<WordEquation>>> {
    let stripped = fa.relabel(fa.alphabet(), |l| if l.is_pad() { vec![None] } else { vec![Some(l.clone())] })?;
    let stripped = stripped.normalize();
    if !stripped.is_finite() {
        return Err(Error::Resource(String::from("infinitely many configurations")));
    }
    let words = stripped.words_up_to(stripped.states(), cap + 1);
    if words.len() > cap {
        return Err(Error::Resource(format!("more than {cap} configurations")));
    }
    words.iter().map(|w| decode_config(w).map(|s| s.equations().cloned().collect())).collect()
}
