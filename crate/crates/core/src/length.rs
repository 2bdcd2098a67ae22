//! Length constraints as LSBF bit-track automata.
//!
//! Track `k` of a `Bits` letter carries the bits of `|vars[k]|`, least
//! significant first. Words of any common length are allowed, so every
//! language here is closed under appending all-zero columns.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::encoding::bit_letters;
use crate::error::{Error, Result};
use crate::fa::{Alphabet, Fa};
use crate::formula::{Formula, LenAtom};
use crate::frt::{Chain, Frt, FrtEdge, Guard, Output, RegisterMachine};
use crate::nielsen::RuleTag;
use crate::sym::{Sym, TrackSym, VarName};
use crate::transducer::Transducer;

/// Widths above this make the bit alphabet unreasonably large.
pub const MAX_WIDTH: usize = 10;

/// Bit positions of `n`: `n = Σ 2^i`.
pub fn lsbf_encode(n: u64) -> BTreeSet<u32> {
    (0..64).filter(|i| n >> i & 1 == 1).collect()
}

/// Positional variant, each position shifted by one.
pub fn lsbfp_encode(n: u64) -> BTreeSet<u32> {
    lsbf_encode(n).into_iter().map(|i| i + 1).collect()
}

pub fn lsbf_decode(s: &BTreeSet<u32>) -> u64 {
    s.iter().map(|i| 1u64 << i).sum()
}

/// Per-track values of a bit word.
pub fn decode_bits(w: &[TrackSym], width: usize) -> Result<Vec<u64>> {
    let mut vals = vec![0u64; width];
    for (pos, l) in w.iter().enumerate() {
        match l {
            TrackSym::Bits { width: w2, value } if *w2 as usize == width => {
                for (k, v) in vals.iter_mut().enumerate() {
                    if value >> k & 1 == 1 {
                        if pos >= 63 {
                            return Err(Error::Resource(String::from("length value exceeds 63 bits")));
                        }
                        *v |= 1 << pos;
                    }
                }
            }
            other => return Err(Error::Decode(format!("{other} is not a {width}-bit column"))),
        }
    }
    Ok(vals)
}

/// The shortest bit word for `vals`, padded to at least `min_len` columns.
pub fn encode_bits(vals: &[u64], min_len: usize) -> Vec<TrackSym> {
    let width = vals.len() as u8;
    let len = vals.iter().map(|v| 64 - v.leading_zeros() as usize).max().unwrap_or(0).max(min_len);
    (0..len)
        .map(|pos| {
            let mut value = 0u32;
            for (k, v) in vals.iter().enumerate() {
                if pos < 64 && v >> pos & 1 == 1 {
                    value |= 1 << k;
                }
            }
            TrackSym::Bits { width, value }
        })
        .collect()
}

fn bits_fa(alpha: &Alphabet<TrackSym>, width: u8) -> Result<Fa> {
    let letters: Vec<TrackSym> = bit_letters(width).collect();
    Ok(Fa::star_of(alpha.clone(), &letters)?.normalize())
}

fn check_width(vars: &[VarName]) -> Result<u8> {
    if vars.len() > MAX_WIDTH {
        return Err(Error::Unsupported(format!("more than {MAX_WIDTH} length-tracked variables")));
    }
    Ok(vars.len() as u8)
}

/// LSBF words whose values satisfy `a`. States are residual bounds.
pub fn atom_to_fa(a: &LenAtom, vars: &[VarName], alpha: &Alphabet<TrackSym>) -> Result<Fa> {
    let width = check_width(vars)?;
    let mut coeff = vec![0i64; vars.len()];
    for (v, c) in &a.coeffs {
        let k = vars.binary_search(v).map_err(|_| Error::Contract(format!("variable {v} is not length-tracked")))?;
        coeff[k] = *c;
    }
    let mut ids: HashMap<i64, u32> = HashMap::new();
    let mut work = vec![a.bound];
    ids.insert(a.bound, 0);
    let mut edges = Vec::new();
    let mut i = 0;
    while i < work.len() {
        let c = work[i];
        for value in 0..1u32 << width {
            let dot: i64 = coeff.iter().enumerate().filter(|(k, _)| value >> k & 1 == 1).map(|(_, a)| a).sum();
            let next = (c - dot).div_euclid(2);
            let n = work.len() as u32;
            let t = *ids.entry(next).or_insert_with(|| {
                work.push(next);
                n
            });
            edges.push((i as u32, Some(TrackSym::Bits { width, value }), t));
        }
        i += 1;
    }
    let finals: Vec<u32> = work.iter().enumerate().filter(|(_, c)| **c >= 0).map(|(k, _)| k as u32).collect();
    Ok(Fa::from_edges(alpha.clone(), work.len(), edges, [0], finals)?.normalize())
}

/// Boolean combination of atoms. Word atoms are rejected.
pub fn formula_to_fa(f: &Formula, vars: &[VarName], alpha: &Alphabet<TrackSym>) -> Result<Fa> {
    let width = check_width(vars)?;
    let all = bits_fa(alpha, width)?;
    Ok(match f {
        Formula::True => all,
        Formula::False => Fa::empty(alpha.clone()),
        Formula::Len(a) => atom_to_fa(a, vars, alpha)?,
        Formula::Not(g) => all.difference(&formula_to_fa(g, vars, alpha)?)?,
        Formula::And(gs) => {
            let mut acc = all;
            for g in gs {
                acc = acc.intersect(&formula_to_fa(g, vars, alpha)?)?;
            }
            acc
        }
        Formula::Or(gs) => {
            let parts: Vec<Fa> = gs.iter().map(|g| formula_to_fa(g, vars, alpha)).collect::<Result<_>>()?;
            Fa::union_all(alpha, parts.iter())?
        }
        Formula::Eq(_) | Formula::Neq(_) => {
            return Err(Error::Unsupported(String::from("word atom inside a length formula")))
        }
    })
}

/// Length effect of a rule on the bit tracks: `x' = x − y` for `x → yx`
/// (requiring `x ≥ y`), `x' = x − 1` for `x → ax`, and `x = 0` for `x → ε`.
pub fn build_len_step(rule: &RuleTag, vars: &[VarName], alpha: &Alphabet<TrackSym>) -> Result<Transducer> {
    let width = check_width(vars)?;
    let idx =
        |v: &VarName| vars.binary_search(v).map_err(|_| Error::Contract(format!("variable {v} is not length-tracked")));
    let mut edges = Vec::new();
    match rule {
        RuleTag::VarEps(x) => {
            let kx = idx(x)?;
            for value in 0..1u32 << width {
                if value >> kx & 1 == 0 {
                    let l = TrackSym::Bits { width, value };
                    edges.push((0, Some(l.clone()), Some(l), 0));
                }
            }
            Ok(Transducer::from_edges(alpha.clone(), alpha.clone(), 1, edges, [0], [0])?.with_tag(rule.clone()))
        }
        RuleTag::VarPrepend(x, a) => {
            let kx = idx(x)?;
            let ky = match a {
                Sym::Var(y) => Some(idx(y)?),
                _ => None,
            };
            // state = borrow
            for borrow in 0..2i32 {
                for value in 0..1u32 << width {
                    let xb = (value >> kx & 1) as i32;
                    let sub = match ky {
                        Some(ky) => (value >> ky & 1) as i32,
                        None => 0,
                    };
                    let d = xb - sub - borrow;
                    let bit = d.rem_euclid(2) as u32;
                    let nb = (d < 0) as u32;
                    let out = (value & !(1 << kx)) | bit << kx;
                    edges.push((
                        borrow as u32,
                        Some(TrackSym::Bits { width, value }),
                        Some(TrackSym::Bits { width, value: out }),
                        nb,
                    ));
                }
            }
            let start = if ky.is_some() { 0 } else { 1 };
            Ok(Transducer::from_edges(alpha.clone(), alpha.clone(), 2, edges, [start], [0])?.with_tag(rule.clone()))
        }
        _ => Err(Error::Internal(format!("no length step for {rule}"))),
    }
}

fn separator() -> Frt {
    let mut f = Frt::new(0);
    let a = f.add_state(false);
    let b = f.add_state(true);
    f.initial = vec![a];
    f.add_edge(
        a,
        FrtEdge {
            reads: true,
            guesses: Vec::new(),
            guard: Guard::IsLenSep,
            output: Output::Copy,
            updates: Vec::new(),
            to: b,
        },
    );
    f
}

/// `T_eq . {ℓ↦ℓ} . T_len`.
pub fn combine_eq_len(eq: Arc<dyn RegisterMachine>, len: &Transducer) -> Chain {
    Chain::new(vec![eq, Arc::new(separator()), Arc::new(Frt::from_transducer(len))])
}

/// Values of all tracked variables, keyed by name.
pub fn valuation(vars: &[VarName], vals: &[u64]) -> BTreeMap<VarName, usize> {
    vars.iter().cloned().zip(vals.iter().map(|&v| v as usize)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Universe;

    fn setup() -> (Vec<VarName>, Alphabet<TrackSym>) {
        let vars = vec![VarName::new("x"), VarName::new("y")];
        let alpha = Universe::new([], vars.clone()).with_len_width(2).alphabet();
        (vars, alpha)
    }

    fn col(x: u32, y: u32) -> TrackSym {
        TrackSym::Bits { width: 2, value: x | y << 1 }
    }

    #[test]
    fn lsbf_examples() {
        assert_eq!(lsbf_encode(42), [1, 3, 5].into_iter().collect());
        assert_eq!(lsbfp_encode(42), [2, 4, 6].into_iter().collect());
        assert!(lsbf_encode(0).is_empty());
        assert_eq!(lsbf_encode(9), [0, 3].into_iter().collect());
        assert_eq!(lsbf_decode(&lsbf_encode(42)), 42);
        let w = [col(1, 1), col(0, 0), col(0, 1), col(1, 0)];
        assert_eq!(decode_bits(&w, 2).unwrap(), vec![9, 5]);
    }

    #[test]
    fn difference_atom() {
        let (vars, alpha) = setup();
        let a = LenAtom::new([(vars[0].clone(), 1), (vars[1].clone(), -1)], -1);
        let fa = atom_to_fa(&a, &vars, &alpha).unwrap();
        assert!(fa.accepts(&[col(1, 0), col(0, 1)]).unwrap());
        assert!(!fa.accepts(&[col(0, 1), col(1, 0)]).unwrap());
    }

    #[test]
    fn steps_on_values() {
        let (vars, alpha) = setup();
        let (x, y) = (vars[0].clone(), vars[1].clone());
        let t = build_len_step(&RuleTag::VarPrepend(x.clone(), Sym::Var(y)), &vars, &alpha).unwrap();
        assert!(t.accepts_pair(&encode_bits(&[3, 1], 2), &encode_bits(&[2, 1], 2)).unwrap());
        let e = build_len_step(&RuleTag::VarEps(x.clone()), &vars, &alpha).unwrap();
        assert!(e.accepts_pair(&encode_bits(&[0, 3], 2), &encode_bits(&[0, 3], 2)).unwrap());
        assert!(e.image(&Fa::word(alpha.clone(), &encode_bits(&[1, 0], 1)).unwrap()).unwrap().is_empty());
        let c = build_len_step(&RuleTag::VarPrepend(x, Sym::Const('a')), &vars, &alpha).unwrap();
        assert!(c.accepts_pair(&encode_bits(&[1, 0], 1), &encode_bits(&[0, 0], 1)).unwrap());
    }

    #[test]
    fn negation_of_zero_bound() {
        let (vars, alpha) = setup();
        let a = Formula::Not(alloc::boxed::Box::new(Formula::Len(LenAtom::new([(vars[0].clone(), 1)], 0))));
        let fa = formula_to_fa(&a, &vars, &alpha).unwrap();
        assert!(fa.accepts(&[col(1, 0)]).unwrap());
        assert!(!fa.accepts(&[col(0, 1)]).unwrap());
    }
}
