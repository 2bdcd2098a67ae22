#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wordeq_core::{Alphabet, Fa, TrackSym};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random NFA with `states` states, roughly `density` edges per state.
pub fn random_fa<L: wordeq_core::fa::Letter>(
    r: &mut ChaCha8Rng,
    alpha: &Alphabet<L>,
    states: usize,
    density: usize,
) -> Fa<L> {
    let k = alpha.len() as u32;
    let mut edges = Vec::new();
    for p in 0..states as u32 {
        for _ in 0..density {
            let q = r.gen_range(0..states as u32);
            let l = if r.gen_bool(0.1) { None } else { Some(r.gen_range(0..k)) };
            edges.push((p, l, q));
        }
    }
    let finals: Vec<u32> = (0..states as u32).filter(|_| r.gen_bool(0.4)).collect();
    Fa::from_raw(alpha.clone(), states, edges, [0], finals)
}

/// A random language over the pair letters, biased towards valid encodings
/// by ending in a pad loop.
pub fn random_config_fa(r: &mut ChaCha8Rng, alpha: &Alphabet<TrackSym>) -> Fa {
    let pairs: Vec<u32> = (0..alpha.len() as u32).filter(|&i| matches!(alpha.get(i), TrackSym::Pair(..))).collect();
    let pad = alpha.index(&TrackSym::pad()).unwrap();
    let n = r.gen_range(2..6u32);
    let mut edges = Vec::new();
    for p in 0..n {
        for _ in 0..r.gen_range(1..4) {
            let q = r.gen_range(0..=n);
            edges.push((p, Some(pairs[r.gen_range(0..pairs.len())]), q));
        }
    }
    edges.push((n, Some(pad), n));
    Fa::from_raw(alpha.clone(), n as usize + 1, edges, [0], [n])
}

pub fn same_words<L: wordeq_core::fa::Letter>(a: &Fa<L>, b: &Fa<L>, max: usize) -> bool {
    a.words_up_to(max, 100_000) == b.words_up_to(max, 100_000)
}

/// Membership by direct simulation of the edges, independent of
/// determinization.
pub fn naive_accepts<L: wordeq_core::fa::Letter>(fa: &Fa<L>, w: &[L]) -> bool {
    let closure = |set: &mut Vec<u32>| {
        let mut i = 0;
        while i < set.len() {
            for &(l, q) in fa.edges(set[i]) {
                if l.is_none() && !set.contains(&q) {
                    set.push(q);
                }
            }
            i += 1;
        }
    };
    let mut cur: Vec<u32> = fa.initial().to_vec();
    closure(&mut cur);
    for a in w {
        let Some(k) = fa.alphabet().index(a) else { return false };
        let mut next = Vec::new();
        for &p in &cur {
            for &(l, q) in fa.edges(p) {
                if l == Some(k) && !next.contains(&q) {
                    next.push(q);
                }
            }
        }
        closure(&mut next);
        cur = next;
    }
    cur.iter().any(|&q| fa.is_final(q))
}

/// Every word over the alphabet of length at most `max`.
pub fn all_words<L: Clone>(letters: &[L], max: usize) -> Vec<Vec<L>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for l in letters {
                let mut w2: Vec<L> = w.clone();
                w2.push(l.clone());
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Fixed-seed proptest configuration so runs are reproducible.
pub fn cfg(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed_2024),
        failure_persistence: None,
        ..proptest::test_runner::Config::default()
    }
}
