//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scirec_core::taxonomy::Concept;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn id(i: usize) -> String {
    format!("c{i:02}")
}

/// Concepts `c00..` where each non-root picks up to `max_parents` parents
/// among earlier concepts. The first `roots` concepts are roots.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, roots: usize, max_parents: usize) -> Vec<Concept> {
    let roots = roots.clamp(1, n.max(1));
    (0..n)
        .map(|i| {
            let mut c = Concept::new(id(i), format!("label {i}"));
            if i >= roots {
                let k = rng.gen_range(1..=max_parents.min(i));
                let mut earlier: Vec<usize> = (0..i).collect();
                earlier.shuffle(rng);
                for &p in &earlier[..k] {
                    c = c.with_parent(id(p));
                }
            }
            c
        })
        .collect()
}

/// Levels by repeated relaxation of `level(c) = 1 + min level(parent)`.
pub fn levels(concepts: &[Concept]) -> BTreeMap<String, u32> {
    let mut level: BTreeMap<String, u32> = concepts
        .iter()
        .map(|c| (c.id.clone(), if c.parents.is_empty() { 1 } else { u32::MAX }))
        .collect();
    loop {
        let mut changed = false;
        for c in concepts {
            for p in &c.parents {
                let via = level[p].saturating_add(1);
                if via < level[&c.id] {
                    level.insert(c.id.clone(), via);
                    changed = true;
                }
            }
        }
        if !changed {
            return level;
        }
    }
}

pub fn histogram(levels: &BTreeMap<String, u32>) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for l in levels.values() {
        *h.entry(*l).or_insert(0) += 1;
    }
    h
}

/// Child lists by inverting every concept's parent list.
pub fn children(concepts: &[Concept]) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = concepts.iter().map(|c| (c.id.clone(), BTreeSet::new())).collect();
    for c in concepts {
        for p in &c.parents {
            out.get_mut(p).unwrap().insert(c.id.clone());
        }
    }
    out
}

pub fn cf(counts: &BTreeMap<String, u32>) -> BTreeMap<String, f64> {
    let total: u32 = counts.values().sum();
    counts.iter().map(|(c, n)| (c.clone(), f64::from(*n) / f64::from(total))).collect()
}

pub fn fl(level: u32, hist: &BTreeMap<u32, usize>) -> f64 {
    let below = hist.get(&(level + 1)).copied().unwrap_or(0);
    if below > 1 {
        1.0 / (below as f64).log10()
    } else {
        0.0
    }
}

/// BellLog by top-down recursion over every concept, zeros included.
pub fn belllog(concepts: &[Concept], counts: &BTreeMap<String, u32>) -> BTreeMap<String, f64> {
    fn go(
        c: &str,
        cf: &BTreeMap<String, f64>,
        kids: &BTreeMap<String, BTreeSet<String>>,
        lv: &BTreeMap<String, u32>,
        hist: &BTreeMap<u32, usize>,
        memo: &mut BTreeMap<String, f64>,
    ) -> f64 {
        if let Some(v) = memo.get(c) {
            return *v;
        }
        let sum: f64 = kids[c].iter().map(|k| go(k, cf, kids, lv, hist, memo)).sum();
        let v = cf.get(c).copied().unwrap_or(0.0) + fl(lv[c], hist) * sum;
        memo.insert(c.to_string(), v);
        v
    }
    let cf = cf(counts);
    let kids = children(concepts);
    let lv = levels(concepts);
    let hist = histogram(&lv);
    let mut memo = BTreeMap::new();
    for c in concepts {
        go(&c.id, &cf, &kids, &lv, &hist, &mut memo);
    }
    memo
}

pub fn ancestors(concepts: &[Concept], c: &str) -> BTreeSet<String> {
    let parents: BTreeMap<&str, &BTreeSet<String>> = concepts.iter().map(|c| (c.id.as_str(), &c.parents)).collect();
    let mut out = BTreeSet::new();
    let mut stack: Vec<String> = parents[c].iter().cloned().collect();
    while let Some(p) = stack.pop() {
        if out.insert(p.clone()) {
            stack.extend(parents[p.as_str()].iter().cloned());
        }
    }
    out
}

/// Number of collections in `items` mentioning each concept.
pub fn doc_freq(items: &[BTreeMap<String, u32>]) -> BTreeMap<String, usize> {
    let mut df = BTreeMap::new();
    for item in items {
        for (c, n) in item {
            if *n > 0 {
                *df.entry(c.clone()).or_insert(0) += 1;
            }
        }
    }
    df
}

/// `weight(c) = activation(c) * ln(n / df(c))`, skipping unseen concepts
/// and zero products.
pub fn idf_weighted(activation: &BTreeMap<String, f64>, df: &BTreeMap<String, usize>, n: usize) -> BTreeMap<String, f64> {
    activation
        .iter()
        .filter_map(|(c, a)| {
            let d = *df.get(c)?;
            let w = a * (n as f64 / d as f64).ln();
            (w > 0.0).then(|| (c.clone(), w))
        })
        .collect()
}

pub fn random_counts(rng: &mut ChaCha8Rng, ids: &[String], max_distinct: usize) -> BTreeMap<String, u32> {
    let n = rng.gen_range(0..=max_distinct.min(ids.len()));
    let mut pick: Vec<&String> = ids.iter().collect();
    pick.shuffle(rng);
    pick.into_iter().take(n).map(|c| (c.clone(), rng.gen_range(1..=4))).collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn maps_close(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>, tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|(k, v)| b.get(k).is_some_and(|w| close(*v, *w, tol)))
}

// ranking metrics, evaluated position by position

pub fn brute_rankscore(rel: &[bool], theta: f64, k: usize) -> f64 {
    let util = |pos: usize| 0.5f64.powf(pos as f64 / (theta - 1.0));
    let mut got = 0.0;
    for pos in 0..k.min(rel.len()) {
        if rel[pos] {
            got += util(pos);
        }
    }
    let mut best = 0.0;
    for pos in 0..k {
        best += util(pos);
    }
    got / best
}

pub fn brute_precision(rel: &[bool], k: usize) -> f64 {
    let mut n = 0;
    for pos in 0..k {
        if pos < rel.len() && rel[pos] {
            n += 1;
        }
    }
    n as f64 / k as f64
}

pub fn brute_ap(rel: &[bool]) -> f64 {
    let mut precisions = Vec::new();
    for (pos, r) in rel.iter().enumerate() {
        if *r {
            let prefix = &rel[..=pos];
            precisions.push(prefix.iter().filter(|x| **x).count() as f64 / prefix.len() as f64);
        }
    }
    if precisions.is_empty() {
        0.0
    } else {
        precisions.iter().sum::<f64>() / precisions.len() as f64
    }
}

pub fn brute_rr(rel: &[bool]) -> f64 {
    for (pos, r) in rel.iter().enumerate() {
        if *r {
            return 1.0 / (pos + 1) as f64;
        }
    }
    0.0
}

/// nDCG whose ideal DCG is the maximum over every placement of the hits.
pub fn brute_ndcg(rel: &[bool], k: usize) -> f64 {
    let n = k.min(rel.len());
    let dcg_of = |mask: u32| -> f64 {
        (0..n)
            .filter(|p| mask & (1 << p) != 0)
            .map(|p| 1.0 / ((p + 2) as f64).log2())
            .sum()
    };
    let mut actual = 0u32;
    for p in 0..n {
        if rel[p] {
            actual |= 1 << p;
        }
    }
    let hits = actual.count_ones();
    if hits == 0 {
        return 0.0;
    }
    let ideal = (0u32..(1 << n))
        .filter(|m| m.count_ones() == hits)
        .map(dcg_of)
        .fold(0.0, f64::max);
    dcg_of(actual) / ideal
}
