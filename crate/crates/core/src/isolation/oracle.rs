//! Exponential subset enumeration of q-isolated cores.

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tree::RootedTree;

/// Largest vertex count accepted by the subset enumerations.
pub const ORACLE_LIMIT: usize = 20;

/// Scaled isolation `den·Δ_q` of every subset of `vertices`, indexed by bitmask.
///
/// Degrees and boundaries are taken in the whole tree, so a subset's value
/// equals `den·Δ_q` of the same set viewed inside `tree`.
fn scaled_deltas(tree: &RootedTree, vertices: &[usize], a: i64, b: i64) -> Vec<i64> {
    let m = vertices.len();
    let mut local = vec![usize::MAX; tree.len()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    let adj: Vec<u32> = vertices
        .iter()
        .map(|&v| {
            tree.neighbors(v)
                .filter(|&u| local[u] != usize::MAX)
                .fold(0u32, |acc, u| acc | (1 << local[u]))
        })
        .collect();
    let deg: Vec<i64> = vertices.iter().map(|&v| i64::from(tree.degree(v))).collect();
    let mut d = vec![0i64; 1 << m];
    for mask in 1usize..(1 << m) {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let shared = i64::from((adj[i] & rest as u32).count_ones());
        d[mask] = d[rest] + a - b * deg[i] + 2 * b * shared;
    }
    d
}

/// Runs over all subsets and flags the cores: `core[S]` iff `Δ(S)` beats
/// the best value over proper subsets.
fn core_flags(d: &[i64], m: usize) -> Vec<bool> {
    let mut best_below = vec![i64::MIN; d.len()];
    let mut best = vec![0i64; d.len()];
    let mut core = vec![false; d.len()];
    core[0] = true;
    best[0] = d[0];
    for mask in 1usize..d.len() {
        let mut below = i64::MIN;
        for i in 0..m {
            if mask & (1 << i) != 0 {
                below = below.max(best[mask ^ (1 << i)]);
            }
        }
        best_below[mask] = below;
        core[mask] = d[mask] > below;
        best[mask] = below.max(d[mask]);
    }
    core
}

/// True iff `Δ_q S > Δ_q A` for every proper subset `A ⊊ S`.
pub fn is_core_bruteforce(tree: &RootedTree, set: &[usize], q: Rational) -> Result<bool> {
    let mut vs: Vec<usize> = set.to_vec();
    vs.sort_unstable();
    vs.dedup();
    if let Some(&v) = vs.iter().find(|&&v| v >= tree.len()) {
        return Err(Error::UnknownVertex(v));
    }
    if vs.len() > ORACLE_LIMIT {
        return Err(Error::SubsetTooLarge { size: vs.len(), limit: ORACLE_LIMIT });
    }
    let d = scaled_deltas(tree, &vs, *q.numer(), *q.denom());
    let full = d.len() - 1;
    // only the maximum over proper subsets is needed
    let mut best = vec![0i64; d.len()];
    for mask in 1..d.len() {
        let mut b = d[mask];
        for i in 0..vs.len() {
            if mask & (1 << i) != 0 {
                b = b.max(best[mask ^ (1 << i)]);
            }
        }
        best[mask] = b;
    }
    let below = (0..vs.len()).map(|i| best[full ^ (1 << i)]).max();
    Ok(below.is_none_or(|m| d[full] > m))
}

/// Union of all q-isolated cores by enumerating every vertex subset.
pub fn union_of_cores_bruteforce(tree: &RootedTree, q: Rational) -> Result<Vec<bool>> {
    let n = tree.len();
    if n > ORACLE_LIMIT {
        return Err(Error::SubsetTooLarge { size: n, limit: ORACLE_LIMIT });
    }
    let all: Vec<usize> = (0..n).collect();
    let d = scaled_deltas(tree, &all, *q.numer(), *q.denom());
    let core = core_flags(&d, n);
    let mut union = 0usize;
    for (mask, &c) in core.iter().enumerate() {
        if c {
            union |= mask;
        }
    }
    Ok((0..n).map(|i| union & (1 << i) != 0).collect())
}

/// Every core of a small tree, as bitmasks over the vertex ids.
pub fn all_cores_bruteforce(tree: &RootedTree, q: Rational) -> Result<Vec<usize>> {
    let n = tree.len();
    if n > ORACLE_LIMIT {
        return Err(Error::SubsetTooLarge { size: n, limit: ORACLE_LIMIT });
    }
    let all: Vec<usize> = (0..n).collect();
    let d = scaled_deltas(tree, &all, *q.numer(), *q.denom());
    let core = core_flags(&d, n);
    Ok((0..core.len()).filter(|&m| core[m]).collect())
}
