//! Anchored edge-expansion ratios `|∂K|/|K|` over connected sets containing the root.

use crate::error::{Error, Result};
use crate::graph::{for_each_connected_set, Visit};
use crate::rational::Rational;
use crate::tree::RootedTree;

/// Explored-set cap for the enumeration route.
pub const ENUMERATION_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnchoredMin {
    pub ratio: Rational,
    pub size: usize,
    pub boundary: u64,
}

/// `min_k[k]` is the smallest degree sum over connected root sets of size `k`
/// (index 0 unused). For a connected `K` in a tree `|∂K| = Σdeg - 2(|K|-1)`,
/// so this table carries all boundary minima at once.
pub fn min_degree_sums(tree: &RootedTree, k_max: usize) -> Vec<Option<u64>> {
    let n = tree.len();
    let k_max = k_max.min(n);
    let mut table: Vec<Vec<u64>> = vec![Vec::new(); n];
    for v in (0..n).rev() {
        let mut acc = vec![u64::MAX, u64::from(tree.degree(v))];
        for &c in tree.children(v) {
            let child = std::mem::take(&mut table[c]);
            let len = (acc.len() + child.len() - 1).min(k_max + 1);
            let mut merged = acc.clone();
            merged.resize(len, u64::MAX);
            for (i, &a) in acc.iter().enumerate().skip(1) {
                if a == u64::MAX {
                    continue;
                }
                for (j, &b) in child.iter().enumerate().skip(1) {
                    if i + j >= len {
                        break;
                    }
                    if b != u64::MAX && a + b < merged[i + j] {
                        merged[i + j] = a + b;
                    }
                }
            }
            acc = merged;
        }
        acc.truncate(k_max + 1);
        table[v] = acc;
    }
    let root = std::mem::take(&mut table[0]);
    (0..=k_max)
        .map(|k| root.get(k).copied().filter(|&s| k > 0 && s != u64::MAX))
        .collect()
}

fn check_window(tree: &RootedTree, n_lo: usize, n_hi: usize) -> Result<usize> {
    if n_lo == 0 || n_lo > n_hi || n_lo > tree.len() {
        return Err(Error::InfeasibleSize { lo: n_lo, hi: n_hi });
    }
    Ok(n_hi.min(tree.len()))
}

fn better(cand: AnchoredMin, best: Option<AnchoredMin>) -> bool {
    best.is_none_or(|b| cand.ratio < b.ratio || (cand.ratio == b.ratio && cand.size < b.size))
}

/// Minimum of `|∂K|/|K|` over connected `K ∋ root` with `n_lo <= |K| <= n_hi`,
/// frontier edges included. Ties go to the smaller set.
pub fn anchored_ratio_min(tree: &RootedTree, n_lo: usize, n_hi: usize) -> Result<AnchoredMin> {
    let hi = check_window(tree, n_lo, n_hi)?;
    let sums = min_degree_sums(tree, hi);
    let mut best = None;
    for (k, s) in sums.iter().enumerate().take(hi + 1).skip(n_lo) {
        if let Some(s) = s {
            let boundary = s - 2 * (k as u64 - 1);
            let cand = AnchoredMin { ratio: Rational::new(boundary as i64, k as i64), size: k, boundary };
            if better(cand, best) {
                best = Some(cand);
            }
        }
    }
    best.ok_or(Error::InfeasibleSize { lo: n_lo, hi: n_hi })
}

/// Same minimum found by listing every connected root set; errors once more
/// than `budget` sets have been visited.
pub fn anchored_ratio_min_enumerated(tree: &RootedTree, n_lo: usize, n_hi: usize, budget: u64) -> Result<AnchoredMin> {
    let hi = check_window(tree, n_lo, n_hi)?;
    let adj: Vec<Vec<usize>> = (0..tree.len()).map(|v| tree.neighbors(v).collect()).collect();
    let mut best = None;
    let mut mask = vec![false; tree.len()];
    let mut visited = 0u64;
    let mut over = false;
    for_each_connected_set(&adj, Some(0), hi, &mut |set: &[usize]| {
        visited += 1;
        if visited > budget {
            over = true;
            return Visit::Stop;
        }
        if set.len() >= n_lo {
            for &v in set {
                mask[v] = true;
            }
            let boundary = tree.boundary_size(&mask);
            for &v in set {
                mask[v] = false;
            }
            let cand = AnchoredMin {
                ratio: Rational::new(boundary as i64, set.len() as i64),
                size: set.len(),
                boundary,
            };
            if better(cand, best) {
                best = Some(cand);
            }
        }
        Visit::Continue
    });
    if over {
        return Err(Error::BudgetExceeded(budget));
    }
    best.ok_or(Error::InfeasibleSize { lo: n_lo, hi: n_hi })
}
