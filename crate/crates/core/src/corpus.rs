//! Reproducible small-tree corpora for verification runs and tests.

use rand::Rng;

use crate::dist::OffspringDistribution;
use crate::isolation::{decompose_islands, IslandDecomposition};
use crate::rational::Rational;
use crate::rng::{self, domain};
use crate::tree::{sample_tree, RootedTree, TreeSampleSpec};

/// Random recursive tree on `n` vertices: vertex `v` attaches to a uniform
/// earlier vertex. Childless vertices of maximal depth draw a frontier count
/// in `0..=max_frontier`.
pub fn random_recursive_tree(n: usize, max_frontier: u32, seed: u64, index: u64) -> RootedTree {
    let mut r = rng::stream_for(&[seed, domain::CORPUS, index]);
    let mut parents = vec![None];
    let mut depth = vec![0u32];
    for v in 1..n.max(1) {
        let p = r.random_range(0..v);
        parents.push(Some(p));
        depth.push(depth[p] + 1);
    }
    let height = depth.iter().copied().max().unwrap_or(0);
    let mut has_child = vec![false; parents.len()];
    for p in parents.iter().flatten() {
        has_child[*p] = true;
    }
    let frontier: Vec<u32> = (0..parents.len())
        .map(|v| {
            if depth[v] == height && !has_child[v] {
                r.random_range(0..=max_frontier)
            } else {
                0
            }
        })
        .collect();
    RootedTree::from_parents(&parents, &frontier).expect("recursive tree is well formed")
}

/// The small-tree corpus: random recursive trees with `1..=max_n` vertices.
pub fn small_trees(count: usize, max_n: usize, seed: u64) -> Vec<RootedTree> {
    (0..count)
        .map(|i| {
            let mut r = rng::stream_for(&[seed, domain::CORPUS, u64::MAX, i as u64]);
            let n = r.random_range(1..=max_n);
            random_recursive_tree(n, 3, seed, i as u64)
        })
        .collect()
}

/// Survival-conditioned Galton–Watson samples truncated at `depth_cap`.
pub fn gw_trees(dist: &OffspringDistribution, depth_cap: u32, count: usize, seed: u64) -> Vec<RootedTree> {
    (0..count as u64)
        .map(|i| {
            sample_tree(&TreeSampleSpec {
                dist: dist.clone(),
                depth_cap,
                survival_required: true,
                master_seed: seed,
                sample_index: i,
            })
            .expect("supercritical law survives")
        })
        .collect()
}

/// A sampled tree with its island decomposition, ready for ocean-chain work.
#[derive(Debug, Clone)]
pub struct OceanInstance {
    pub tree: RootedTree,
    pub decomp: IslandDecomposition,
    pub sample_index: u64,
}

/// Filters for [`ocean_instances`].
#[derive(Debug, Clone)]
pub struct InstanceFilter {
    pub caps: (u32, u32),
    pub max_vertices: usize,
    pub require_island: bool,
}

/// Survival-conditioned samples whose islands stay clear of the frontier,
/// cycling through `qs`. Gives up after `50 * count` attempts.
pub fn ocean_instances(
    dist: &OffspringDistribution,
    qs: &[Rational],
    filter: &InstanceFilter,
    count: usize,
    seed: u64,
) -> Vec<OceanInstance> {
    let mut out = Vec::with_capacity(count);
    let span = u64::from(filter.caps.1 - filter.caps.0 + 1);
    for i in 0..(50 * count as u64) {
        if out.len() == count {
            break;
        }
        let cap = filter.caps.0 + (rng::key(&[seed, domain::CORPUS, i]) % span) as u32;
        let Ok(tree) = sample_tree(&TreeSampleSpec {
            dist: dist.clone(),
            depth_cap: cap,
            survival_required: true,
            master_seed: seed,
            sample_index: i,
        }) else {
            continue;
        };
        if tree.len() > filter.max_vertices {
            continue;
        }
        let q = qs[out.len() % qs.len()];
        let decomp = decompose_islands(&tree, q).expect("q is positive");
        let clipped = decomp.islands().iter().any(|isl| isl.vertices.iter().any(|&v| tree.has_frontier(v)));
        if clipped || decomp.ocean_vertices().is_empty() || (filter.require_island && decomp.islands().is_empty()) {
            continue;
        }
        out.push(OceanInstance { tree, decomp, sample_index: i });
    }
    out
}
