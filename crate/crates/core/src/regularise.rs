//! The q-regularised tree: `T` near the root, homogeneous `(z_t - 1)`-ary growth elsewhere.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::isolation::IslandDecomposition;
use crate::tree::RootedTree;

/// Builds `T^q` materialized to `depth_cap`.
///
/// Offspring counts are copied from `T` on the ball of radius `t` and on
/// every island of `decomp` that reaches into that ball; all other vertices
/// get `z_t - 1` children. Unmaterialized children of ball vertices at the
/// cap of `T` are replaced by homogeneous subtrees. Vertices at `depth_cap`
/// keep their children as frontier counts.
pub fn regularise(
    tree: &RootedTree,
    t: u32,
    z_t: u32,
    decomp: &IslandDecomposition,
    depth_cap: u32,
) -> Result<RootedTree> {
    regularise_mapped(tree, t, z_t, decomp, depth_cap).map(|r| r.tree)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Regularised {
    pub tree: RootedTree,
    /// Vertex of the original tree each new vertex copies, `None` for grown ones.
    pub origin: Vec<Option<usize>>,
}

/// [`regularise`] that also reports where each vertex came from.
pub fn regularise_mapped(
    tree: &RootedTree,
    t: u32,
    z_t: u32,
    decomp: &IslandDecomposition,
    depth_cap: u32,
) -> Result<Regularised> {
    if z_t < 3 {
        return Err(Error::InvalidParameter(format!("z_t must be at least 3, got {z_t}")));
    }
    if depth_cap < t {
        return Err(Error::InvalidParameter(format!("depth cap {depth_cap} is below t = {t}")));
    }
    if decomp.len() != tree.len() {
        return Err(Error::DimensionMismatch { expected: tree.len(), got: decomp.len() });
    }
    if let Some(cap) = tree.depth_cap() {
        if cap < t {
            return Err(Error::InsufficientDepth { needed: t, available: cap });
        }
    }
    let near: Vec<bool> = decomp
        .islands()
        .iter()
        .map(|isl| isl.vertices.iter().any(|&v| tree.depth(v) <= t))
        .collect();
    for (id, isl) in decomp.islands().iter().enumerate() {
        if near[id] {
            if let Some(&v) = isl.vertices.iter().find(|&&v| tree.has_frontier(v)) {
                return Err(Error::ClippedIsland { island: id, vertex: v });
            }
            if let Some(&v) = isl.vertices.iter().find(|&&v| tree.depth(v) > depth_cap) {
                return Err(Error::InvalidParameter(format!(
                    "depth cap {depth_cap} cuts island {id} at vertex {v}"
                )));
            }
        }
    }
    let copied = |v: usize| tree.depth(v) <= t || decomp.island_of(v).is_some_and(|id| near[id]);

    let homogeneous = z_t - 1;
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut frontier: Vec<u32> = vec![0];
    let mut origins: Vec<Option<usize>> = vec![Some(0)];
    // (new id, original vertex if any, depth)
    let mut queue = VecDeque::from([(0usize, Some(0usize), 0u32)]);
    while let Some((id, origin, depth)) = queue.pop_front() {
        let (kids, synthetic): (&[usize], u32) = match origin {
            Some(v) if copied(v) => (tree.children(v), tree.frontier(v)),
            _ => (&[], homogeneous),
        };
        if depth == depth_cap {
            frontier[id] = kids.len() as u32 + synthetic;
            continue;
        }
        for &c in kids {
            queue.push_back((parents.len(), Some(c), depth + 1));
            parents.push(Some(id));
            frontier.push(0);
            origins.push(Some(c));
        }
        for _ in 0..synthetic {
            queue.push_back((parents.len(), None, depth + 1));
            parents.push(Some(id));
            frontier.push(0);
            origins.push(None);
        }
    }
    Ok(Regularised { tree: RootedTree::from_parents(&parents, &frontier)?, origin: origins })
}
