//! q-isolation, q-isolated cores and the island/ocean decomposition.
//!
//! For a vertex set `S` the q-isolation is `Δ_q S = q|S| - |∂S|`, where the
//! boundary counts tree edges leaving `S` plus frontier edges of members.
//! A core is a set whose isolation strictly beats every proper subset, and
//! the islands are the connected components of the union `A_q` of all cores.
//!
//! `Δ_q` is supermodular, cores are closed under finite unions, and every
//! core `C` satisfies `Δ_q A <= Δ_q(A ∪ C)` with equality iff `C ⊆ A`. On a
//! finite tree this pins `A_q` down as the unique inclusion-minimal maximizer
//! of `Δ_q`, which [`decompose_islands`] finds with a two-state tree DP
//! (maximize isolation, break ties by size). [`oracle`] holds the
//! exponential subset enumeration used to cross-check it.

pub mod anchored;
pub mod events;
pub mod oracle;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::tree::RootedTree;

pub use anchored::{anchored_ratio_min, anchored_ratio_min_enumerated, AnchoredMin};
pub use events::{indicator_d, indicator_f, indicator_m, EventParams};
pub use oracle::{is_core_bruteforce, union_of_cores_bruteforce};

/// `q` (and the anchored-expansion floor `h` it may be derived from).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsolationParams {
    pub q: Rational,
    pub h: Option<Rational>,
}

impl IsolationParams {
    pub fn fixed(q: Rational) -> Result<Self> {
        check_unit(q, "q")?;
        Ok(Self { q, h: None })
    }

    /// `q = 2h/3`.
    pub fn derived(h: Rational) -> Result<Self> {
        check_unit(h, "h")?;
        Ok(Self { q: h * Rational::new(2, 3), h: Some(h) })
    }
}

fn check_unit(x: Rational, name: &str) -> Result<()> {
    if x <= Rational::zero() || x >= Rational::from_integer(1) {
        return Err(Error::InvalidParameter(format!("{name} must lie in (0,1), got {}", format_rational(&x))));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Island {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    pub delta: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IslandDecomposition {
    q: Rational,
    island_of: Vec<Option<usize>>,
    islands: Vec<Island>,
}

impl IslandDecomposition {
    /// Splits the vertex set `mask` into tree components and records their isolation.
    pub fn from_mask(tree: &RootedTree, q: Rational, mask: &[bool]) -> Self {
        let n = tree.len();
        let mut island_of = vec![None; n];
        let mut islands = Vec::new();
        for v in 0..n {
            if !mask[v] || island_of[v].is_some() {
                continue;
            }
            let id = islands.len();
            let mut stack = vec![v];
            let mut members = Vec::new();
            island_of[v] = Some(id);
            while let Some(x) = stack.pop() {
                members.push(x);
                for y in tree.neighbors(x) {
                    if mask[y] && island_of[y].is_none() {
                        island_of[y] = Some(id);
                        stack.push(y);
                    }
                }
            }
            members.sort_unstable();
            let delta = delta_of_sorted(tree, &members, q);
            islands.push(Island { vertices: members, delta });
        }
        Self { q, island_of, islands }
    }

    pub fn q(&self) -> Rational {
        self.q
    }

    pub fn len(&self) -> usize {
        self.island_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.island_of.is_empty()
    }

    pub fn island_of(&self, v: usize) -> Option<usize> {
        self.island_of[v]
    }

    pub fn is_ocean(&self, v: usize) -> bool {
        self.island_of[v].is_none()
    }

    pub fn islands(&self) -> &[Island] {
        &self.islands
    }

    pub fn ocean_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.is_ocean(v)).collect()
    }

    /// Membership mask of `A_q`.
    pub fn union_mask(&self) -> Vec<bool> {
        self.island_of.iter().map(Option::is_some).collect()
    }

    pub fn to_export(&self) -> DecompositionExport {
        DecompositionExport {
            q: format_rational(&self.q),
            islands: self.islands.iter().map(|i| i.vertices.clone()).collect(),
            deltas: self.islands.iter().map(|i| format_rational(&i.delta)).collect(),
        }
    }

    pub fn from_export(tree: &RootedTree, export: &DecompositionExport) -> Result<Self> {
        let q = parse_rational(&export.q)?;
        let mut mask = vec![false; tree.len()];
        for &v in export.islands.iter().flatten() {
            *mask.get_mut(v).ok_or(Error::UnknownVertex(v))? = true;
        }
        let d = Self::from_mask(tree, q, &mask);
        let mut got: Vec<&Vec<usize>> = d.islands.iter().map(|i| &i.vertices).collect();
        let mut want: Vec<Vec<usize>> = export.islands.iter().map(|i| {
            let mut i = i.clone();
            i.sort_unstable();
            i
        }).collect();
        got.sort();
        want.sort();
        if got.len() != want.len() || got.iter().zip(&want).any(|(a, b)| *a != b) {
            return Err(Error::InvalidParameter("islands in export are not tree components".into()));
        }
        Ok(d)
    }
}

/// JSON shape `{q: "num/den", islands: [[ids…]…], deltas: ["num/den"…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionExport {
    pub q: String,
    pub islands: Vec<Vec<usize>>,
    pub deltas: Vec<String>,
}

/// Exact `Δ_q S = q|S| - |∂S|`. Duplicate ids are ignored.
pub fn delta_q(tree: &RootedTree, set: &[usize], q: Rational) -> Result<Rational> {
    let mut mask = vec![false; tree.len()];
    let mut size = 0i64;
    for &v in set {
        let slot = mask.get_mut(v).ok_or(Error::UnknownVertex(v))?;
        if !*slot {
            *slot = true;
            size += 1;
        }
    }
    Ok(q * size - Rational::from_integer(tree.boundary_size(&mask) as i64))
}

/// `Δ_q` of a membership mask.
pub fn delta_q_mask(tree: &RootedTree, mask: &[bool], q: Rational) -> Rational {
    let size = mask.iter().filter(|&&b| b).count() as i64;
    q * size - Rational::from_integer(tree.boundary_size(mask) as i64)
}

fn delta_of_sorted(tree: &RootedTree, members: &[usize], q: Rational) -> Rational {
    let mut mask = vec![false; tree.len()];
    for &v in members {
        mask[v] = true;
    }
    delta_q_mask(tree, &mask, q)
}

/// Exact island decomposition at parameter `q > 0`.
///
/// `A_q` is the smallest maximizer of `Δ_q`; the DP maximizes the scaled
/// isolation `den·Δ_q` in integers and breaks ties towards fewer vertices.
pub fn decompose_islands(tree: &RootedTree, q: Rational) -> Result<IslandDecomposition> {
    if q <= Rational::zero() {
        return Err(Error::InvalidParameter("q must be positive".into()));
    }
    let mask = minimal_maximizer(tree, *q.numer(), *q.denom());
    Ok(IslandDecomposition::from_mask(tree, q, &mask))
}

/// (scaled isolation, size); larger isolation wins, then smaller size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Score(i64, i64);

impl Score {
    fn beats(self, other: Score) -> bool {
        self.0 > other.0 || (self.0 == other.0 && self.1 < other.1)
    }
    fn add(self, o: Score) -> Score {
        Score(self.0 + o.0, self.1 + o.1)
    }
    fn cut(self, b: i64) -> Score {
        Score(self.0 - b, self.1)
    }
}

fn minimal_maximizer(tree: &RootedTree, a: i64, b: i64) -> Vec<bool> {
    let n = tree.len();
    let mut inside = vec![Score(0, 0); n];
    let mut outside = vec![Score(0, 0); n];
    // child membership chosen when its parent is in / out of the set
    let mut take_if_parent_in = vec![false; n];
    let mut take_if_parent_out = vec![false; n];
    for v in (0..n).rev() {
        let mut sin = Score(a - b * i64::from(tree.frontier(v)), 1);
        let mut sout = Score(0, 0);
        for &c in tree.children(v) {
            let (ci, co) = (inside[c], outside[c]);
            let excl = co.cut(b);
            if ci.beats(excl) {
                sin = sin.add(ci);
                take_if_parent_in[c] = true;
            } else {
                sin = sin.add(excl);
            }
            let incl = ci.cut(b);
            if incl.beats(co) {
                sout = sout.add(incl);
                take_if_parent_out[c] = true;
            } else {
                sout = sout.add(co);
            }
        }
        inside[v] = sin;
        outside[v] = sout;
    }
    let mut mask = vec![false; n];
    mask[0] = inside[0].beats(outside[0]);
    for v in 1..n {
        let p = tree.parent(v).expect("non-root");
        mask[v] = if mask[p] { take_if_parent_in[v] } else { take_if_parent_out[v] };
    }
    mask
}

/// q-distance between a vertex and a set: `0` inside the set, otherwise one
/// plus the fewest ocean vertices a connecting bridge must use.
pub fn q_distance(tree: &RootedTree, decomp: &IslandDecomposition, v: usize, set: &[usize]) -> Result<u32> {
    let n = tree.len();
    if decomp.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: decomp.len() });
    }
    if v >= n {
        return Err(Error::UnknownVertex(v));
    }
    let mut target = vec![false; n];
    for &s in set {
        *target.get_mut(s).ok_or(Error::UnknownVertex(s))? = true;
    }
    if target[v] {
        return Ok(0);
    }
    // the tree path to each vertex is unique, so a DFS accumulating ocean
    // counts of interior vertices suffices
    let mut best: Option<u32> = None;
    let mut stack = vec![(v, usize::MAX, 0u32)];
    while let Some((x, from, cost)) = stack.pop() {
        for y in tree.neighbors(x) {
            if y == from {
                continue;
            }
            if target[y] {
                best = Some(best.map_or(cost, |b: u32| b.min(cost)));
                continue;
            }
            let c = cost + u32::from(decomp.is_ocean(y));
            if best.is_none_or(|b| c < b) {
                stack.push((y, x, c));
            }
        }
    }
    best.map(|b| b + 1)
        .ok_or_else(|| Error::InvalidParameter("target set is empty".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn delta_basic_values() {
        let t = RootedTree::regular(2, 1);
        assert_eq!(delta_q(&t, &[], r(1, 2)).unwrap(), r(0, 1));
        // cherry with frontier leaves: every leaf has 2 frontier edges
        assert_eq!(delta_q(&t, &[0, 1, 2], r(1, 2)).unwrap(), r(3, 2) - 4);
        assert!(delta_q(&t, &[7], r(1, 2)).is_err());
    }
}
