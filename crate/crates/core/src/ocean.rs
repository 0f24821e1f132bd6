//! The weighted ocean graph `(T_q, w_q)` and the chain it induces.
//!
//! `w_q(x, y) = deg(x)·P_x[the walk's first return to the ocean is at y]`.
//! A step into an island is followed until the walk comes back out, so
//! weights between ocean vertices on the outer boundary of a common island
//! pick up the island's exit distribution. Frontier edges of ocean vertices
//! are kept apart as a leak: `Σ_y w_q(x, y) + frontier(x) = deg(x)`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isolation::{q_distance, IslandDecomposition};
use crate::linalg::{absorption, hitting_probabilities};
use crate::rational::to_f64;
use crate::tree::RootedTree;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOceanGraph {
    vertices: Vec<usize>,
    local: Vec<Option<usize>>,
    /// Rows sorted by neighbour index, self-weights included.
    rows: Vec<Vec<(usize, f64)>>,
    degree: Vec<u32>,
    frontier: Vec<u32>,
}

impl WeightedOceanGraph {
    /// Ocean vertex ids of the tree, increasing.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Position of a tree vertex in the ocean graph.
    pub fn index_of(&self, v: usize) -> Option<usize> {
        self.local.get(v).copied().flatten()
    }

    /// Weighted neighbours of the `i`-th ocean vertex as `(index, weight)`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// `w_q(x, y)` for tree ids; zero when absent.
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        match (self.index_of(x), self.index_of(y)) {
            (Some(i), Some(j)) => self.rows[i]
                .binary_search_by_key(&j, |&(k, _)| k)
                .map_or(0.0, |pos| self.rows[i][pos].1),
            _ => 0.0,
        }
    }

    /// `w_q(x) = deg(x)` of the `i`-th ocean vertex.
    pub fn vertex_weight(&self, i: usize) -> f64 {
        f64::from(self.degree[i])
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degree[i]
    }

    /// Frontier edges of the `i`-th ocean vertex (weight that leaves the truncation).
    pub fn frontier(&self, i: usize) -> u32 {
        self.frontier[i]
    }

    /// Sum of the explicit weights in row `i`.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, w)| w).sum()
    }

    /// Sparse triplets `(x, y, w)` over tree ids, both orientations.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                out.push((self.vertices[i], self.vertices[j], w));
            }
        }
        out
    }

    pub fn to_export(&self) -> OceanExport {
        OceanExport {
            vertices: self.vertices.clone(),
            vertex_weight: (0..self.len()).map(|i| self.vertex_weight(i)).collect(),
            degree: self.degree.clone(),
            frontier: self.frontier.clone(),
            weights: self.triplets().into_iter().map(|(x, y, w)| Triplet { x, y, w }).collect(),
        }
    }

    /// Rebuilds a graph from its export. Triplets must name listed vertices
    /// and carry nonnegative weights.
    pub fn from_export(export: &OceanExport) -> Result<Self> {
        let n = export.vertices.len();
        for len in [export.degree.len(), export.frontier.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let size = export.vertices.iter().max().map_or(0, |&v| v + 1);
        let mut local = vec![None; size];
        for (i, &v) in export.vertices.iter().enumerate() {
            if local[v].replace(i).is_some() {
                return Err(Error::InvalidParameter(format!("vertex {v} listed twice")));
            }
        }
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for t in &export.weights {
            let (Some(i), Some(j)) = (local.get(t.x).copied().flatten(), local.get(t.y).copied().flatten()) else {
                return Err(Error::UnknownVertex(if local.get(t.x).copied().flatten().is_none() { t.x } else { t.y }));
            };
            if !(t.w >= 0.0 && t.w.is_finite()) {
                return Err(Error::InvalidParameter(format!("weight {} on ({}, {})", t.w, t.x, t.y)));
            }
            *rows[i].entry(j).or_insert(0.0) += t.w;
        }
        Ok(Self {
            vertices: export.vertices.clone(),
            local,
            rows: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
            degree: export.degree.clone(),
            frontier: export.frontier.clone(),
        })
    }

    /// Transition rows `p(x, y) = w(x, y)/w(x)` over local indices; the
    /// frontier share is left out as absorbed mass.
    pub fn transition_rows(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.len())
            .map(|i| {
                let wx = self.vertex_weight(i);
                self.rows[i].iter().map(|&(j, w)| (j, w / wx)).collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub x: usize,
    pub y: usize,
    pub w: f64,
}

/// JSON export of an ocean graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OceanExport {
    pub vertices: Vec<usize>,
    pub vertex_weight: Vec<f64>,
    pub degree: Vec<u32>,
    pub frontier: Vec<u32>,
    pub weights: Vec<Triplet>,
}

/// Ocean vertices adjacent to an island, increasing.
pub fn outer_boundary(tree: &RootedTree, island: &[usize], decomp: &IslandDecomposition) -> Vec<usize> {
    let mut b: Vec<usize> = island
        .iter()
        .flat_map(|&v| tree.neighbors(v))
        .filter(|&u| decomp.is_ocean(u))
        .collect();
    b.sort_unstable();
    b.dedup();
    b
}

/// Exit distribution of the walk started inside an island: rows follow the
/// island's vertex order, columns the outer boundary.
fn exit_distribution(tree: &RootedTree, island: &[usize], boundary: &[usize]) -> Result<DMatrix<f64>> {
    let pos = |v: usize, set: &[usize]| set.binary_search(&v).ok();
    let m = island.len();
    let mut q = DMatrix::<f64>::zeros(m, m);
    let mut r = DMatrix::<f64>::zeros(m, boundary.len());
    for (i, &v) in island.iter().enumerate() {
        let p = 1.0 / f64::from(tree.degree(v));
        for u in tree.neighbors(v) {
            if let Some(j) = pos(u, island) {
                q[(i, j)] += p;
            } else if let Some(j) = pos(u, boundary) {
                r[(i, j)] += p;
            }
        }
    }
    absorption(&q, &r)
}

/// Builds `(T_q, w_q)`. Islands must not touch the frontier.
pub fn build_ocean_weights(tree: &RootedTree, decomp: &IslandDecomposition) -> Result<WeightedOceanGraph> {
    let n = tree.len();
    if decomp.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: decomp.len() });
    }
    for (id, isl) in decomp.islands().iter().enumerate() {
        if let Some(&v) = isl.vertices.iter().find(|&&v| tree.has_frontier(v)) {
            return Err(Error::ClippedIsland { island: id, vertex: v });
        }
    }
    let vertices = decomp.ocean_vertices();
    if vertices.is_empty() {
        return Err(Error::EmptyOcean);
    }
    let mut local = vec![None; n];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = Some(i);
    }
    let exits: Vec<(Vec<usize>, DMatrix<f64>)> = decomp
        .islands()
        .iter()
        .map(|isl| {
            let b = outer_boundary(tree, &isl.vertices, decomp);
            let h = exit_distribution(tree, &isl.vertices, &b)?;
            Ok((b, h))
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); vertices.len()];
    for (i, &x) in vertices.iter().enumerate() {
        for u in tree.neighbors(x) {
            match decomp.island_of(u) {
                None => *rows[i].entry(local[u].expect("ocean")).or_insert(0.0) += 1.0,
                Some(id) => {
                    let island = &decomp.islands()[id].vertices;
                    let (b, h) = &exits[id];
                    let row = island.binary_search(&u).expect("member");
                    for (k, &z) in b.iter().enumerate() {
                        let p = h[(row, k)];
                        if p > 0.0 {
                            *rows[i].entry(local[z].expect("ocean")).or_insert(0.0) += p;
                        }
                    }
                }
            }
        }
    }
    let rows = rows.into_iter().map(|r| r.into_iter().collect()).collect();
    let degree = vertices.iter().map(|&v| tree.degree(v)).collect();
    let frontier = vertices.iter().map(|&v| tree.frontier(v)).collect();
    Ok(WeightedOceanGraph { vertices, local, rows, degree, frontier })
}

/// One step of the induced chain from ocean vertex `x` (tree id).
/// `None` means the step left the truncation through a frontier edge.
pub fn induced_step<R: Rng + ?Sized>(w: &WeightedOceanGraph, x: usize, rng: &mut R) -> Result<Option<usize>> {
    let i = w.index_of(x).ok_or(Error::NotOcean(x))?;
    let mut u = rng.random::<f64>() * w.vertex_weight(i);
    for &(j, wt) in w.row(i) {
        if u < wt {
            return Ok(Some(w.vertices()[j]));
        }
        u -= wt;
    }
    if w.frontier(i) > 0 {
        Ok(None)
    } else {
        // rounding left a sliver of mass past the last entry
        Ok(w.row(i).last().map(|&(j, _)| w.vertices()[j]))
    }
}

/// Maximum deviations of the four structural properties of `w_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OceanReport {
    pub max_asymmetry: f64,
    pub max_conservation_error: f64,
    /// Tree edges between ocean vertices with weight below 1 (beyond tolerance).
    pub domination_violations: usize,
    /// Pairs with weight above 1 (or off-tree weight) that are not on the boundary of a common island.
    pub excess_violations: usize,
    /// Vertices whose self-weight positivity disagrees with island adjacency.
    pub diagonal_violations: usize,
}

impl OceanReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_asymmetry <= tol
            && self.max_conservation_error <= tol
            && self.domination_violations == 0
            && self.excess_violations == 0
            && self.diagonal_violations == 0
    }
}

pub fn check_ocean_graph(tree: &RootedTree, decomp: &IslandDecomposition, w: &WeightedOceanGraph, tol: f64) -> OceanReport {
    let mut shared_island: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    let mut island_adjacent = vec![false; tree.len()];
    for isl in decomp.islands() {
        let b = outer_boundary(tree, &isl.vertices, decomp);
        for &x in &b {
            island_adjacent[x] = true;
            for &y in &b {
                shared_island.insert((x, y), ());
            }
        }
    }
    let mut rep = OceanReport {
        max_asymmetry: 0.0,
        max_conservation_error: 0.0,
        domination_violations: 0,
        excess_violations: 0,
        diagonal_violations: 0,
    };
    for i in 0..w.len() {
        let x = w.vertices()[i];
        let total = w.row_sum(i) + f64::from(w.frontier(i));
        rep.max_conservation_error = rep.max_conservation_error.max((total - f64::from(tree.degree(x))).abs());
        for &(j, wt) in w.row(i) {
            let y = w.vertices()[j];
            rep.max_asymmetry = rep.max_asymmetry.max((wt - w.weight(y, x)).abs());
            let edge = tree.parent(x) == Some(y) || tree.parent(y) == Some(x);
            let expected = if edge { 1.0 } else { 0.0 };
            if wt > expected + tol && x != y && !shared_island.contains_key(&(x, y)) {
                rep.excess_violations += 1;
            }
        }
        for y in tree.neighbors(x) {
            if decomp.is_ocean(y) && w.weight(x, y) < 1.0 - tol {
                rep.domination_violations += 1;
            }
        }
        if (w.weight(x, x) > 0.0) != island_adjacent[x] {
            rep.diagonal_violations += 1;
        }
    }
    rep
}

/// Probability that the simple random walk on `T` from `x` ever visits `y`,
/// and the same for the induced chain on `w`; frontier edges absorb both walks.
pub fn hitting_equivalence(
    tree: &RootedTree,
    decomp: &IslandDecomposition,
    w: &WeightedOceanGraph,
    x: usize,
    y: usize,
) -> Result<(f64, f64)> {
    let ix = w.index_of(x).ok_or(Error::NotOcean(x))?;
    let iy = w.index_of(y).ok_or(Error::NotOcean(y))?;
    if decomp.len() != tree.len() {
        return Err(Error::DimensionMismatch { expected: tree.len(), got: decomp.len() });
    }
    if x == y {
        return Ok((1.0, 1.0));
    }
    let srw_rows: Vec<Vec<(usize, f64)>> = (0..tree.len())
        .map(|v| {
            let p = 1.0 / f64::from(tree.degree(v));
            tree.neighbors(v).map(|u| (u, p)).collect()
        })
        .collect();
    let mut target = vec![false; tree.len()];
    target[y] = true;
    let p_srw = hitting_probabilities(&srw_rows, &target)?[x];
    let mut target = vec![false; w.len()];
    target[iy] = true;
    let p_ind = hitting_probabilities(&w.transition_rows(), &target)?[ix];
    Ok((p_srw, p_ind))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeBracket {
    /// Probability of reaching the islands before any frontier edge or guard vertex.
    pub lower: f64,
    /// `lower` plus the probability of leaving the explored region first.
    pub upper: f64,
    pub bound: f64,
    pub q_distance: u32,
    pub max_ocean_degree: u32,
    pub islands: usize,
}

impl EscapeBracket {
    pub fn within_bound(&self) -> bool {
        self.upper <= self.bound
    }
}

/// `(18/q²)(1 - q²/9)^(n/2 - 1)(zJ)^(1/2)`.
pub fn escape_bound(q: f64, n: u32, z: u32, j: usize) -> f64 {
    18.0 / (q * q) * (1.0 - q * q / 9.0).powf(f64::from(n) / 2.0 - 1.0) * (f64::from(z) * j as f64).sqrt()
}

/// Brackets the chance that the walk from `x` ever reaches the chosen
/// islands. Vertices at depth `>= depth_guard` count as having left the
/// explored region, as do frontier edges.
pub fn escape_probability_bracket(
    tree: &RootedTree,
    decomp: &IslandDecomposition,
    x: usize,
    islands: &[usize],
    depth_guard: u32,
) -> Result<EscapeBracket> {
    let n = tree.len();
    if x >= n {
        return Err(Error::UnknownVertex(x));
    }
    if islands.is_empty() {
        return Err(Error::InvalidParameter("no islands chosen".into()));
    }
    let mut target = vec![false; n];
    let mut members = Vec::new();
    for &id in islands {
        let isl = decomp
            .islands()
            .get(id)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown island {id}")))?;
        for &v in &isl.vertices {
            target[v] = true;
            members.push(v);
        }
    }
    if target[x] {
        return Err(Error::InvalidParameter(format!("vertex {x} lies in a chosen island")));
    }
    let guard = |v: usize| tree.depth(v) >= depth_guard && !target[v];
    // hit islands before leaving
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|v| {
            if guard(v) {
                return Vec::new();
            }
            let p = 1.0 / f64::from(tree.degree(v));
            tree.neighbors(v).map(|u| (u, p)).collect()
        })
        .collect();
    let lower = hitting_probabilities(&rows, &target)?[x];
    // leave before hitting islands: frontier edges become an explicit exit state
    let exit = n;
    let mut rows_exit: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|v| {
            if guard(v) || target[v] {
                return Vec::new();
            }
            let p = 1.0 / f64::from(tree.degree(v));
            let mut r: Vec<(usize, f64)> = tree.neighbors(v).map(|u| (u, p)).collect();
            if tree.frontier(v) > 0 {
                r.push((exit, p * f64::from(tree.frontier(v))));
            }
            r
        })
        .collect();
    rows_exit.push(Vec::new());
    let mut leave = vec![false; n + 1];
    leave[exit] = true;
    for v in 0..n {
        leave[v] = guard(v);
    }
    let escaped = hitting_probabilities(&rows_exit, &leave)?[x];
    let dist = q_distance(tree, decomp, x, &members)?;
    let z = decomp.ocean_vertices().iter().map(|&v| tree.degree(v)).max().unwrap_or(0);
    let q = to_f64(&decomp.q());
    Ok(EscapeBracket {
        lower,
        upper: (lower + escaped).min(1.0),
        bound: escape_bound(q, dist, z, islands.len()),
        q_distance: dist,
        max_ocean_degree: z,
        islands: islands.len(),
    })
}
