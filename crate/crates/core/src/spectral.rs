//! Isoperimetric constants, operator norms and exact heat kernels.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{for_each_connected_set, Visit};
use crate::isolation::IslandDecomposition;
use crate::lumped::{HeatKernel, LumpedTree};
use crate::ocean::WeightedOceanGraph;
use crate::rng::{self, domain};
use crate::series::ReturnSeries;
use crate::tree::RootedTree;

/// Explored-set cap for [`isoperimetric_bruteforce`].
pub const ISOPERIMETRIC_BUDGET: u64 = 2_000_000;

/// Exact `P[X_s = start]` for `s = 0..=t_max` together with the largest
/// deviation of the total mass from 1.
pub fn heat_kernel(tree: &RootedTree, start: usize, t_max: u32) -> Result<HeatKernel> {
    if start >= tree.len() {
        return Err(Error::UnknownVertex(start));
    }
    LumpedTree::from_tree(tree)?.heat_kernel(start, t_max)
}

/// Exact return series of the walk started at `start` (`stderr = 0`).
///
/// Fails with [`Error::InsufficientDepth`] unless the frontier lies at depth
/// `depth(start) + t_max` or deeper.
pub fn heat_kernel_series(tree: &RootedTree, start: usize, t_max: u32) -> Result<ReturnSeries> {
    Ok(ReturnSeries::exact(&heat_kernel(tree, start, t_max)?.values))
}

/// Minimizing set of an isoperimetric enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Isoperimetric {
    pub ratio: f64,
    /// Tree ids of a minimizer.
    pub set: Vec<usize>,
    pub explored: u64,
}

/// Minimum of `|∂S|_w / |S|_w` over connected vertex sets of size at most
/// `max_size`. Boundary weight includes frontier leaks, and `|S|_w` sums
/// vertex weights.
pub fn isoperimetric_bruteforce(w: &WeightedOceanGraph, max_size: usize) -> Result<Isoperimetric> {
    if w.is_empty() {
        return Err(Error::EmptyOcean);
    }
    let adj: Vec<Vec<usize>> = (0..w.len())
        .map(|i| w.row(i).iter().filter(|&&(j, wt)| j != i && wt > 0.0).map(|&(j, _)| j).collect())
        .collect();
    let mut inside = vec![false; w.len()];
    let mut best = (f64::INFINITY, Vec::new());
    let mut explored = 0u64;
    let mut over = false;
    for_each_connected_set(&adj, None, max_size, &mut |set: &[usize]| {
        explored += 1;
        if explored > ISOPERIMETRIC_BUDGET {
            over = true;
            return Visit::Stop;
        }
        for &i in set {
            inside[i] = true;
        }
        let mut volume = 0.0;
        let mut internal = 0.0;
        for &i in set {
            volume += w.vertex_weight(i);
            internal += w.row(i).iter().filter(|&&(j, _)| inside[j]).map(|&(_, wt)| wt).sum::<f64>();
        }
        for &i in set {
            inside[i] = false;
        }
        let ratio = (volume - internal) / volume;
        if ratio < best.0 || (ratio == best.0 && set.len() < best.1.len()) {
            best = (ratio, set.to_vec());
        }
        Visit::Continue
    });
    if over {
        return Err(Error::BudgetExceeded(ISOPERIMETRIC_BUDGET));
    }
    let mut set: Vec<usize> = best.1.iter().map(|&i| w.vertices()[i]).collect();
    set.sort_unstable();
    Ok(Isoperimetric { ratio: best.0, set, explored })
}

/// The symmetrized kernel `D^{1/2} P D^{-1/2}` as a dense matrix over
/// local ocean indices. Frontier leaks are dropped, which makes the kernel
/// the Dirichlet restriction to the truncation.
pub fn symmetrized_kernel(w: &WeightedOceanGraph) -> DMatrix<f64> {
    let n = w.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for &(j, wt) in w.row(i) {
            m[(i, j)] = wt / (w.vertex_weight(i) * w.vertex_weight(j)).sqrt();
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// The kernel does not contract at all (for instance a vertex whose only
    /// move is a self-loop), so the estimate carries no decay information.
    pub degenerate: bool,
}

/// Power-iteration estimate of the operator norm of the symmetrized kernel.
///
/// Iterates `v ← Mv/‖Mv‖` from a seeded positive start and reports `‖Mv‖`,
/// which increases monotonically to the spectral radius. Stops once two
/// successive estimates differ by at most `tol`.
pub fn operator_norm(w: &WeightedOceanGraph, max_iters: usize, tol: f64) -> Result<NormEstimate> {
    let n = w.len();
    if n == 0 {
        return Err(Error::EmptyOcean);
    }
    let scale: Vec<f64> = (0..n).map(|i| w.vertex_weight(i).sqrt()).collect();
    let apply = |v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            out[i] = w.row(i).iter().map(|&(j, wt)| wt * v[j] / scale[j]).sum::<f64>() / scale[i];
        }
    };
    let mut r = rng::stream_for(&[domain::POWER, n as u64]);
    let mut v: Vec<f64> = (0..n).map(|_| 0.5 + r.random::<f64>()).collect();
    normalize(&mut v);
    let mut mv = vec![0.0; n];
    let mut last = 0.0;
    for iter in 1..=max_iters {
        apply(&v, &mut mv);
        let est = norm(&mv);
        if est == 0.0 {
            return Ok(NormEstimate { value: 0.0, iterations: iter, degenerate: false });
        }
        if iter > 1 && (est - last).abs() <= tol {
            return Ok(NormEstimate { value: est, iterations: iter, degenerate: est >= 1.0 - 1e-12 });
        }
        last = est;
        for (a, b) in v.iter_mut().zip(&mv) {
            *a = b / est;
        }
    }
    Err(Error::NoConvergence { iters: max_iters, last })
}

/// Largest absolute eigenvalue of the symmetrized kernel by a dense
/// eigendecomposition. Used as an oracle for [`operator_norm`].
pub fn operator_norm_dense(w: &WeightedOceanGraph) -> f64 {
    let m = symmetrized_kernel(w);
    let sym = (&m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().fold(0.0, |acc: f64, e| acc.max(e.abs()))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let s = norm(v);
    v.iter_mut().for_each(|x| *x /= s);
}

/// Ocean coordinates of a function on the whole truncation, in the order
/// of [`IslandDecomposition::ocean_vertices`].
pub fn restrict_vector(u: &[f64], decomp: &IslandDecomposition) -> Result<Vec<f64>> {
    if u.len() != decomp.len() {
        return Err(Error::DimensionMismatch { expected: decomp.len(), got: u.len() });
    }
    Ok((0..u.len()).filter(|&v| decomp.is_ocean(v)).map(|v| u[v]).collect())
}

/// Zero extension of an ocean function to the whole truncation.
pub fn embed_vector(v: &[f64], decomp: &IslandDecomposition) -> Result<Vec<f64>> {
    let ocean = decomp.ocean_vertices();
    if v.len() != ocean.len() {
        return Err(Error::DimensionMismatch { expected: ocean.len(), got: v.len() });
    }
    let mut out = vec![0.0; decomp.len()];
    for (&x, &val) in ocean.iter().zip(v) {
        out[x] = val;
    }
    Ok(out)
}

/// `Σ_i weight_i·a_i·b_i`.
pub fn weighted_inner(a: &[f64], b: &[f64], weight: &[f64]) -> f64 {
    a.iter().zip(b).zip(weight).map(|((x, y), w)| x * y * w).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocean::{OceanExport, Triplet};

    fn graph(n: usize, degree: &[u32], frontier: &[u32], edges: &[(usize, usize, f64)]) -> WeightedOceanGraph {
        let mut weights = Vec::new();
        for &(x, y, w) in edges {
            weights.push(Triplet { x, y, w });
            if x != y {
                weights.push(Triplet { x: y, y: x, w });
            }
        }
        WeightedOceanGraph::from_export(&OceanExport {
            vertices: (0..n).collect(),
            vertex_weight: degree.iter().map(|&d| f64::from(d)).collect(),
            degree: degree.to_vec(),
            frontier: frontier.to_vec(),
            weights,
        })
        .unwrap()
    }

    #[test]
    fn self_loop_only_is_degenerate() {
        let w = graph(1, &[1], &[0], &[(0, 0, 1.0)]);
        let est = operator_norm(&w, 100, 1e-12).unwrap();
        assert_eq!(est.value, 1.0);
        assert!(est.degenerate);
    }

    #[test]
    fn edge_with_leaks_has_norm_one_half() {
        let w = graph(2, &[2, 2], &[1, 1], &[(0, 1, 1.0)]);
        let est = operator_norm(&w, 100, 1e-12).unwrap();
        assert!((est.value - 0.5).abs() < 1e-12);
        assert!(!est.degenerate);
        assert!((operator_norm_dense(&w) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lone_vertex_ratio_is_one() {
        let w = graph(1, &[3], &[3], &[]);
        let iso = isoperimetric_bruteforce(&w, 4).unwrap();
        assert_eq!(iso.ratio, 1.0);
        assert_eq!(iso.set, vec![0]);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let w = graph(3, &[2, 2, 2], &[1, 0, 1], &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert!(matches!(operator_norm(&w, 1, 0.0), Err(Error::NoConvergence { iters: 1, .. })));
    }
}
