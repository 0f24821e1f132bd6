//! Indicators of the bad events `F_t`, `M_{t,z}` and `D_t` on a sampled tree.

use crate::error::{Error, Result};
use crate::isolation::anchored::min_degree_sums;
use crate::tree::RootedTree;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventParams {
    pub t: u32,
    pub z_t: f64,
    pub c3: f64,
    pub k: f64,
}

impl EventParams {
    pub fn new(t: u32, z_t: f64, c3: f64, k: f64) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidParameter("t must be positive".into()));
        }
        if !(z_t >= 3.0) {
            return Err(Error::InvalidParameter(format!("z_t must be at least 3, got {z_t}")));
        }
        if !(c3 > 0.0) {
            return Err(Error::InvalidParameter(format!("c3 must be positive, got {c3}")));
        }
        if !(k > 2.0) {
            return Err(Error::InvalidParameter(format!("k must exceed 2, got {k}")));
        }
        Ok(Self { t, z_t, c3, k })
    }

    /// Offspring threshold `c3·t^(1/k)` of the event `F_t`.
    pub fn f_threshold(&self) -> f64 {
        self.c3 * f64::from(self.t).powf(1.0 / self.k)
    }
}

fn require_depth(tree: &RootedTree, t: u32) -> Result<()> {
    match tree.depth_cap() {
        Some(cap) if cap < t => Err(Error::InsufficientDepth { needed: t, available: cap }),
        _ => Ok(()),
    }
}

fn ball(tree: &RootedTree, t: u32) -> impl Iterator<Item = usize> + '_ {
    (0..tree.len()).filter(move |&v| tree.depth(v) <= t)
}

/// Some `x` in the ball of radius `t` has `Z(x) >= c3·t^(1/k)`.
pub fn indicator_f(tree: &RootedTree, params: &EventParams) -> Result<bool> {
    require_depth(tree, params.t)?;
    let thr = params.f_threshold();
    Ok(ball(tree, params.t).any(|v| f64::from(tree.offspring(v)) >= thr))
}

/// Every `x` in the ball of radius `t` has `Z(x) <= z_t - 1`.
pub fn indicator_m(tree: &RootedTree, params: &EventParams) -> Result<bool> {
    require_depth(tree, params.t)?;
    Ok(ball(tree, params.t).all(|v| f64::from(tree.offspring(v)) <= params.z_t - 1.0))
}

/// Some connected root set `K` with `|K| >= t` has `|∂K|/|K| <= h`.
///
/// Sets are restricted to the materialized vertices; sizes run up to the
/// whole tree.
pub fn indicator_d(tree: &RootedTree, t: u32, h: f64) -> Result<bool> {
    require_depth(tree, t)?;
    let sums = min_degree_sums(tree, tree.len());
    Ok(sums.iter().enumerate().skip((t as usize).max(1)).any(|(k, s)| {
        s.is_some_and(|s| {
            let boundary = (s - 2 * (k as u64 - 1)) as f64;
            boundary <= h * k as f64
        })
    }))
}
