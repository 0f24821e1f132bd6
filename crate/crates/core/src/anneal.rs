//! Annealed return probabilities, decay fits, proof schedules and event
//! frequencies over tree ensembles.
//!
//! Per-sample work runs on a dedicated rayon pool, collected in sample
//! order and reduced by fixed-order pairwise summation, so the output does
//! not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::OffspringDistribution;
use crate::error::{Error, Result};
use crate::isolation::events::{indicator_d, indicator_f, indicator_m, EventParams};
use crate::lumped::LumpedTree;
use crate::rational::{parse_rational, to_f64, Rational};
use crate::rng::{self, domain};
use crate::series::{ReturnSeries, SeriesEntry};
use crate::tree::{sample_tree, TreeSampleSpec};
use crate::walk::{walk_return_fractions, ConditionedLaw, LazyTree};

/// Largest expected conditioned tree size for which `Auto` picks the exact
/// estimator.
pub const AUTO_EXACT_LIMIT: f64 = 2e4;

/// Largest `t` accepted for the event `D_t`.
pub const D_EVENT_MAX_T: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum QMode {
    Fixed { q: String },
    /// `q = 2h/3`.
    Derived,
    /// `q_t = h/(2√2·(t z_t)^(1/3))`.
    Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZSchedule {
    Fixed { z: f64 },
    /// `z_t = 3 + c3·t^(1/k)`.
    Power { c3: f64, k: f64 },
}

impl ZSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ZSchedule::Fixed { z } if !(z >= 3.0 && z.is_finite()) => {
                Err(Error::InvalidParameter(format!("fixed z must be at least 3, got {z}")))
            }
            ZSchedule::Power { c3, .. } if !(c3 > 0.0 && c3.is_finite()) => {
                Err(Error::InvalidParameter(format!("c3 must be positive, got {c3}")))
            }
            ZSchedule::Power { k, .. } if !(k > 2.0 && k.is_finite()) => {
                Err(Error::InvalidParameter(format!("k must exceed 2, got {k}")))
            }
            _ => Ok(()),
        }
    }

    pub fn z(&self, t: u32) -> f64 {
        match *self {
            ZSchedule::Fixed { z } => z,
            ZSchedule::Power { c3, k } => 3.0 + c3 * f64::from(t).powf(1.0 / k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Whole trees to depth `t_max + depth_margin`, lumped and propagated exactly.
    Exact,
    /// `walks_per_tree` simulated walks on a lazily drawn conditioned tree.
    Walks,
    /// `Exact` when the expected conditioned tree is small enough.
    Auto,
}

/// Everything that determines an experiment's output. The worker count is
/// deliberately not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub dist: String,
    /// Largest return index `t`; series run to walk time `2·t_max`.
    pub t_max: u32,
    pub n_trees: u64,
    pub master_seed: u64,
    pub h: String,
    pub q_mode: QMode,
    pub z_schedule: ZSchedule,
    pub depth_margin: u32,
    pub estimator: Estimator,
    pub walks_per_tree: u32,
    pub output: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dist: "0:1/5,2:4/5".into(),
            t_max: 64,
            n_trees: 1000,
            master_seed: 0,
            h: "3/10".into(),
            q_mode: QMode::Derived,
            z_schedule: ZSchedule::Power { c3: 8.0, k: 3.0 },
            depth_margin: 4,
            estimator: Estimator::Auto,
            walks_per_tree: 64,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn distribution(&self) -> Result<OffspringDistribution> {
        OffspringDistribution::parse(&self.dist)
    }

    pub fn h_value(&self) -> Result<Rational> {
        let h = parse_rational(&self.h)?;
        if h <= Rational::from_integer(0) || h >= Rational::from_integer(1) {
            return Err(Error::InvalidParameter(format!("h must lie in (0, 1), got {}", self.h)));
        }
        Ok(h)
    }

    /// The isolation parameter used at return index `t`.
    pub fn q_value(&self, t: u32) -> Result<f64> {
        let h = self.h_value()?;
        match &self.q_mode {
            QMode::Fixed { q } => {
                let q = parse_rational(q)?;
                if q <= Rational::from_integer(0) || q >= Rational::from_integer(1) {
                    return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
                }
                Ok(to_f64(&q))
            }
            QMode::Derived => Ok(to_f64(&(h * Rational::new(2, 3)))),
            QMode::Schedule => Ok(schedule_values(t.max(1), to_f64(&h), &self.z_schedule)?.q_t),
        }
    }

    pub fn validate(&self) -> Result<OffspringDistribution> {
        let dist = self.distribution()?;
        if !dist.is_supercritical() {
            return Err(Error::InvalidDistribution(format!("{} is not supercritical", self.dist)));
        }
        if self.t_max == 0 {
            return Err(Error::InvalidParameter("t_max must be at least 1".into()));
        }
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
        }
        if self.walks_per_tree == 0 {
            return Err(Error::InvalidParameter("walks_per_tree must be at least 1".into()));
        }
        self.h_value()?;
        self.q_value(1)?;
        self.z_schedule.validate()?;
        Ok(dist)
    }

    /// Conditioning depth `t_max + depth_margin`.
    pub fn depth_cap(&self) -> u32 {
        self.t_max + self.depth_margin
    }

    /// The estimator `Auto` resolves to for this configuration.
    pub fn resolved_estimator(&self, dist: &OffspringDistribution) -> Estimator {
        match self.estimator {
            Estimator::Auto => {
                let d = self.depth_cap();
                let survive = dist.survival_to_depth(d as usize);
                if dist.degenerate_value().is_some() || dist.expected_truncated_size(d) / survive <= AUTO_EXACT_LIMIT {
                    Estimator::Exact
                } else {
                    Estimator::Walks
                }
            }
            e => e,
        }
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))
}

/// Sum in a fixed binary-tree order, independent of how values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Mean and standard error (`sd/√n`) with pairwise sums.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-tree series of sample `index` (walk times `0..=2·t_max`).
pub fn per_tree_series(
    config: &ExperimentConfig,
    dist: &OffspringDistribution,
    estimator: Estimator,
    law: Option<&ConditionedLaw>,
    index: u64,
) -> Result<Vec<f64>> {
    let s_max = 2 * config.t_max;
    match estimator {
        Estimator::Walks => {
            let law = law.expect("walk estimator needs a conditioned law");
            let mut tree = LazyTree::new(law, rng::key(&[config.master_seed, domain::LAZY_TREE, index]));
            Ok(walk_return_fractions(&mut tree, s_max, config.walks_per_tree, config.master_seed, index))
        }
        _ => {
            let lumped = match dist.degenerate_value() {
                Some(j) => LumpedTree::regular(j, config.depth_cap()),
                None => LumpedTree::compress(&sample_tree(&TreeSampleSpec {
                    dist: dist.clone(),
                    depth_cap: config.depth_cap(),
                    survival_required: true,
                    master_seed: config.master_seed,
                    sample_index: index,
                })?),
            };
            lumped.return_series(s_max)
        }
    }
}

/// Output of an annealed run.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealRun {
    pub series: ReturnSeries,
    pub estimator: Estimator,
    /// `(t, bound_t, fraction of trees whose estimate exceeds bound_t)` for
    /// `t = 1..=t_max`; a diagnostic only.
    pub bound_violations: Vec<(u32, f64, f64)>,
}

/// Annealed `P[X_s = o]` for `s = 0..=2·t_max` over `n_trees` survival
/// conditioned trees.
pub fn annealed_return(config: &ExperimentConfig, workers: usize) -> Result<ReturnSeries> {
    Ok(annealed_run(config, workers)?.series)
}

pub fn annealed_run(config: &ExperimentConfig, workers: usize) -> Result<AnnealRun> {
    let dist = config.validate()?;
    let estimator = config.resolved_estimator(&dist);
    let s_len = 2 * config.t_max as usize + 1;
    let degenerate = dist.degenerate_value().is_some() && estimator == Estimator::Exact;
    let rows: Vec<Vec<f64>> = if degenerate {
        // every sample is the same tree
        vec![per_tree_series(config, &dist, estimator, None, 0)?]
    } else {
        let law = match estimator {
            Estimator::Walks => Some(ConditionedLaw::new(&dist, config.depth_cap())?),
            _ => None,
        };
        thread_pool(workers)?.install(|| {
            (0..config.n_trees)
                .into_par_iter()
                .map(|i| per_tree_series(config, &dist, estimator, law.as_ref(), i))
                .collect::<Result<Vec<_>>>()
        })?
    };
    let h = to_f64(&config.h_value()?);
    let mut entries = Vec::with_capacity(s_len);
    let mut column = vec![0.0; rows.len()];
    for s in 0..s_len {
        for (c, row) in column.iter_mut().zip(&rows) {
            *c = row[s];
        }
        let (value, stderr) = mean_and_stderr(&column);
        entries.push(SeriesEntry { s: s as u32, value, stderr, n: config.n_trees });
    }
    let mut bound_violations = Vec::with_capacity(config.t_max as usize);
    for t in 1..=config.t_max {
        let bound = schedule_values(t, h, &config.z_schedule)?.bound;
        let over = rows.iter().filter(|r| r[2 * t as usize] > bound).count();
        bound_violations.push((t, bound, over as f64 / rows.len() as f64));
    }
    Ok(AnnealRun { series: ReturnSeries { entries }, estimator, bound_violations })
}

/// Sizes `|T_ot|` of `n` unconditioned samples truncated at depth `t`, in
/// sample order.
pub fn truncated_sizes(dist: &OffspringDistribution, t: u32, n: u64, seed: u64, workers: usize) -> Result<Vec<u64>> {
    thread_pool(workers)?.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                sample_tree(&TreeSampleSpec {
                    dist: dist.clone(),
                    depth_cap: t,
                    survival_required: false,
                    master_seed: seed,
                    sample_index: i,
                })
                .map(|tree| tree.len() as u64)
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub c_hat: f64,
    pub beta_hat: f64,
    pub r_squared: f64,
    pub window: (u32, u32),
    pub points: usize,
}

/// Least-squares fit of `log(-log R_t) = log c + β log t` over the even
/// entries of `series` with return index `t ∈ [t_lo, t_hi]`.
///
/// Zero entries carry no information and are skipped; a value of 1 or more
/// at `t ≥ 1` is an error.
pub fn fit_decay(series: &ReturnSeries, t_lo: u32, t_hi: u32) -> Result<FitResult> {
    if t_lo > t_hi {
        return Err(Error::DegenerateWindow(format!("empty window [{t_lo}, {t_hi}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, e) in series.by_return_index() {
        if t < t_lo.max(1) || t > t_hi {
            continue;
        }
        if !(e.value < 1.0) {
            return Err(Error::DegenerateWindow(format!("value {} at t = {t} is not below 1", e.value)));
        }
        if e.value <= 0.0 {
            continue;
        }
        xs.push(f64::from(t).ln());
        ys.push((-e.value.ln()).ln());
    }
    if xs.len() < 5 {
        return Err(Error::DegenerateWindow(format!("{} usable points in [{t_lo}, {t_hi}], need 5", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 || syy <= f64::EPSILON * my.abs().max(1.0) * n {
        return Err(Error::DegenerateWindow("zero variance in the fitted values".into()));
    }
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    Ok(FitResult {
        c_hat: intercept.exp(),
        beta_hat: beta,
        r_squared: sxy * sxy / (sxx * syy),
        window: (t_lo, t_hi),
        points: xs.len(),
    })
}

/// Largest window `[1, t]` of return indices on which every value exceeds
/// ten standard errors.
pub fn default_window(series: &ReturnSeries) -> Option<(u32, u32)> {
    let mut hi = None;
    for (t, e) in series.by_return_index().into_iter().skip(1) {
        if e.value > 10.0 * e.stderr && e.value > 0.0 && e.value < 1.0 {
            hi = Some(t);
        } else {
            break;
        }
    }
    hi.map(|h| (1, h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub z_t: f64,
    pub q_t: f64,
    /// `exp(-(h²/144)·(t/z_t²)^(1/3))`.
    pub bound: f64,
}

pub fn schedule_values(t: u32, h: f64, z: &ZSchedule) -> Result<Schedule> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!("h must lie in (0, 1), got {h}")));
    }
    z.validate()?;
    let tf = f64::from(t);
    let z_t = z.z(t);
    let q_t = h / (2.0 * std::f64::consts::SQRT_2 * (tf * z_t).cbrt());
    if q_t >= 2.0 * h / 3.0 {
        return Err(Error::InvalidParameter(format!("q_t = {q_t} is not below 2h/3")));
    }
    let bound = (-(h * h / 144.0) * (tf / (z_t * z_t)).cbrt()).exp();
    Ok(Schedule { z_t, q_t, bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    F,
    M,
    D,
}

impl std::str::FromStr for Event {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" | "f" => Ok(Event::F),
            "M" | "m" => Ok(Event::M),
            "D" | "d" => Ok(Event::D),
            _ => Err(Error::InvalidParameter(format!("unknown event {s:?}, expected F, M or D"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRow {
    pub t: u32,
    pub freq: f64,
    pub stderr: f64,
    pub n: u64,
}

/// Frequency of `event` at each `t` of `ts` over `n_trees` trees conditioned
/// to reach depth `max(ts)`.
pub fn event_frequencies(config: &ExperimentConfig, event: Event, ts: &[u32], workers: usize) -> Result<Vec<EventRow>> {
    let dist = config.validate()?;
    let Some(&cap) = ts.iter().max() else {
        return Ok(Vec::new());
    };
    if ts.contains(&0) {
        return Err(Error::InvalidParameter("event times must be positive".into()));
    }
    if event == Event::D && cap > D_EVENT_MAX_T {
        return Err(Error::InvalidParameter(format!("D_t is limited to t <= {D_EVENT_MAX_T}")));
    }
    let (c3, k) = match config.z_schedule {
        ZSchedule::Power { c3, k } => (c3, k),
        ZSchedule::Fixed { .. } => (1.0, 3.0),
    };
    if event == Event::F && !matches!(config.z_schedule, ZSchedule::Power { .. }) {
        return Err(Error::InvalidParameter("the event F needs a power z schedule for c3 and k".into()));
    }
    let params: Vec<EventParams> =
        ts.iter().map(|&t| EventParams::new(t, config.z_schedule.z(t), c3, k)).collect::<Result<_>>()?;
    let h = to_f64(&config.h_value()?);
    let rows: Vec<Vec<f64>> = thread_pool(workers)?.install(|| {
        (0..config.n_trees)
            .into_par_iter()
            .map(|i| {
                let tree = sample_tree(&TreeSampleSpec {
                    dist: dist.clone(),
                    depth_cap: cap,
                    survival_required: true,
                    master_seed: config.master_seed,
                    sample_index: i,
                })?;
                params
                    .iter()
                    .map(|p| {
                        let hit = match event {
                            Event::F => indicator_f(&tree, p)?,
                            Event::M => indicator_m(&tree, p)?,
                            Event::D => indicator_d(&tree, p.t, h)?,
                        };
                        Ok(if hit { 1.0 } else { 0.0 })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut column = vec![0.0; rows.len()];
    Ok(ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            for (c, row) in column.iter_mut().zip(&rows) {
                *c = row[j];
            }
            let (freq, stderr) = mean_and_stderr(&column);
            EventRow { t, freq, stderr, n: config.n_trees }
        })
        .collect())
}
