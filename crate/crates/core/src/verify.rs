//! Oracle equivalences and invariant batteries over reproducible corpora.
//!
//! Each check returns `Ok(summary)` or `Err(message)`; messages name the
//! failing invariant together with the corpus seed and sample index.

use rand::Rng;
use serde_json::json;

use crate::anneal::{annealed_return, fit_decay, schedule_values, ExperimentConfig, ZSchedule};
use crate::corpus::{gw_trees, ocean_instances, small_trees, InstanceFilter, OceanInstance};
use crate::dist::OffspringDistribution;
use crate::io::write_returns_csv;
use crate::isolation::{decompose_islands, delta_q_mask, is_core_bruteforce, union_of_cores_bruteforce};
use crate::lumped::LumpedTree;
use crate::ocean::{build_ocean_weights, check_ocean_graph, hitting_equivalence};
use crate::rational::{to_f64, Rational};
use crate::regularise::regularise_mapped;
use crate::rng::{self, domain};
use crate::series::{ReturnSeries, SeriesEntry};
use crate::spectral::{
    embed_vector, heat_kernel_series, isoperimetric_bruteforce, operator_norm, operator_norm_dense, restrict_vector,
    weighted_inner,
};

pub type CheckResult = std::result::Result<String, String>;

/// The isolation values of the island corpus.
pub fn standard_qs() -> Vec<Rational> {
    vec![Rational::new(1, 4), Rational::new(1, 3), Rational::new(1, 2), Rational::new(2, 3), Rational::new(3, 4)]
}

/// `decompose_islands` equals the union of all q-isolated cores found by
/// subset enumeration.
pub fn check_island_oracle(count: usize, max_n: usize, seed: u64, qs: &[Rational]) -> CheckResult {
    let mut with_islands = 0;
    for (i, t) in small_trees(count, max_n, seed).iter().enumerate() {
        for &q in qs {
            let d = decompose_islands(t, q).map_err(|e| e.to_string())?;
            let oracle = union_of_cores_bruteforce(t, q).map_err(|e| e.to_string())?;
            if d.union_mask() != oracle {
                return Err(format!("island oracle mismatch: corpus seed {seed:#x}, tree {i}, q = {q}"));
            }
            with_islands += usize::from(!d.islands().is_empty());
        }
    }
    Ok(format!("{} trees x {} values of q, {with_islands} decompositions with islands", count, qs.len()))
}

fn random_mask<R: Rng>(r: &mut R, n: usize) -> Vec<bool> {
    (0..n).map(|_| r.random::<bool>()).collect()
}

/// Additivity, the island bound with its equality case, unions of islands
/// being cores, nesting in `q`, and sinking of small island unions.
pub fn check_lemma_battery(count: usize, max_n: usize, seed: u64, qs: &[Rational]) -> CheckResult {
    let mut sorted = qs.to_vec();
    sorted.sort();
    let mut checks = 0u64;
    for (i, t) in small_trees(count, max_n, seed).iter().enumerate() {
        let fail = |what: &str, q: Rational| format!("{what}: corpus seed {seed:#x}, tree {i}, q = {q}");
        let n = t.len();
        let mut r = rng::stream_for(&[seed, domain::CORPUS, i as u64, 0xB]);
        let decomps: Vec<_> = sorted.iter().map(|&q| decompose_islands(t, q).expect("q is positive")).collect();
        for (qi, (&q, d)) in sorted.iter().zip(&decomps).enumerate() {
            for _ in 0..4 {
                let b = random_mask(&mut r, n);
                let c: Vec<bool> = random_mask(&mut r, n).iter().zip(&b).map(|(&x, &y)| x && !y).collect();
                let bc: Vec<bool> = (0..n).map(|v| b[v] || c[v]).collect();
                let shared = (1..n)
                    .filter(|&v| {
                        let p = t.parent(v).expect("non-root");
                        (b[v] && c[p]) || (c[v] && b[p])
                    })
                    .count() as i64;
                if delta_q_mask(t, &bc, q) != delta_q_mask(t, &b, q) + delta_q_mask(t, &c, q) + 2 * shared {
                    return Err(fail("additivity of disjoint sets", q));
                }
                for island in d.islands() {
                    let mut with = b.clone();
                    island.vertices.iter().for_each(|&v| with[v] = true);
                    let (before, after) = (delta_q_mask(t, &b, q), delta_q_mask(t, &with, q));
                    let contained = island.vertices.iter().all(|&v| b[v]);
                    if before > after || (before == after) != contained {
                        return Err(fail("adding an island never lowers delta, equality iff contained", q));
                    }
                }
                checks += 1;
            }
            let pick: u64 = r.random();
            let chosen: Vec<usize> = d
                .islands()
                .iter()
                .enumerate()
                .filter(|(k, _)| pick & (1 << (k % 64)) != 0)
                .flat_map(|(_, isl)| isl.vertices.iter().copied())
                .collect();
            if !is_core_bruteforce(t, &chosen, q).map_err(|e| e.to_string())? {
                return Err(fail("a union of islands is a core", q));
            }
            for (lo_q, lo) in sorted[..qi].iter().zip(&decomps) {
                let (small, big) = (lo.union_mask(), d.union_mask());
                if (0..n).any(|v| small[v] && !big[v]) {
                    return Err(fail(&format!("islands at q' = {lo_q} lie inside the islands"), q));
                }
                let has_frontier = t.frontiers().iter().any(|&f| f > 0);
                if has_frontier
                    && Rational::from_integer(chosen.len() as i64) * lo_q <= Rational::from_integer(1)
                    && chosen.iter().any(|&v| !lo.is_ocean(v))
                {
                    return Err(fail(&format!("island unions of size <= 1/q' sink at q' = {lo_q}"), q));
                }
            }
        }
    }
    Ok(format!("{checks} random set pairs on {count} trees"))
}

/// In-regime instances: sampled trees whose islands stay clear of the frontier.
pub fn ocean_corpus(count: usize, max_vertices: usize, seed: u64) -> Vec<OceanInstance> {
    let dist = OffspringDistribution::parse("0:1/5,2:4/5").expect("valid law");
    let qs = [Rational::new(1, 10), Rational::new(1, 5), Rational::new(1, 3), Rational::new(1, 2), Rational::new(2, 3)];
    let filter = InstanceFilter { caps: (5, 7), max_vertices, require_island: true };
    ocean_instances(&dist, &qs, &filter, count, seed)
}

/// Symmetry, conservation, edge domination and diagonal positivity of `w_q`.
pub fn check_ocean_identities(count: usize, seed: u64, tol: f64) -> CheckResult {
    let insts = ocean_corpus(count, 400, seed);
    if insts.len() < count {
        return Err(format!("only {} of {count} ocean instances found for seed {seed:#x}", insts.len()));
    }
    let mut worst: f64 = 0.0;
    for inst in &insts {
        let w = build_ocean_weights(&inst.tree, &inst.decomp).map_err(|e| e.to_string())?;
        let rep = check_ocean_graph(&inst.tree, &inst.decomp, &w, tol);
        if !rep.holds(tol) {
            return Err(format!("ocean identities: seed {seed:#x}, sample {}: {rep:?}", inst.sample_index));
        }
        worst = worst.max(rep.max_asymmetry).max(rep.max_conservation_error);
    }
    Ok(format!("{count} instances, worst asymmetry/conservation error {worst:.2e}"))
}

/// The walk on `T` and the induced ocean chain hit ocean targets with the
/// same probabilities.
pub fn check_hitting_equivalence(count: usize, seed: u64, tol: f64) -> CheckResult {
    let insts = ocean_corpus(count, 60, seed);
    if insts.len() < count {
        return Err(format!("only {} of {count} ocean instances found for seed {seed:#x}", insts.len()));
    }
    let mut worst: f64 = 0.0;
    for inst in &insts {
        let w = build_ocean_weights(&inst.tree, &inst.decomp).map_err(|e| e.to_string())?;
        let ocean = w.vertices();
        let pairs = [(ocean[0], ocean[ocean.len() - 1]), (ocean[ocean.len() / 2], ocean[0]), (ocean[ocean.len() - 1], ocean[ocean.len() / 3])];
        for (x, y) in pairs {
            let (a, b) = hitting_equivalence(&inst.tree, &inst.decomp, &w, x, y).map_err(|e| e.to_string())?;
            if (a - b).abs() > tol {
                return Err(format!(
                    "hitting equivalence: seed {seed:#x}, sample {}, x = {x}, y = {y}: {a} vs {b}",
                    inst.sample_index
                ));
            }
            worst = worst.max((a - b).abs());
        }
    }
    Ok(format!("{count} instances, worst discrepancy {worst:.2e}"))
}

/// Isoperimetric ratio at least `q/(q+2)` and operator norm at most
/// `√(1-(q/(q+2))²)` for `q = 2h/3`, plus restriction/embedding adjointness.
pub fn check_spectral_sandwich(hs: &[Rational], per_h: usize, seed: u64) -> CheckResult {
    let dist = OffspringDistribution::parse("0:1/3,2:1/3,3:1/3").expect("valid law");
    let mut count = 0;
    let mut margin = f64::INFINITY;
    for &h in hs {
        let q = h * Rational::new(2, 3);
        let filter = InstanceFilter { caps: (4, 8), max_vertices: 32, require_island: true };
        let insts = ocean_instances(&dist, &[q], &filter, per_h, seed);
        if insts.len() < per_h {
            return Err(format!("only {} of {per_h} instances for h = {h}, seed {seed:#x}", insts.len()));
        }
        let c = to_f64(&q) / (to_f64(&q) + 2.0);
        let norm_bound = (1.0 - c * c).sqrt();
        for inst in insts {
            let fail = |what: String| format!("{what}: h = {h}, seed {seed:#x}, sample {}", inst.sample_index);
            let w = build_ocean_weights(&inst.tree, &inst.decomp).map_err(|e| e.to_string())?;
            let iso = isoperimetric_bruteforce(&w, w.len()).map_err(|e| fail(e.to_string()))?;
            if iso.ratio < c - 1e-12 {
                return Err(fail(format!("isoperimetric ratio {} below {c}", iso.ratio)));
            }
            let est = operator_norm(&w, 10_000, 1e-10).map_err(|e| fail(e.to_string()))?;
            let dense = operator_norm_dense(&w);
            if (est.value - dense).abs() > 1e-6 {
                return Err(fail(format!("power iteration {} disagrees with eigendecomposition {dense}", est.value)));
            }
            let norm = est.value.max(dense);
            if norm > norm_bound + 1e-9 {
                return Err(fail(format!("operator norm {norm} above {norm_bound}")));
            }
            margin = margin.min(iso.ratio - c).min(norm_bound - norm);
            let mut r = rng::stream_for(&[seed, domain::CORPUS, inst.sample_index, 0xAD]);
            let wq: Vec<f64> = (0..w.len()).map(|i| w.vertex_weight(i)).collect();
            let deg: Vec<f64> = (0..inst.tree.len()).map(|v| f64::from(inst.tree.degree(v))).collect();
            for _ in 0..5 {
                let u: Vec<f64> = (0..inst.tree.len()).map(|_| r.random_range(-1.0..1.0)).collect();
                let v: Vec<f64> = (0..w.len()).map(|_| r.random_range(-1.0..1.0)).collect();
                let ev = embed_vector(&v, &inst.decomp).map_err(|e| e.to_string())?;
                let ru = restrict_vector(&u, &inst.decomp).map_err(|e| e.to_string())?;
                if (weighted_inner(&ru, &v, &wq) - weighted_inner(&u, &ev, &deg)).abs() > 1e-12
                    || restrict_vector(&ev, &inst.decomp).map_err(|e| e.to_string())? != v
                {
                    return Err(fail("restriction and embedding are not adjoint".into()));
                }
            }
            count += 1;
        }
    }
    Ok(format!("{count} instances, smallest margin {margin:.3e}"))
}

/// Mass conservation, parity, deepening invariance and `P[X_2 = o] = 1/3`
/// for the binary tree, plus deepening invariance on sampled trees.
pub fn check_heat_kernel(steps: u32) -> CheckResult {
    let lt = LumpedTree::regular(2, steps + 1);
    let hk = lt.heat_kernel(0, steps).map_err(|e| e.to_string())?;
    if hk.max_drift > 1e-12 {
        return Err(format!("mass drift {:.3e} on the binary tree", hk.max_drift));
    }
    if let Some(s) = (1..hk.values.len()).step_by(2).find(|&s| hk.values[s] != 0.0) {
        return Err(format!("odd-time return {} at s = {s}", hk.values[s]));
    }
    if (hk.values[2] - 1.0 / 3.0).abs() > 1e-15 {
        return Err(format!("P[X_2 = o] = {} on the binary tree", hk.values[2]));
    }
    let deeper = LumpedTree::regular(2, steps + 4).heat_kernel(0, steps).map_err(|e| e.to_string())?;
    if deeper.values != hk.values {
        return Err("binary series changes when the tree is deepened".into());
    }
    let dist = OffspringDistribution::parse("0:1/5,2:4/5").expect("valid law");
    for (i, t) in gw_trees(&dist, 12, 20, 0x4EA7).iter().enumerate() {
        let shallow = t.truncate(9).map_err(|e| e.to_string())?;
        let a = heat_kernel_series(&shallow, 0, 9).map_err(|e| e.to_string())?;
        let b = heat_kernel_series(t, 0, 9).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("sampled series changes when deepened: seed 0x4ea7, sample {i}"));
        }
        a.validate().map_err(|e| format!("series invariant, seed 0x4ea7, sample {i}: {e}"))?;
    }
    Ok(format!("{steps} steps, max drift {:.2e}", hk.max_drift))
}

/// At the regularisation parameter the islands of `T^q` are the near-root
/// islands of `T`.
pub fn check_regularisation(count: usize, seed: u64) -> CheckResult {
    let dist = OffspringDistribution::parse("0:1/5,1:1/5,2:2/5,4:1/5").expect("valid law");
    let q = Rational::new(1, 2);
    let step = 2;
    let mut used = 0;
    for (i, t) in gw_trees(&dist, 8, count, seed).iter().enumerate() {
        let d = decompose_islands(t, q).expect("q is positive");
        let near: Vec<&crate::isolation::Island> =
            d.islands().iter().filter(|isl| isl.vertices.iter().any(|&v| t.depth(v) <= step)).collect();
        let reach = near.iter().flat_map(|isl| isl.vertices.iter().map(|&v| t.depth(v))).max().unwrap_or(0);
        let Ok(reg) = regularise_mapped(t, step, 5, &d, (step + 3).max(reach + 1)) else { continue };
        let got_d = decompose_islands(&reg.tree, q).expect("q is positive");
        let mut got: Vec<Vec<usize>> = got_d
            .islands()
            .iter()
            .map(|isl| {
                let mut v: Vec<usize> = isl.vertices.iter().filter_map(|&v| reg.origin[v]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let mut expected: Vec<Vec<usize>> = near.iter().map(|isl| isl.vertices.clone()).collect();
        got.sort();
        expected.sort();
        if got != expected {
            return Err(format!("regularised islands differ: seed {seed:#x}, sample {i}"));
        }
        used += 1;
    }
    if used == 0 {
        return Err(format!("no usable regularisation instance for seed {seed:#x}"));
    }
    Ok(format!("{used} regularised trees"))
}

/// Fits on constructed series and the schedule arithmetic.
pub fn check_fits_and_schedules() -> CheckResult {
    let synth = |f: &dyn Fn(f64) -> f64| {
        let mut entries = Vec::new();
        for s in 0..=400u32 {
            let value = if s % 2 == 1 { 0.0 } else { f(f64::from(s / 2)) };
            entries.push(SeriesEntry { s, value, stderr: 0.0, n: 1 });
        }
        ReturnSeries { entries }
    };
    let a = fit_decay(&synth(&|t| (-0.2 * t).exp()), 1, 200).map_err(|e| e.to_string())?;
    if (a.beta_hat - 1.0).abs() > 1e-9 || (a.c_hat - 0.2).abs() > 1e-9 {
        return Err(format!("exponential fit gave {a:?}"));
    }
    let b = fit_decay(&synth(&|t| (-0.7 * t.cbrt()).exp()), 1, 200).map_err(|e| e.to_string())?;
    if (b.beta_hat - 1.0 / 3.0).abs() > 1e-9 || (b.c_hat - 0.7).abs() > 1e-9 {
        return Err(format!("stretched fit gave {b:?}"));
    }
    if fit_decay(&synth(&|_| 0.5), 1, 200).is_ok() {
        return Err("constant series was fitted".into());
    }
    let s1 = schedule_values(1, 0.3, &ZSchedule::Fixed { z: 3.0 }).map_err(|e| e.to_string())?;
    let q1 = 0.3 / (2.0 * 2f64.sqrt() * 3f64.cbrt());
    if (s1.q_t - q1).abs() > 1e-15 || (s1.bound - (-(0.09 / 144.0) * (1.0f64 / 9.0).cbrt()).exp()).abs() > 1e-15 {
        return Err(format!("schedule at t = 1 gave {s1:?}"));
    }
    let z = ZSchedule::Power { c3: 8.0, k: 3.0 };
    let mut last = f64::INFINITY;
    for t in 1..=1000 {
        let s = schedule_values(t, 0.3, &z).map_err(|e| e.to_string())?;
        if !(s.q_t < last && s.bound > 0.0 && s.bound < 1.0) {
            return Err(format!("schedule not monotone or bound outside (0,1) at t = {t}"));
        }
        last = s.q_t;
    }
    Ok("synthetic fits exact, schedules monotone".into())
}

/// A small annealed run gives identical CSV bytes on one and several workers.
pub fn check_anneal_determinism(seed: u64) -> CheckResult {
    let cfg = ExperimentConfig { t_max: 12, n_trees: 200, master_seed: seed, ..Default::default() };
    let header = json!({"check": "determinism", "seed": seed});
    let mut outputs = Vec::new();
    for workers in [1, 3] {
        let series = annealed_return(&cfg, workers).map_err(|e| e.to_string())?;
        series.validate().map_err(|e| format!("series invariant, seed {seed}: {e}"))?;
        outputs.push(write_returns_csv(&series, &header));
    }
    let walks = ExperimentConfig { estimator: crate::anneal::Estimator::Walks, ..cfg };
    for workers in [1, 3] {
        outputs.push(write_returns_csv(&annealed_return(&walks, workers).map_err(|e| e.to_string())?, &header));
    }
    if outputs[0] != outputs[1] || outputs[2] != outputs[3] {
        return Err(format!("annealed output depends on the worker count, seed {seed}"));
    }
    Ok("identical output on 1 and 3 workers".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corpus {
    Small,
    Full,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub result: CheckResult,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.result.is_ok())
    }
}

/// Runs every check. `Small` finishes in seconds, `Full` uses the sizes of
/// the acceptance suite.
pub fn run(corpus: Corpus, seed: u64) -> VerifyReport {
    let (trees, oceans, hits, per_h) = match corpus {
        Corpus::Small => (60, 30, 15, 5),
        Corpus::Full => (200, 100, 50, 15),
    };
    let qs = standard_qs();
    let hs = [Rational::new(3, 20), Rational::new(3, 10)];
    let mut checks = Vec::new();
    let mut add = |name: &'static str, result: CheckResult| checks.push(CheckOutcome { name, result });
    add("island-oracle", check_island_oracle(trees, 14, seed, &qs));
    add("lemma-battery", check_lemma_battery(trees, 14, seed, &qs));
    add("ocean-identities", check_ocean_identities(oceans, seed ^ 0x0CEA, 1e-10));
    add("hitting-equivalence", check_hitting_equivalence(hits, seed ^ 0x0CEA, 1e-8));
    add("spectral-sandwich", check_spectral_sandwich(&hs, per_h, seed ^ 0x5EC7));
    add("heat-kernel", check_heat_kernel(1000));
    add("regularisation", check_regularisation(300, seed ^ 0x2E6));
    add("fits-and-schedules", check_fits_and_schedules());
    add("anneal-determinism", check_anneal_determinism(seed));
    VerifyReport { checks }
}
