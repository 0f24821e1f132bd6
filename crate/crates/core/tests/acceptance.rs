//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero when a criterion outside `KNOWN_RED` fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gwhk_core::anneal::{annealed_return, fit_decay, mean_and_stderr, truncated_sizes, Estimator, ExperimentConfig};
use gwhk_core::io::write_returns_csv;
use gwhk_core::verify::{
    check_heat_kernel, check_hitting_equivalence, check_island_oracle, check_lemma_battery, check_ocean_identities,
    check_spectral_sandwich, standard_qs,
};
use gwhk_core::{OffspringDistribution, Rational};

const SEED: u64 = 0xACCE;

/// Criteria that cannot be met as stated; the notes in the README explain why.
const KNOWN_RED: &[u32] = &[8];

struct Outcome {
    id: u32,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn timed(id: u32, limit: Option<Duration>, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail.push_str(&format!("; took {elapsed:.1?}, limit {limit:?}"));
        }
    }
    Outcome { id, passed, detail, elapsed }
}

fn sizes_text(workers: usize) -> Result<(String, Vec<f64>), String> {
    let dist = OffspringDistribution::parse("0:1/5,2:4/5").map_err(|e| e.to_string())?;
    let sizes = truncated_sizes(&dist, 6, 10_000, SEED, workers).map_err(|e| e.to_string())?;
    let text: String = sizes.iter().map(|s| format!("{s}\n")).collect();
    Ok((text, sizes.iter().map(|&s| s as f64).collect()))
}

fn regime_a(workers: usize) -> Result<String, String> {
    let cfg = ExperimentConfig {
        dist: "2:1".into(),
        t_max: 400,
        n_trees: 1,
        master_seed: SEED,
        estimator: Estimator::Exact,
        ..Default::default()
    };
    let series = annealed_return(&cfg, workers).map_err(|e| e.to_string())?;
    Ok(write_returns_csv(&series, &serde_json::to_value(&cfg).unwrap()))
}

fn regime_b(workers: usize) -> Result<String, String> {
    let cfg = ExperimentConfig {
        dist: "0:1/5,2:4/5".into(),
        t_max: 256,
        n_trees: 10_000,
        master_seed: SEED,
        estimator: Estimator::Walks,
        ..Default::default()
    };
    let series = annealed_return(&cfg, workers).map_err(|e| e.to_string())?;
    Ok(write_returns_csv(&series, &serde_json::to_value(&cfg).unwrap()))
}

fn beta_in(csv: &str, window: (u32, u32), range: (f64, f64)) -> Result<String, String> {
    let (_, series) = gwhk_core::io::read_returns_csv(csv).map_err(|e| e.to_string())?;
    series.validate().map_err(|e| e.to_string())?;
    let fit = fit_decay(&series, window.0, window.1).map_err(|e| e.to_string())?;
    let msg = format!(
        "beta_hat {:.4} (c_hat {:.4}, r2 {:.4}) over t in [{}, {}], target [{}, {}]",
        fit.beta_hat, fit.c_hat, fit.r_squared, window.0, window.1, range.0, range.1
    );
    if (range.0..=range.1).contains(&fit.beta_hat) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let qs = standard_qs();
    let mut out = Vec::new();
    let mut report = |o: Outcome| {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        let note = if !o.passed && KNOWN_RED.contains(&o.id) { " (known)" } else { "" };
        println!("criterion {:>2}: {verdict}{note} [{:.1?}] {}", o.id, o.elapsed, o.detail);
        out.push(o);
    };

    report(timed(1, Some(Duration::from_secs(60)), || check_island_oracle(200, 14, SEED, &qs)));
    report(timed(2, None, || check_lemma_battery(200, 14, SEED, &qs)));
    report(timed(3, None, || check_ocean_identities(100, SEED, 1e-10)));
    report(timed(4, None, || check_hitting_equivalence(50, SEED, 1e-8)));
    report(timed(5, None, || check_spectral_sandwich(&[Rational::new(3, 20), Rational::new(3, 10)], 15, SEED)));
    report(timed(6, None, || check_heat_kernel(1000)));

    let mut sizes_1 = String::new();
    report(timed(7, Some(Duration::from_secs(30)), || {
        let (text, sizes) = sizes_text(1)?;
        sizes_1 = text;
        let (mean, se) = mean_and_stderr(&sizes);
        let expected: f64 = (0..=6).map(|k| 1.6f64.powi(k)).sum();
        let msg = format!("mean {mean:.4} +- {se:.4}, expected {expected:.6}, off by {:.2} se", (mean - expected) / se);
        if (mean - expected).abs() <= 3.0 * se {
            Ok(msg)
        } else {
            Err(msg)
        }
    }));

    let mut a_1 = String::new();
    report(timed(8, Some(Duration::from_secs(120)), || {
        a_1 = regime_a(1)?;
        beta_in(&a_1, (50, 400), (0.9, 1.1))
    }));

    let mut b_1 = String::new();
    report(timed(9, Some(Duration::from_secs(1800)), || {
        b_1 = regime_b(1)?;
        beta_in(&b_1, (32, 256), (0.25, 0.55))
    }));

    report(timed(10, None, || {
        for workers in [4, 16] {
            if sizes_text(workers)?.0 != sizes_1 {
                return Err(format!("truncated sizes differ on {workers} workers"));
            }
            if regime_a(workers)? != a_1 {
                return Err(format!("regime (a) series differs on {workers} workers"));
            }
            if regime_b(workers)? != b_1 {
                return Err(format!("regime (b) series differs on {workers} workers"));
            }
        }
        Ok("outputs of criteria 7-9 byte-identical on 1, 4 and 16 workers".into())
    }));

    let unexpected: Vec<u32> = out.iter().filter(|o| !o.passed && !KNOWN_RED.contains(&o.id)).map(|o| o.id).collect();
    let passed = out.iter().filter(|o| o.passed).count();
    println!("acceptance: {passed}/{} passed", out.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
