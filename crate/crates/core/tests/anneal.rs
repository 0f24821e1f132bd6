use gwhk_core::anneal::{
    annealed_return, annealed_run, default_window, event_frequencies, fit_decay, schedule_values, Estimator, Event,
    ExperimentConfig, ZSchedule,
};
use gwhk_core::{Error, ReturnSeries, SeriesEntry};
use proptest::prelude::*;

fn synthetic(f: impl Fn(f64) -> f64, t_max: u32) -> ReturnSeries {
    ReturnSeries {
        entries: (0..=2 * t_max)
            .map(|s| SeriesEntry { s, value: if s % 2 == 1 { 0.0 } else { f(f64::from(s / 2)) }, stderr: 0.0, n: 1 })
            .collect(),
    }
}

#[test]
fn deterministic_binary_ensemble() {
    let cfg = ExperimentConfig { dist: "2:1".into(), t_max: 20, n_trees: 50, ..Default::default() };
    let run = annealed_run(&cfg, 2).unwrap();
    assert_eq!(run.estimator, Estimator::Exact);
    let s = run.series;
    s.validate().unwrap();
    assert_eq!(s.value(0), Some(1.0));
    assert!((s.value(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!(s.entries.iter().all(|e| e.stderr == 0.0 && e.n == 50));
    let single = gwhk_core::lumped::LumpedTree::regular(2, 24).return_series(40).unwrap();
    assert_eq!(s.entries.iter().map(|e| e.value).collect::<Vec<_>>(), single);
}

#[test]
fn walk_and_exact_estimators_agree() {
    let base = ExperimentConfig { t_max: 6, n_trees: 3000, master_seed: 11, ..Default::default() };
    let exact = annealed_return(&ExperimentConfig { estimator: Estimator::Exact, ..base.clone() }, 1).unwrap();
    let walks = annealed_return(&ExperimentConfig { estimator: Estimator::Walks, ..base }, 1).unwrap();
    for (a, b) in exact.entries.iter().zip(&walks.entries) {
        let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        assert!((a.value - b.value).abs() <= 4.0 * se + 1e-12, "s = {}: {} vs {}", a.s, a.value, b.value);
    }
    exact.validate().unwrap();
    walks.validate().unwrap();
}

#[test]
fn output_does_not_depend_on_workers() {
    for estimator in [Estimator::Exact, Estimator::Walks] {
        let cfg = ExperimentConfig { t_max: 10, n_trees: 300, master_seed: 3, estimator, ..Default::default() };
        let one = annealed_run(&cfg, 1).unwrap();
        for workers in [2, 5] {
            assert_eq!(annealed_run(&cfg, workers).unwrap(), one);
        }
        assert!(one.bound_violations.iter().all(|&(_, b, f)| b > 0.0 && b < 1.0 && (0.0..=1.0).contains(&f)));
    }
}

#[test]
fn fits_recover_constructed_exponents() {
    let a = fit_decay(&synthetic(|t| (-0.2 * t).exp(), 100), 1, 100).unwrap();
    assert!((a.beta_hat - 1.0).abs() < 1e-9 && (a.c_hat - 0.2).abs() < 1e-9);
    assert!((a.r_squared - 1.0).abs() < 1e-12);
    let b = fit_decay(&synthetic(|t| (-0.7 * t.cbrt()).exp(), 100), 4, 90).unwrap();
    assert!((b.beta_hat - 1.0 / 3.0).abs() < 1e-9 && (b.c_hat - 0.7).abs() < 1e-9);
    assert_eq!(b.window, (4, 90));
    assert_eq!(b.points, 87);
}

#[test]
fn degenerate_fits_are_rejected() {
    assert!(matches!(fit_decay(&synthetic(|_| 0.5, 50), 1, 50), Err(Error::DegenerateWindow(_))));
    assert!(matches!(fit_decay(&synthetic(|t| (-t).exp(), 50), 1, 4), Err(Error::DegenerateWindow(_))));
    assert!(matches!(fit_decay(&synthetic(|_| 1.0, 50), 1, 50), Err(Error::DegenerateWindow(_))));
    // zeros carry no information and are skipped
    let with_zeros = synthetic(|t| if t > 30.0 { 0.0 } else { (-0.3 * t).exp() }, 50);
    assert_eq!(fit_decay(&with_zeros, 1, 50).unwrap().points, 30);
}

#[test]
fn default_window_stops_at_noise() {
    let mut s = synthetic(|t| (-0.1 * t).exp(), 40);
    for e in &mut s.entries {
        e.stderr = 0.001;
    }
    // exp(-0.1 t) > 0.01 up to t = 46, beyond the series
    assert_eq!(default_window(&s), Some((1, 40)));
    for e in &mut s.entries {
        e.stderr = 0.01;
    }
    assert_eq!(default_window(&s), Some((1, 23)));
}

#[test]
fn schedule_examples() {
    let s = schedule_values(1, 0.3, &ZSchedule::Fixed { z: 3.0 }).unwrap();
    assert!((s.q_t - 0.07355).abs() < 1e-5);
    assert!((s.bound.ln() + 3.01e-4).abs() < 1e-6);
    let z = ZSchedule::Power { c3: 2.0, k: 3.0 };
    let mut last = 1.0;
    for t in 1..500 {
        let v = schedule_values(t, 0.15, &z).unwrap();
        assert!(v.q_t < last && v.q_t < 0.1);
        assert!(v.bound > 0.0 && v.bound < 1.0);
        last = v.q_t;
    }
    assert!(schedule_values(0, 0.3, &z).is_err());
    assert!(schedule_values(1, 1.0, &z).is_err());
    assert!(schedule_values(1, 0.3, &ZSchedule::Power { c3: 1.0, k: 2.0 }).is_err());
    assert!(schedule_values(1, 0.3, &ZSchedule::Power { c3: 0.0, k: 3.0 }).is_err());
}

#[test]
fn binary_trees_never_see_f() {
    let cfg = ExperimentConfig { dist: "2:1".into(), n_trees: 20, z_schedule: ZSchedule::Power { c3: 2.5, k: 3.0 }, ..Default::default() };
    let rows = event_frequencies(&cfg, Event::F, &[1, 2, 3, 4], 1).unwrap();
    assert!(rows.iter().all(|r| r.freq == 0.0 && r.n == 20));
}

#[test]
fn bounded_offspring_event_saturates() {
    let ts = [1, 2, 4];
    let freq = |c3: f64| {
        let cfg = ExperimentConfig {
            dist: "0:1/5,2:7/10,6:1/10".into(),
            n_trees: 400,
            z_schedule: ZSchedule::Power { c3, k: 3.0 },
            ..Default::default()
        };
        event_frequencies(&cfg, Event::M, &ts, 1).unwrap()
    };
    let (low, mid, high) = (freq(0.5), freq(2.0), freq(4.0));
    for i in 0..ts.len() {
        assert!(low[i].freq <= mid[i].freq && mid[i].freq <= high[i].freq);
        assert_eq!(high[i].freq, 1.0);
    }
    assert!(low[0].freq < 1.0);
}

#[test]
fn f_frequencies_do_not_increase() {
    let cfg = ExperimentConfig {
        dist: "0:1/5,2:7/10,6:1/10".into(),
        n_trees: 10_000,
        master_seed: 8,
        z_schedule: ZSchedule::Power { c3: 8.0, k: 3.0 },
        ..Default::default()
    };
    let rows = event_frequencies(&cfg, Event::F, &[1, 2, 3, 4, 5, 6], 2).unwrap();
    for w in rows.windows(2) {
        let noise = 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        assert!(w[1].freq <= w[0].freq + noise);
    }
}

#[test]
fn d_event_on_small_depths() {
    let cfg = ExperimentConfig { n_trees: 200, h: "1/2".into(), ..Default::default() };
    let rows = event_frequencies(&cfg, Event::D, &[1, 2, 4, 8], 2).unwrap();
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.freq)));
    assert_eq!(rows, event_frequencies(&cfg, Event::D, &[1, 2, 4, 8], 1).unwrap());
    assert!(event_frequencies(&cfg, Event::D, &[40], 1).is_err());
    assert!(event_frequencies(&cfg, Event::M, &[0], 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn produced_series_stay_below_one(seed in any::<u64>(), t_max in 1u32..8, walks in any::<bool>()) {
        let cfg = ExperimentConfig {
            dist: "0:1/4,1:1/4,3:1/2".into(),
            t_max,
            n_trees: 40,
            master_seed: seed,
            estimator: if walks { Estimator::Walks } else { Estimator::Exact },
            ..Default::default()
        };
        let s = annealed_return(&cfg, 1).unwrap();
        prop_assert!(s.validate().is_ok());
        prop_assert_eq!(s.len() as u32, 2 * t_max + 1);
    }
}
