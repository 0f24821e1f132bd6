//! The files under `samples/` are inputs for the plotting scripts; they must
//! stay readable and agree with the library.

use std::path::PathBuf;

use gwhk_core::anneal::fit_decay;
use gwhk_core::io::{read_fit_csv, read_header, read_json_with_config, read_returns_csv};
use gwhk_core::isolation::{decompose_islands, DecompositionExport, IslandDecomposition};
use gwhk_core::rational::parse_rational;
use gwhk_core::RootedTree;

fn sample(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "samples", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn island_samples_match_the_trees() {
    for (tree, islands) in [("example.gwtree", "example.islands.json"), ("sampled.gwtree", "sampled.islands.json")] {
        let text = sample(tree);
        read_header(&text).unwrap();
        let tree = RootedTree::parse_relaxed(&text).unwrap();
        let (_, body) = read_json_with_config(&sample(islands)).unwrap();
        let export: DecompositionExport = serde_json::from_value(body).unwrap();
        let stored = IslandDecomposition::from_export(&tree, &export).unwrap();
        let fresh = decompose_islands(&tree, parse_rational(&export.q).unwrap()).unwrap();
        assert_eq!(stored.to_export(), fresh.to_export());
    }
}

#[test]
fn regime_b_fit_matches_its_returns() {
    let (config, series) = read_returns_csv(&sample("regime_b.returns.csv")).unwrap();
    assert_eq!(config["experiment"]["t_max"], 256);
    series.validate().unwrap();
    let (fit_config, rows) = read_fit_csv(&sample("regime_b.fit.csv")).unwrap();
    assert_eq!(fit_config["source"], config);
    let (t_lo, t_hi, beta, c, _) = rows[0];
    let fit = fit_decay(&series, t_lo, t_hi).unwrap();
    assert!((fit.beta_hat - beta).abs() <= 1e-12 && (fit.c_hat - c).abs() <= 1e-12);
    assert!((0.25..=0.55).contains(&beta));
    read_header(&sample("regime_b.returns.bounds.csv")).unwrap();
}
