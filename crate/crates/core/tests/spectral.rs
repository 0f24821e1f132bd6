use gwhk_core::corpus::{gw_trees, ocean_instances, InstanceFilter, OceanInstance};
use gwhk_core::isolation::decompose_islands;
use gwhk_core::lumped::LumpedTree;
use gwhk_core::ocean::build_ocean_weights;
use gwhk_core::spectral::{
    embed_vector, heat_kernel, heat_kernel_series, isoperimetric_bruteforce, operator_norm, operator_norm_dense,
    restrict_vector, weighted_inner,
};
use gwhk_core::{rng, Error, OffspringDistribution, Rational, RootedTree};
use rand::Rng;

#[test]
fn binary_tree_returns() {
    let t = RootedTree::regular(2, 6);
    let s = heat_kernel_series(&t, 0, 6).unwrap();
    assert_eq!(s.value(0), Some(1.0));
    assert!((s.value(2).unwrap() - 1.0 / 3.0).abs() <= 1e-15);
    s.validate().unwrap();
}

#[test]
fn deep_binary_tree_conserves_mass() {
    let hk = LumpedTree::regular(2, 1001).heat_kernel(0, 1000).unwrap();
    assert!(hk.max_drift <= 1e-12, "drift {}", hk.max_drift);
    for (s, v) in hk.values.iter().enumerate() {
        if s % 2 == 1 {
            assert_eq!(*v, 0.0);
        }
    }
    let deeper = LumpedTree::regular(2, 1004).heat_kernel(0, 1000).unwrap();
    assert_eq!(hk.values, deeper.values);
}

#[test]
fn deepening_leaves_sampled_series_unchanged() {
    let dist = OffspringDistribution::parse("0:1/5,2:4/5").unwrap();
    for tree in gw_trees(&dist, 14, 20, 31) {
        let shallow = tree.truncate(11).unwrap();
        let a = heat_kernel_series(&shallow, 0, 11).unwrap();
        let b = heat_kernel_series(&tree, 0, 11).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        let hk = heat_kernel(&tree, 0, 14).unwrap();
        assert!(hk.max_drift <= 1e-12);
    }
}

#[test]
fn compression_matches_the_plain_walk() {
    let dist = OffspringDistribution::parse("0:1/5,2:3/5,3:1/5").unwrap();
    for tree in gw_trees(&dist, 10, 20, 5) {
        let plain = heat_kernel(&tree, 0, 10).unwrap().values;
        let lumped = LumpedTree::compress(&tree);
        assert!(lumped.len() <= tree.len());
        let ret = lumped.return_series(20).unwrap();
        for s in 0..=10 {
            assert!((plain[s] - ret[s]).abs() < 1e-14);
        }
    }
}

#[test]
fn non_root_start_and_depth_errors() {
    let t = RootedTree::regular(3, 5);
    let hk = heat_kernel(&t, 2, 3).unwrap();
    // from depth 1, two steps return through the parent or a child
    assert!((hk.values[2] - (1.0 / 4.0 * 1.0 / 3.0 + 3.0 / 4.0 * 1.0 / 4.0)).abs() < 1e-15);
    assert_eq!(heat_kernel_series(&t, 2, 5), Err(Error::InsufficientDepth { needed: 6, available: 5 }));
    assert_eq!(heat_kernel_series(&t, 999, 1), Err(Error::UnknownVertex(999)));
}

#[test]
fn island_free_binary_ratio() {
    let t = RootedTree::regular(2, 4);
    let d = decompose_islands(&t, Rational::new(1, 2)).unwrap();
    let w = build_ocean_weights(&t, &d).unwrap();
    let iso = isoperimetric_bruteforce(&w, t.len()).unwrap();
    assert!(iso.ratio >= 1.0 / 3.0 - 1e-12, "{iso:?}");
}

fn regime_instances(h: Rational, count: usize) -> Vec<OceanInstance> {
    let q = h * Rational::new(2, 3);
    let dist = OffspringDistribution::parse("0:1/3,2:1/3,3:1/3").unwrap();
    let filter = InstanceFilter { caps: (4, 8), max_vertices: 40, require_island: true };
    ocean_instances(&dist, &[q], &filter, count, 0x5EC7)
}

#[test]
fn spectral_sandwich_in_regime() {
    for h in [Rational::new(3, 20), Rational::new(3, 10)] {
        let insts = regime_instances(h, 15);
        assert_eq!(insts.len(), 15);
        for inst in insts {
            let q = gwhk_core::rational::to_f64(&inst.decomp.q());
            let c = q / (q + 2.0);
            let w = build_ocean_weights(&inst.tree, &inst.decomp).unwrap();
            let iso = isoperimetric_bruteforce(&w, w.len()).unwrap();
            assert!(iso.ratio >= c - 1e-12, "sample {}: {iso:?}", inst.sample_index);
            let est = operator_norm(&w, 10_000, 1e-10).unwrap();
            let dense = operator_norm_dense(&w);
            assert!((est.value - dense).abs() < 1e-4, "power {} dense {dense}", est.value);
            assert!(dense <= (1.0 - c * c).sqrt() + 1e-9, "sample {}: norm {dense}", inst.sample_index);
        }
    }
}

#[test]
fn restriction_and_embedding_are_adjoint() {
    let insts = regime_instances(Rational::new(3, 10), 10);
    let mut r = rng::stream_for(&[77]);
    for inst in &insts {
        let d = &inst.decomp;
        let w = build_ocean_weights(&inst.tree, d).unwrap();
        let wq: Vec<f64> = (0..w.len()).map(|i| w.vertex_weight(i)).collect();
        let deg: Vec<f64> = (0..inst.tree.len()).map(|v| f64::from(inst.tree.degree(v))).collect();
        for _ in 0..10 {
            let u: Vec<f64> = (0..d.len()).map(|_| r.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..w.len()).map(|_| r.random_range(-1.0..1.0)).collect();
            let lhs = weighted_inner(&restrict_vector(&u, d).unwrap(), &v, &wq);
            let rhs = weighted_inner(&u, &embed_vector(&v, d).unwrap(), &deg);
            assert!((lhs - rhs).abs() <= 1e-12);
            assert_eq!(restrict_vector(&embed_vector(&v, d).unwrap(), d).unwrap(), v);
        }
        let island: Vec<f64> = (0..d.len()).map(|x| if d.is_ocean(x) { 0.0 } else { 1.0 }).collect();
        assert!(restrict_vector(&island, d).unwrap().iter().all(|&x| x == 0.0));
        assert!(matches!(embed_vector(&[1.0], d), Err(Error::DimensionMismatch { .. })) || w.len() == 1);
    }
}
