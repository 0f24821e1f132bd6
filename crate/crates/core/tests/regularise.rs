use gwhk_core::corpus::gw_trees;
use gwhk_core::isolation::{decompose_islands, union_of_cores_bruteforce, IslandDecomposition};
use gwhk_core::regularise::{regularise, regularise_mapped};
use gwhk_core::{Error, OffspringDistribution, Rational, RootedTree};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

#[test]
fn homogeneous_tree_is_a_fixed_point() {
    let t = RootedTree::regular(2, 5);
    let d = decompose_islands(&t, r(1, 2)).unwrap();
    assert!(d.islands().is_empty());
    assert_eq!(regularise(&t, 2, 3, &d, 5).unwrap(), t);
}

/// Nine vertices of height 2: the cherry `{1, 4, 5}` hangs below level 1 and
/// is the only island at `q = 1/2`; the other depth-2 vertices carry three
/// unexplored children each.
fn nine_vertex() -> RootedTree {
    let parents = [None, Some(0), Some(0), Some(0), Some(1), Some(1), Some(2), Some(2), Some(3)];
    RootedTree::from_parents(&parents, &[0, 0, 0, 0, 0, 0, 3, 3, 3]).unwrap()
}

#[test]
fn island_crossing_level_one_is_preserved() {
    let t = nine_vertex();
    let d = decompose_islands(&t, r(1, 2)).unwrap();
    assert_eq!(union_of_cores_bruteforce(&t, r(1, 2)).unwrap(), d.union_mask());
    assert_eq!(d.islands().len(), 1);
    assert_eq!(d.islands()[0].vertices, vec![1, 4, 5]);

    let reg = regularise_mapped(&t, 1, 3, &d, 4).unwrap();
    let tq = &reg.tree;
    for v in 0..tq.len() {
        let expected = match reg.origin[v] {
            Some(o) if t.depth(o) <= 1 || d.island_of(o).is_some() => t.offspring(o),
            _ => 2,
        };
        assert_eq!(tq.offspring(v), expected, "vertex {v}");
    }
    // 1 + 3 + (2 + 3) + 6 + 12
    assert_eq!(tq.len(), 27);
    let dq = decompose_islands(tq, r(1, 2)).unwrap();
    let mapped: Vec<Vec<usize>> = dq
        .islands()
        .iter()
        .map(|i| i.vertices.iter().map(|&v| reg.origin[v].unwrap()).collect())
        .collect();
    assert_eq!(mapped, vec![vec![1, 4, 5]]);
}

#[test]
fn errors_are_reported() {
    let t = nine_vertex();
    let d = decompose_islands(&t, r(1, 2)).unwrap();
    assert!(matches!(regularise(&t, 1, 2, &d, 4), Err(Error::InvalidParameter(_))));
    assert!(matches!(regularise(&t, 3, 3, &d, 2), Err(Error::InvalidParameter(_))));
    assert_eq!(
        regularise(&t, 4, 3, &d, 5),
        Err(Error::InsufficientDepth { needed: 4, available: 2 })
    );
    // a cherry whose leaves sit on the frontier
    let clipped = RootedTree::from_parents(&[None, Some(0), Some(1), Some(1)], &[0, 0, 1, 1]).unwrap();
    let dc = IslandDecomposition::from_mask(&clipped, r(1, 2), &[false, true, true, true]);
    assert_eq!(regularise(&clipped, 1, 3, &dc, 3), Err(Error::ClippedIsland { island: 0, vertex: 2 }));
}

/// Offspring are bounded by `z_t - 1` on the ocean of `T^q`, and its low-q
/// islands are the low-q islands of `T` inside the copied region. At the
/// regularisation parameter itself these are the near-root islands.
#[test]
fn representation_of_islands_on_sampled_trees() {
    let dist = OffspringDistribution::parse("0:1/5,1:1/5,2:2/5,4:1/5").unwrap();
    let q = r(1, 2);
    let mut checked = 0;
    let mut deep_low_islands = 0;
    for t in gw_trees(&dist, 8, 1500, 21) {
        let step = 2;
        let d = decompose_islands(&t, q).unwrap();
        let reach = d
            .islands()
            .iter()
            .filter(|i| i.vertices.iter().any(|&v| t.depth(v) <= step))
            .flat_map(|i| i.vertices.iter().map(|&v| t.depth(v)))
            .max()
            .unwrap_or(0);
        let Ok(reg) = regularise_mapped(&t, step, 5, &d, (step + 3).max(reach + 1)) else { continue };
        let z_cap = (0..t.len()).filter(|&v| t.depth(v) <= step).map(|v| t.offspring(v)).max().unwrap();
        let dq = decompose_islands(&reg.tree, q).unwrap();
        if z_cap <= 4 {
            for v in dq.ocean_vertices() {
                assert!(reg.tree.offspring(v) <= 4);
            }
        }
        for q2 in [r(1, 4), r(1, 3), r(1, 2)] {
            let low = decompose_islands(&t, q2).unwrap();
            let mut expected: Vec<Vec<usize>> = low
                .islands()
                .iter()
                .filter(|i| i.vertices.iter().any(|&v| t.depth(v) <= step))
                .map(|i| i.vertices.clone())
                .collect();
            let mut copied: Vec<Vec<usize>> = low
                .islands()
                .iter()
                .filter(|i| i.vertices.iter().all(|&v| t.depth(v) <= step || d.island_of(v).is_some_and(|id| d.islands()[id].vertices.iter().any(|&u| t.depth(u) <= step))))
                .map(|i| i.vertices.clone())
                .collect();
            copied.sort();
            let got_d = decompose_islands(&reg.tree, q2).unwrap();
            let mut got: Vec<Vec<usize>> = got_d
                .islands()
                .iter()
                .map(|i| {
                    let mut v: Vec<usize> = i.vertices.iter().map(|&v| reg.origin[v].expect("island vertex is copied")).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            expected.sort();
            got.sort();
            // the copied region can hold deep low-q islands of a near q-island
            assert_eq!(got, copied);
            if q2 == q {
                assert_eq!(got, expected);
            } else if got != expected {
                deep_low_islands += 1;
            }
        }
        checked += 1;
    }
    assert!(checked > 60, "only {checked} usable instances");
    assert!(deep_low_islands > 0);
}
