//! Walks on lazily grown Galton–Watson trees conditioned to reach a depth.
//!
//! Conditioning on survival to depth `D` is exact without rejection: with
//! `e_m = f^(m)(0)` the chance a vertex's line dies within `m` generations,
//! a vertex of type `S_m` (line reaches `m` more generations) has
//! `j` children with probability `p_j(1 - e_{m-1}^j)/(1 - e_m)`, each child
//! independently of type `S_{m-1}` with probability `1 - e_{m-1}` given at
//! least one is, and `E_{m-1}` otherwise. A vertex of type `E_m` has `j`
//! children with probability `p_j e_{m-1}^j / e_m`, all of type `E_{m-1}`.
//! Below the conditioning depth the law is the plain offspring law.

use rand::Rng;

use crate::dist::{DiscreteSampler, OffspringDistribution};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Survive(u32),
    Extinct(u32),
    Free,
}

/// Offspring samplers for every type up to the conditioning depth.
#[derive(Debug, Clone)]
pub struct ConditionedLaw {
    e: Vec<f64>,
    free: DiscreteSampler,
    survive: Vec<Option<DiscreteSampler>>,
    extinct: Vec<Option<DiscreteSampler>>,
}

impl ConditionedLaw {
    pub fn new(dist: &OffspringDistribution, depth: u32) -> Result<Self> {
        if !dist.is_supercritical() {
            return Err(Error::InvalidDistribution("survival conditioning needs a supercritical law".into()));
        }
        let e = dist.dies_within(depth as usize);
        let support: Vec<(u32, f64)> = dist.support().collect();
        let build = |weight: &dyn Fn(u32, f64) -> f64| -> Result<Option<DiscreteSampler>> {
            let (values, weights): (Vec<u32>, Vec<f64>) =
                support.iter().map(|&(j, p)| (j, weight(j, p))).filter(|&(_, w)| w > 0.0).unzip();
            if values.is_empty() {
                Ok(None)
            } else {
                DiscreteSampler::new(values, &weights).map(Some)
            }
        };
        let mut survive = vec![None];
        let mut extinct = vec![None];
        for m in 1..=depth as usize {
            let prev = e[m - 1];
            survive.push(build(&|j, p| p * (1.0 - prev.powi(j as i32)))?);
            extinct.push(build(&|j, p| p * prev.powi(j as i32))?);
        }
        Ok(Self { e, free: dist.sampler(), survive, extinct })
    }

    fn root_kind(&self) -> Kind {
        match self.e.len() - 1 {
            0 => Kind::Free,
            d => Kind::Survive(d as u32),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    parent: u32,
    kind: Kind,
    key: u64,
    depth: u32,
    first_child: u32,
    /// `u32::MAX` until the children have been drawn.
    n_children: u32,
}

const UNEXPANDED: u32 = u32::MAX;
const NO_PARENT: u32 = u32::MAX;

/// A survival-conditioned tree whose vertices are drawn on first visit.
///
/// The offspring of a vertex depend only on its key, which is derived from
/// the root key and the path of child slots, so the tree is the same
/// whichever walks explore it.
#[derive(Debug)]
pub struct LazyTree<'a> {
    law: &'a ConditionedLaw,
    nodes: Vec<Node>,
}

impl<'a> LazyTree<'a> {
    pub fn new(law: &'a ConditionedLaw, root_key: u64) -> Self {
        let root = Node {
            parent: NO_PARENT,
            kind: law.root_kind(),
            key: root_key,
            depth: 0,
            first_child: 0,
            n_children: UNEXPANDED,
        };
        Self { law, nodes: vec![root] }
    }

    /// Number of vertices drawn so far.
    pub fn materialized(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.nodes[v].depth
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.nodes[v].parent;
        (p != NO_PARENT).then_some(p as usize)
    }

    /// Children of `v`, drawing them if needed.
    pub fn children(&mut self, v: usize) -> std::ops::Range<usize> {
        self.expand(v);
        let n = &self.nodes[v];
        n.first_child as usize..(n.first_child + n.n_children) as usize
    }

    fn expand(&mut self, v: usize) {
        if self.nodes[v].n_children != UNEXPANDED {
            return;
        }
        let node = self.nodes[v];
        let mut r = rng::stream(node.key);
        let first = self.nodes.len() as u32;
        let law = self.law;
        let push = |nodes: &mut Vec<Node>, slot: u32, kind: Kind| {
            nodes.push(Node {
                parent: v as u32,
                kind,
                key: rng::child_key(node.key, u64::from(slot)),
                depth: node.depth + 1,
                first_child: 0,
                n_children: UNEXPANDED,
            });
        };
        let count = match node.kind {
            Kind::Free => {
                let j = law.free.sample(&mut r);
                for slot in 0..j {
                    push(&mut self.nodes, slot, Kind::Free);
                }
                j
            }
            Kind::Extinct(m) => {
                let j = law.extinct[m as usize].as_ref().expect("reachable extinct type").sample(&mut r);
                for slot in 0..j {
                    push(&mut self.nodes, slot, Kind::Extinct(m - 1));
                }
                j
            }
            Kind::Survive(m) => {
                let j = law.survive[m as usize].as_ref().expect("supercritical law").sample(&mut r);
                let alive = 1.0 - law.e[m as usize - 1];
                let mut flags = vec![false; j as usize];
                loop {
                    for f in flags.iter_mut() {
                        *f = r.random::<f64>() < alive;
                    }
                    if flags.iter().any(|&f| f) {
                        break;
                    }
                }
                for (slot, &f) in flags.iter().enumerate() {
                    let kind = match (f, m - 1) {
                        (true, 0) => Kind::Free,
                        (true, k) => Kind::Survive(k),
                        (false, k) => Kind::Extinct(k),
                    };
                    push(&mut self.nodes, slot as u32, kind);
                }
                j
            }
        };
        self.nodes[v].first_child = first;
        self.nodes[v].n_children = count;
    }

    /// One simple-random-walk step from `v`.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, v: usize, r: &mut R) -> usize {
        let kids = self.children(v);
        let up = usize::from(self.nodes[v].parent != NO_PARENT);
        let deg = kids.len() + up;
        let i = r.random_range(0..deg);
        if i < kids.len() {
            kids.start + i
        } else {
            self.nodes[v].parent as usize
        }
    }
}

/// Fraction of `walks` walks that sit at the root after `s` steps, for
/// `s = 0..=s_max`. Walk `w` uses the stream keyed `(seed, WALK, tree, w)`.
pub fn walk_return_fractions(tree: &mut LazyTree<'_>, s_max: u32, walks: u32, seed: u64, tree_index: u64) -> Vec<f64> {
    let mut hits = vec![0u32; s_max as usize + 1];
    for w in 0..walks {
        let mut r = rng::stream_for(&[seed, rng::domain::WALK, tree_index, u64::from(w)]);
        let mut v = 0usize;
        hits[0] += 1;
        for s in 1..=s_max {
            v = tree.step(v, &mut r);
            if v == 0 {
                hits[s as usize] += 1;
            }
            // too deep to come back in the remaining steps
            if tree.depth(v) > s_max - s {
                break;
            }
        }
    }
    hits.iter().map(|&h| f64::from(h) / f64::from(walks)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditioned_root_always_survives() {
        let dist = OffspringDistribution::parse("0:1/2,2:1/4,3:1/4").unwrap();
        let law = ConditionedLaw::new(&dist, 6).unwrap();
        for k in 0..200 {
            let mut t = LazyTree::new(&law, k);
            // generation 6 is never empty
            let mut frontier = vec![0usize];
            for _ in 0..6 {
                let mut next = Vec::new();
                for v in frontier {
                    next.extend(t.children(v));
                }
                assert!(!next.is_empty());
                frontier = next;
            }
        }
    }

    #[test]
    fn tree_does_not_depend_on_visit_order() {
        let dist = OffspringDistribution::parse("0:1/5,2:4/5").unwrap();
        let law = ConditionedLaw::new(&dist, 5).unwrap();
        let mut a = LazyTree::new(&law, 99);
        let mut b = LazyTree::new(&law, 99);
        let a1: Vec<usize> = a.children(0).collect();
        let _ = a.children(a1[0]);
        let b1: Vec<usize> = b.children(0).collect();
        let _ = b.children(*b1.last().unwrap());
        assert_eq!(a1.len(), b1.len());
        let kids_b: Vec<u64> = b.children(b1[0]).map(|c| b.nodes[c].key).collect();
        let kids_a: Vec<u64> = a.children(a1[0]).map(|c| a.nodes[c].key).collect();
        assert_eq!(kids_a, kids_b);
    }

    #[test]
    fn subcritical_law_is_rejected() {
        let dist = OffspringDistribution::parse("0:1/2,1:1/2").unwrap();
        assert!(ConditionedLaw::new(&dist, 3).is_err());
    }
}
