//! Heat kernels of the simple random walk on lumped trees.
//!
//! A lumped tree stores one node per class of interchangeable vertices: a
//! node with multiplicity `m` stands for `m` copies under each copy of its
//! parent. For a walk started at the root, the aggregated mass of a node
//! evolves exactly like a walk on the node graph with flows
//! `M_c·m_d/deg_c` from `c` down to a child node `d` and `M_d/deg_d` back up,
//! so a complete `j`-ary tree of height 1000 needs only 1001 nodes.
//!
//! Updates pull from neighbours in a fixed order (parent, then children),
//! and nodes without mass only ever contribute `+0.0`. Deepening a tree
//! therefore leaves every computed value bit-for-bit unchanged.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tree::RootedTree;

#[derive(Debug, Clone, PartialEq)]
pub struct LumpedTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    mult: Vec<f64>,
    degree: Vec<f64>,
    depth: Vec<u32>,
    frontier: Vec<u32>,
    /// Every node is a single vertex, so any start is allowed.
    identity: bool,
    /// `level_end[d]` = number of nodes of depth `<= d` (nodes are depth-sorted).
    level_end: Vec<usize>,
}

/// Values `P[X_s = start]` for `s = 0..=t_max` and the largest mass drift seen.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernel {
    pub values: Vec<f64>,
    pub max_drift: f64,
}

impl LumpedTree {
    fn assemble(
        parent: Vec<Option<usize>>,
        mult: Vec<f64>,
        degree: Vec<f64>,
        frontier: Vec<u32>,
        identity: bool,
    ) -> Self {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        let mut depth = vec![0u32; n];
        for v in 1..n {
            let p = parent[v].expect("non-root node has a parent");
            debug_assert!(p < v);
            children[p].push(v);
            depth[v] = depth[p] + 1;
            debug_assert!(depth[v] >= depth[v - 1]);
        }
        let height = depth.last().copied().unwrap_or(0) as usize;
        let mut level_end = vec![0usize; height + 1];
        for &d in &depth {
            level_end[d as usize] += 1;
        }
        for d in 1..=height {
            level_end[d] += level_end[d - 1];
        }
        Self { parent, children, mult, degree, depth, frontier, identity, level_end }
    }

    /// One node per vertex. Vertices must be sorted by depth, as produced by
    /// sampling, truncation and regularisation.
    pub fn from_tree(tree: &RootedTree) -> Result<Self> {
        if (1..tree.len()).any(|v| tree.depth(v) < tree.depth(v - 1)) {
            return Err(Error::InvalidTree("vertices are not in breadth-first order".into()));
        }
        Ok(Self::assemble(
            tree.parents().to_vec(),
            vec![1.0; tree.len()],
            (0..tree.len()).map(|v| f64::from(tree.degree(v))).collect(),
            tree.frontiers().to_vec(),
            true,
        ))
    }

    /// Merges isomorphic sibling subtrees. Only walks started at the root may
    /// use the result.
    pub fn compress(tree: &RootedTree) -> Self {
        let n = tree.len();
        let mut class = vec![0u32; n];
        let mut classes: HashMap<(u32, Vec<(u32, u32)>), u32> = HashMap::new();
        for v in (0..n).rev() {
            let mut kids: Vec<u32> = tree.children(v).iter().map(|&c| class[c]).collect();
            kids.sort_unstable();
            let mut grouped: Vec<(u32, u32)> = Vec::new();
            for k in kids {
                match grouped.last_mut() {
                    Some((c, cnt)) if *c == k => *cnt += 1,
                    _ => grouped.push((k, 1)),
                }
            }
            let next = classes.len() as u32;
            class[v] = *classes.entry((tree.frontier(v), grouped)).or_insert(next);
        }
        let mut parent = vec![None];
        let mut mult = vec![1.0];
        let mut rep = vec![0usize];
        let mut head = 0;
        while head < rep.len() {
            let v = rep[head];
            let mut groups: Vec<(u32, usize, u32)> = Vec::new();
            for &c in tree.children(v) {
                match groups.iter_mut().find(|g| g.0 == class[c]) {
                    Some(g) => g.2 += 1,
                    None => groups.push((class[c], c, 1)),
                }
            }
            for (_, c, count) in groups {
                parent.push(Some(head));
                mult.push(f64::from(count));
                rep.push(c);
            }
            head += 1;
        }
        let degree = rep.iter().map(|&v| f64::from(tree.degree(v))).collect();
        let frontier = rep.iter().map(|&v| tree.frontier(v)).collect();
        Self::assemble(parent, mult, degree, frontier, false)
    }

    /// Complete `arity`-ary tree of the given height, one node per level.
    pub fn regular(arity: u32, height: u32) -> Self {
        let n = height as usize + 1;
        let parent = (0..n).map(|d| d.checked_sub(1)).collect();
        let mut mult = vec![f64::from(arity); n];
        mult[0] = 1.0;
        let mut degree = vec![f64::from(arity) + 1.0; n];
        degree[0] = f64::from(arity);
        let mut frontier = vec![0; n];
        frontier[n - 1] = arity;
        Self::assemble(parent, mult, degree, frontier, arity == 1)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn height(&self) -> u32 {
        (self.level_end.len() - 1) as u32
    }

    /// Shallowest depth carrying frontier edges, `None` for a complete tree.
    pub fn depth_cap(&self) -> Option<u32> {
        (0..self.len()).filter(|&v| self.frontier[v] > 0).map(|v| self.depth[v]).min()
    }

    fn check_cap(&self, needed: u32) -> Result<()> {
        match self.depth_cap() {
            Some(cap) if cap < needed => Err(Error::InsufficientDepth { needed, available: cap }),
            _ => Ok(()),
        }
    }

    /// One pull step over the nodes `0..limit`.
    #[inline]
    fn step(&self, cur: &[f64], next: &mut [f64], limit: usize) {
        for y in 0..limit {
            let mut acc = match self.parent[y] {
                Some(p) => cur[p] * self.mult[y] / self.degree[p],
                None => 0.0,
            };
            for &c in &self.children[y] {
                acc += cur[c] / self.degree[c];
            }
            next[y] = acc;
        }
    }

    fn prefix(&self, depth: u32) -> usize {
        self.level_end[(depth as usize).min(self.level_end.len() - 1)]
    }

    /// Full distribution propagation from `start` for `t_max` steps.
    ///
    /// Requires the frontier to lie deeper than `depth(start) + t_max` so no
    /// mass can leave; the total mass is tracked and its largest deviation
    /// from 1 is reported, never corrected.
    pub fn heat_kernel(&self, start: usize, t_max: u32) -> Result<HeatKernel> {
        if start >= self.len() {
            return Err(Error::UnknownVertex(start));
        }
        if start != 0 && !self.identity {
            return Err(Error::InvalidParameter("lumped trees only support walks from the root".into()));
        }
        self.check_cap(self.depth[start] + t_max)?;
        let mut cur = vec![0.0; self.len()];
        let mut next = vec![0.0; self.len()];
        cur[start] = 1.0;
        let mut values = Vec::with_capacity(t_max as usize + 1);
        values.push(1.0);
        let mut max_drift: f64 = 0.0;
        for k in 1..=t_max {
            let limit = self.prefix(self.depth[start] + k);
            self.step(&cur, &mut next, limit);
            std::mem::swap(&mut cur, &mut next);
            let mass: f64 = cur[..limit].iter().sum();
            max_drift = max_drift.max((mass - 1.0).abs());
            values.push(cur[start] / self.mult[start]);
        }
        Ok(HeatKernel { values, max_drift })
    }

    /// Root return probabilities `P[X_s = o]` for `s = 0..=s_max`.
    ///
    /// Only depths that can still get back to the root in time are updated,
    /// so the tree needs to be materialized to depth `ceil(s_max/2)` only.
    pub fn return_series(&self, s_max: u32) -> Result<Vec<f64>> {
        self.check_cap(s_max.div_ceil(2))?;
        let mut cur = vec![0.0; self.len()];
        let mut next = vec![0.0; self.len()];
        cur[0] = 1.0;
        let mut values = Vec::with_capacity(s_max as usize + 1);
        values.push(1.0);
        for k in 1..=s_max {
            let limit = self.prefix(k.min(s_max - k));
            self.step(&cur, &mut next, limit);
            std::mem::swap(&mut cur, &mut next);
            values.push(cur[0]);
        }
        Ok(values)
    }
}
