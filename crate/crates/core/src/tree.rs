//! Rooted trees, Galton–Watson sampling, truncation and the `gwtree v1` text format.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::dist::OffspringDistribution;
use crate::error::{Error, Result};
use crate::rng;

/// Maximum number of consecutive rejected attempts when sampling conditioned
/// on survival to the depth cap.
pub const REJECTION_BUDGET: u64 = 10_000_000;

/// Finite rooted tree with dense ids (`0` is the root, parents precede children).
///
/// Vertices at the depth cap may carry a `frontier` count: the number of
/// children that exist in the full tree but are not materialized. They take
/// part in degrees and edge boundaries exactly like materialized edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<u32>,
    frontier: Vec<u32>,
}

impl RootedTree {
    pub fn single_root() -> Self {
        Self {
            parent: vec![None],
            children: vec![Vec::new()],
            depth: vec![0],
            frontier: vec![0],
        }
    }

    /// Builds a tree from a parent array. `parents[0]` must be `None` and
    /// every other vertex needs a parent with a smaller id. Frontier counts
    /// are only allowed on childless vertices of maximal depth.
    pub fn from_parents(parents: &[Option<usize>], frontier: &[u32]) -> Result<Self> {
        Self::build(parents, frontier, true)
    }

    /// Like [`RootedTree::from_parents`] but accepts frontier counts on any
    /// vertex. Useful for hand-built instances whose unexplored edges do not
    /// all sit on one level; such trees report no depth cap coverage beyond
    /// their height.
    pub fn from_parents_relaxed(parents: &[Option<usize>], frontier: &[u32]) -> Result<Self> {
        Self::build(parents, frontier, false)
    }

    fn build(parents: &[Option<usize>], frontier: &[u32], strict: bool) -> Result<Self> {
        let n = parents.len();
        if n == 0 {
            return Err(Error::InvalidTree("empty tree".into()));
        }
        if frontier.len() != n {
            return Err(Error::InvalidTree("frontier length differs from vertex count".into()));
        }
        if parents[0].is_some() {
            return Err(Error::InvalidTree("vertex 0 must be the root".into()));
        }
        let mut children = vec![Vec::new(); n];
        let mut depth = vec![0u32; n];
        for (v, p) in parents.iter().enumerate().skip(1) {
            let p = p.ok_or_else(|| Error::InvalidTree(format!("vertex {v} has no parent")))?;
            if p >= v {
                return Err(Error::InvalidTree(format!("parent {p} of vertex {v} does not precede it")));
            }
            children[p].push(v);
            depth[v] = depth[p] + 1;
        }
        let height = depth.iter().copied().max().unwrap_or(0);
        for v in 0..n {
            if strict && frontier[v] > 0 && (depth[v] != height || !children[v].is_empty()) {
                return Err(Error::InvalidTree(format!(
                    "frontier degree at vertex {v} which is not a childless vertex of maximal depth"
                )));
            }
        }
        Ok(Self {
            parent: parents.to_vec(),
            children,
            depth,
            frontier: frontier.to_vec(),
        })
    }

    /// Complete `arity`-ary tree of the given height with frontier counts
    /// `arity` on the last level.
    pub fn regular(arity: u32, height: u32) -> Self {
        let mut parents = vec![None];
        let mut level = vec![0usize];
        for _ in 0..height {
            let mut next = Vec::with_capacity(level.len() * arity as usize);
            for &p in &level {
                for _ in 0..arity {
                    next.push(parents.len());
                    parents.push(Some(p));
                }
            }
            level = next;
        }
        let mut frontier = vec![0; parents.len()];
        for &v in &level {
            frontier[v] = arity;
        }
        Self::from_parents(&parents, &frontier).expect("regular tree is well formed")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn frontier(&self, v: usize) -> u32 {
        self.frontier[v]
    }

    pub fn frontiers(&self) -> &[u32] {
        &self.frontier
    }

    /// Number of children `Z(v)`, counting unmaterialized ones.
    pub fn offspring(&self, v: usize) -> u32 {
        self.children[v].len() as u32 + self.frontier[v]
    }

    /// Degree in the full tree: parent edge, children and frontier edges.
    pub fn degree(&self, v: usize) -> u32 {
        u32::from(self.parent[v].is_some()) + self.offspring(v)
    }

    /// Materialized neighbours (parent first, then children).
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.parent[v].into_iter().chain(self.children[v].iter().copied())
    }

    pub fn height(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Depth at which the tree was cut, or `None` if nothing is cut off.
    pub fn depth_cap(&self) -> Option<u32> {
        (0..self.len()).filter(|&v| self.frontier[v] > 0).map(|v| self.depth[v]).min()
    }

    /// True when every vertex at depth `<= d` has all of its children materialized
    /// except possibly at depth `d` itself.
    pub fn covers_depth(&self, d: u32) -> bool {
        self.depth_cap().is_none_or(|cap| cap >= d)
    }

    pub fn has_frontier(&self, v: usize) -> bool {
        self.frontier[v] > 0
    }

    /// Edge-boundary size `|∂S|` of a vertex set given as a membership mask.
    pub fn boundary_size(&self, in_set: &[bool]) -> u64 {
        let mut b = 0u64;
        for v in 0..self.len() {
            if !in_set[v] {
                continue;
            }
            b += u64::from(self.frontier[v]);
            if let Some(p) = self.parent[v] {
                if !in_set[p] {
                    b += 1;
                }
            }
            b += self.children[v].iter().filter(|&&c| !in_set[c]).count() as u64;
        }
        b
    }

    /// Subtree of depths `<= t`. Vertices at depth `t` keep their children
    /// as frontier counts.
    pub fn truncate(&self, t: u32) -> Result<Self> {
        if let Some(cap) = self.depth_cap() {
            if t > cap {
                return Err(Error::DepthExceedsCap { requested: t, cap });
            }
        }
        if t >= self.height() {
            return Ok(self.clone());
        }
        let mut new_id = vec![usize::MAX; self.len()];
        let mut parents = Vec::new();
        let mut frontier = Vec::new();
        for v in 0..self.len() {
            if self.depth[v] > t {
                continue;
            }
            new_id[v] = parents.len();
            parents.push(self.parent[v].map(|p| new_id[p]));
            frontier.push(if self.depth[v] == t { self.offspring(v) } else { 0 });
        }
        Self::from_parents(&parents, &frontier)
    }

    /// Serializes to the `gwtree v1` text format.
    pub fn serialize(&self) -> String {
        let mut out = String::with_capacity(16 + 12 * self.len());
        out.push_str("gwtree v1\n");
        for v in 0..self.len() {
            let p = self.parent[v].map_or(-1, |p| p as i64);
            let _ = writeln!(out, "{v} {p} {}", self.frontier[v]);
        }
        out
    }

    /// Parses the `gwtree v1` format. Lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, true)
    }

    /// Parses `gwtree v1` text, allowing frontier counts on any vertex as in
    /// [`RootedTree::from_parents_relaxed`].
    pub fn parse_relaxed(text: &str) -> Result<Self> {
        Self::parse_with(text, false)
    }

    fn parse_with(text: &str, strict: bool) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, "gwtree v1")) => {}
            Some((line, other)) => {
                return Err(Error::Parse { line, msg: format!("expected header \"gwtree v1\", got {other:?}") })
            }
            None => return Err(Error::Parse { line: 0, msg: "missing header".into() }),
        }
        let mut parents = Vec::new();
        let mut frontier = Vec::new();
        for (line, l) in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse { line, msg: format!("malformed line {l:?}") });
            }
            let bad = |what: &str| Error::Parse { line, msg: format!("malformed {what} in {l:?}") };
            let id: usize = fields[0].parse().map_err(|_| bad("id"))?;
            let parent: i64 = fields[1].parse().map_err(|_| bad("parent"))?;
            let fr: u32 = fields[2].parse().map_err(|_| bad("frontier degree"))?;
            if id != parents.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("non-contiguous ids: expected {}, got {id}", parents.len()),
                });
            }
            let parent = match parent {
                -1 if id == 0 => None,
                -1 => return Err(Error::Parse { line, msg: format!("second root {id}") }),
                p if p < 0 => return Err(bad("parent")),
                p if id == 0 => {
                    return Err(Error::Parse { line, msg: format!("root has parent {p}") })
                }
                p if p as usize >= id => {
                    return Err(Error::Parse { line, msg: format!("parent {p} after child {id}") })
                }
                p => Some(p as usize),
            };
            parents.push(parent);
            frontier.push(fr);
        }
        Self::build(&parents, &frontier, strict).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
    }
}

/// Parameters of one Galton–Watson draw.
#[derive(Debug, Clone)]
pub struct TreeSampleSpec {
    pub dist: OffspringDistribution,
    pub depth_cap: u32,
    /// Condition on some vertex reaching `depth_cap` (rejection sampling).
    pub survival_required: bool,
    pub master_seed: u64,
    pub sample_index: u64,
}

/// Breadth-first Galton–Watson sample to `depth_cap`.
///
/// Each vertex draws its offspring count from a stream keyed by
/// `(master_seed, sample_index, attempt, birth order)`, so the output is a
/// pure function of the spec. Vertices at the cap record their draw as a
/// frontier count.
pub fn sample_tree(spec: &TreeSampleSpec) -> Result<RootedTree> {
    sample_tree_with_budget(spec, REJECTION_BUDGET)
}

pub(crate) fn sample_tree_with_budget(spec: &TreeSampleSpec, budget: u64) -> Result<RootedTree> {
    if spec.survival_required && spec.depth_cap == 0 {
        return Err(Error::InvalidParameter("depth_cap must be >= 1 when survival is required".into()));
    }
    let sampler = spec.dist.sampler();
    let mut attempt = 0u64;
    loop {
        let base = rng::key(&[spec.master_seed, rng::domain::TREE, spec.sample_index, attempt]);
        let (tree, reached) = grow(&sampler, spec.depth_cap, base);
        if reached || !spec.survival_required {
            return Ok(tree);
        }
        attempt += 1;
        if attempt >= budget {
            return Err(Error::RejectionBudgetExhausted(attempt));
        }
    }
}

fn grow(sampler: &crate::dist::DiscreteSampler, cap: u32, base: u64) -> (RootedTree, bool) {
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut depth = vec![0u32];
    let mut frontier = vec![0u32];
    let mut queue = VecDeque::from([0usize]);
    let mut reached = cap == 0;
    while let Some(v) = queue.pop_front() {
        let mut r = rng::stream(rng::child_key(base, v as u64));
        let z = sampler.sample(&mut r);
        if depth[v] == cap {
            frontier[v] = z;
            continue;
        }
        for _ in 0..z {
            let c = parent.len();
            parent.push(Some(v));
            depth.push(depth[v] + 1);
            frontier.push(0);
            if depth[v] + 1 == cap {
                reached = true;
            }
            queue.push_back(c);
        }
    }
    let tree = RootedTree::from_parents(&parent, &frontier).expect("sampler builds valid trees");
    (tree, reached)
}
