//! Connected-subset enumeration on small undirected graphs.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    Continue,
    Stop,
}

/// Calls `f` once for every connected vertex set of size `1..=max_size`.
///
/// Sets are grown from their smallest vertex with an exclusive-neighbourhood
/// extension rule, so each set is produced exactly once. With
/// `anchor = Some(r)` only sets containing `r` are produced.
pub fn for_each_connected_set<F>(adj: &[Vec<usize>], anchor: Option<usize>, max_size: usize, f: &mut F)
where
    F: FnMut(&[usize]) -> Visit,
{
    let n = adj.len();
    if max_size == 0 {
        return;
    }
    // for an anchored walk, the anchor plays the role of the smallest vertex
    let rank: Vec<usize> = match anchor {
        Some(r) => (0..n).map(|v| if v == r { 0 } else { v + 1 }).collect(),
        None => (0..n).collect(),
    };
    let starts: Vec<usize> = match anchor {
        Some(r) => vec![r],
        None => (0..n).collect(),
    };
    let mut state = State { adj, rank: &rank, in_set: vec![false; n], near: vec![0u32; n], set: Vec::new() };
    for s in starts {
        state.enter(s);
        let ext: Vec<usize> = adj[s].iter().copied().filter(|&u| rank[u] > rank[s]).collect();
        let stop = state.extend(ext, rank[s], max_size, f);
        state.leave(s);
        if stop {
            return;
        }
    }
}

struct State<'a> {
    adj: &'a [Vec<usize>],
    rank: &'a [usize],
    in_set: Vec<bool>,
    /// how many set members are adjacent to (or equal) each vertex
    near: Vec<u32>,
    set: Vec<usize>,
}

impl State<'_> {
    fn enter(&mut self, v: usize) {
        self.in_set[v] = true;
        self.set.push(v);
        self.near[v] += 1;
        for &u in &self.adj[v] {
            self.near[u] += 1;
        }
    }

    fn leave(&mut self, v: usize) {
        self.in_set[v] = false;
        self.set.pop();
        self.near[v] -= 1;
        for &u in &self.adj[v] {
            self.near[u] -= 1;
        }
    }

    fn extend<F>(&mut self, mut ext: Vec<usize>, floor: usize, max_size: usize, f: &mut F) -> bool
    where
        F: FnMut(&[usize]) -> Visit,
    {
        if f(&self.set) == Visit::Stop {
            return true;
        }
        if self.set.len() == max_size {
            return false;
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &self.adj[w] {
                if self.rank[u] > floor && self.near[u] == 0 && !next.contains(&u) {
                    next.push(u);
                }
            }
            self.enter(w);
            let stop = self.extend(next, floor, max_size, f);
            self.leave(w);
            if stop {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn brute(adj: &[Vec<usize>], anchor: Option<usize>, max_size: usize) -> BTreeSet<Vec<usize>> {
        let n = adj.len();
        let mut out = BTreeSet::new();
        for mask in 1usize..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if set.len() > max_size || anchor.is_some_and(|r| !set.contains(&r)) {
                continue;
            }
            let mut seen = vec![set[0]];
            let mut i = 0;
            while i < seen.len() {
                for &u in &adj[seen[i]] {
                    if mask & (1 << u) != 0 && !seen.contains(&u) {
                        seen.push(u);
                    }
                }
                i += 1;
            }
            if seen.len() == set.len() {
                out.insert(set);
            }
        }
        out
    }

    fn listed(adj: &[Vec<usize>], anchor: Option<usize>, max_size: usize) -> Vec<Vec<usize>> {
        let mut got = Vec::new();
        for_each_connected_set(adj, anchor, max_size, &mut |s: &[usize]| {
            let mut s = s.to_vec();
            s.sort_unstable();
            got.push(s);
            Visit::Continue
        });
        got
    }

    #[test]
    fn matches_subset_scan_on_small_graphs() {
        let cycle: Vec<Vec<usize>> = (0..6).map(|i| vec![(i + 1) % 6, (i + 5) % 6]).collect();
        let star: Vec<Vec<usize>> = (0..6).map(|i| if i == 2 { vec![0, 1, 3, 4, 5] } else { vec![2] }).collect();
        for adj in [cycle, star] {
            for anchor in [None, Some(0), Some(2), Some(5)] {
                for k in 1..=6 {
                    let got = listed(&adj, anchor, k);
                    let uniq: BTreeSet<Vec<usize>> = got.iter().cloned().collect();
                    assert_eq!(uniq.len(), got.len(), "duplicate set");
                    assert_eq!(uniq, brute(&adj, anchor, k));
                }
            }
        }
    }
}
