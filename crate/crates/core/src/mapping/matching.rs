use crate::error::{Error, Result};

/// Bipartite multigraph between source columns (left) and destination
/// columns (right); one edge per qubit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BipartiteColumnGraph {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteColumnGraph {
    pub fn new(left: usize, right: usize) -> Self {
        Self {
            left,
            right,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> usize {
        self.edges.push((u, v));
        self.edges.len() - 1
    }

    /// Common degree of every node, if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        if self.left != self.right {
            return None;
        }
        let mut dl = vec![0usize; self.left];
        let mut dr = vec![0usize; self.right];
        for &(u, v) in &self.edges {
            if u >= self.left || v >= self.right {
                return None;
            }
            dl[u] += 1;
            dr[v] += 1;
        }
        let d = dl.first().copied().unwrap_or(0);
        (dl.iter().chain(&dr).all(|&x| x == d)).then_some(d)
    }
}

/// Splits a `d`-regular bipartite multigraph into `d` perfect matchings.
/// Each matching lists edge indices, one per left node in left-node order.
pub fn matching_decomposition(g: &BipartiteColumnGraph) -> Result<Vec<Vec<usize>>> {
    matching_decomposition_by(g, |_, _| 0)
}

/// As [`matching_decomposition`], but while building matching `k` the
/// augmenting search tries edges in increasing `rank(k, edge)` order.
pub fn matching_decomposition_by(
    g: &BipartiteColumnGraph,
    rank: impl Fn(usize, usize) -> usize,
) -> Result<Vec<Vec<usize>>> {
    let d = g.regular_degree().ok_or(Error::NotRegular)?;
    let mut remaining = vec![true; g.edges.len()];
    let mut out = Vec::with_capacity(d);
    for k in 0..d {
        let m = perfect_matching(g, &remaining, |e| rank(k, e)).ok_or(Error::NotRegular)?;
        for &e in &m {
            remaining[e] = false;
        }
        out.push(m);
    }
    Ok(out)
}

/// Kuhn's augmenting-path matching over the edges still marked available.
fn perfect_matching(g: &BipartiteColumnGraph, available: &[bool], rank: impl Fn(usize) -> usize) -> Option<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.left];
    for (e, &(u, _)) in g.edges.iter().enumerate() {
        if available[e] {
            adj[u].push(e);
        }
    }
    for list in &mut adj {
        list.sort_by_key(|&e| rank(e));
    }
    let mut match_right: Vec<Option<usize>> = vec![None; g.right];

    fn augment(
        u: usize,
        g: &BipartiteColumnGraph,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &e in &adj[u] {
            let v = g.edges[e].1;
            if seen[v] {
                continue;
            }
            seen[v] = true;
            let free = match match_right[v] {
                None => true,
                Some(other) => augment(g.edges[other].0, g, adj, seen, match_right),
            };
            if free {
                match_right[v] = Some(e);
                return true;
            }
        }
        false
    }

    for u in 0..g.left {
        let mut seen = vec![false; g.right];
        if !augment(u, g, &adj, &mut seen, &mut match_right) {
            return None;
        }
    }
    let mut by_left = vec![0usize; g.left];
    for e in match_right.into_iter().flatten() {
        by_left[g.edges[e].0] = e;
    }
    Some(by_left)
}
