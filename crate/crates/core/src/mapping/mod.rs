//! Nearest-neighbor mapping for linear chains and 2D grids.

mod greedy;
mod matching;
mod route;
mod stage;

use std::collections::BTreeMap;

pub use greedy::greedy_order;
pub use matching::{matching_decomposition, matching_decomposition_by, BipartiteColumnGraph};
pub use route::{grid_route, oets_route, snake_embed, snake_position};
pub use stage::MapperStage;

use crate::error::{Error, Result};
use crate::gate::QubitId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HardwareGraph {
    /// Positions `0..n` with edges `(i, i+1)`.
    Linear(usize),
    /// Row-major positions `row * cols + col` with 4-neighbor edges.
    Grid { rows: usize, cols: usize },
}

impl HardwareGraph {
    pub fn size(&self) -> usize {
        match *self {
            HardwareGraph::Linear(n) => n,
            HardwareGraph::Grid { rows, cols } => rows * cols,
        }
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        if a >= self.size() || b >= self.size() {
            return false;
        }
        match *self {
            HardwareGraph::Linear(_) => a.abs_diff(b) == 1,
            HardwareGraph::Grid { cols, .. } => {
                let (ra, ca) = (a / cols, a % cols);
                let (rb, cb) = (b / cols, b % cols);
                ra.abs_diff(rb) + ca.abs_diff(cb) == 1
            }
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.size();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.are_adjacent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Bijection between logical qubits and physical positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    to_pos: BTreeMap<QubitId, usize>,
    at: Vec<Option<QubitId>>,
}

impl Placement {
    pub fn new(positions: usize) -> Self {
        Self {
            to_pos: BTreeMap::new(),
            at: vec![None; positions],
        }
    }

    pub fn from_pairs(positions: usize, pairs: impl IntoIterator<Item = (QubitId, usize)>) -> Result<Self> {
        let mut p = Self::new(positions);
        for (q, pos) in pairs {
            p.place(q, pos)?;
        }
        Ok(p)
    }

    pub fn positions(&self) -> usize {
        self.at.len()
    }

    pub fn len(&self) -> usize {
        self.to_pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_pos.is_empty()
    }

    pub fn place(&mut self, q: QubitId, pos: usize) -> Result<()> {
        if pos >= self.at.len() {
            return Err(Error::InvalidPermutation(format!("position {pos} out of range")));
        }
        if self.at[pos].is_some() || self.to_pos.contains_key(&q) {
            return Err(Error::InvalidPermutation(format!("{q} at {pos} collides")));
        }
        self.at[pos] = Some(q);
        self.to_pos.insert(q, pos);
        Ok(())
    }

    pub fn remove(&mut self, q: QubitId) -> Option<usize> {
        let pos = self.to_pos.remove(&q)?;
        self.at[pos] = None;
        Some(pos)
    }

    pub fn position(&self, q: QubitId) -> Option<usize> {
        self.to_pos.get(&q).copied()
    }

    pub fn qubit_at(&self, pos: usize) -> Option<QubitId> {
        self.at.get(pos).copied().flatten()
    }

    pub fn first_free(&self) -> Option<usize> {
        self.at.iter().position(Option::is_none)
    }

    /// Exchanges the contents of two positions.
    pub fn swap_positions(&mut self, a: usize, b: usize) {
        self.at.swap(a, b);
        for p in [a, b] {
            if let Some(q) = self.at[p] {
                self.to_pos.insert(q, p);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (QubitId, usize)> + '_ {
        self.to_pos.iter().map(|(q, p)| (*q, *p))
    }

    pub fn qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.to_pos.keys().copied()
    }

    /// Full permutation moving every qubit from its position in `self` to its
    /// position in `target`. Empty positions are sent to the remaining free
    /// destinations in increasing order. `perm[p]` is the destination of the
    /// content of position `p`.
    pub fn permutation_to(&self, target: &Placement) -> Result<Vec<usize>> {
        let n = self.positions();
        if target.positions() != n || target.len() != self.len() {
            return Err(Error::InvalidPermutation("placements differ in size".into()));
        }
        let mut perm = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for (q, p) in self.iter() {
            let d = target
                .position(q)
                .ok_or_else(|| Error::InvalidPermutation(format!("{q} missing from target")))?;
            perm[p] = d;
            used[d] = true;
        }
        let mut free = (0..n).filter(|&d| !used[d]);
        for slot in perm.iter_mut().filter(|s| **s == usize::MAX) {
            *slot = free.next().expect("equal counts of holes");
        }
        Ok(perm)
    }
}

/// Layers of disjoint adjacent transpositions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SwapSchedule {
    pub layers: Vec<Vec<(usize, usize)>>,
}

impl SwapSchedule {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn swap_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Applies the schedule to items stored by position.
    pub fn apply<T>(&self, items: &mut [T]) {
        for layer in &self.layers {
            for &(a, b) in layer {
                items.swap(a, b);
            }
        }
    }

    /// `result[p]` is where the content of position `p` ends up.
    pub fn realized_permutation(&self, n: usize) -> Vec<usize> {
        let mut items: Vec<usize> = (0..n).collect();
        self.apply(&mut items);
        let mut dest = vec![0; n];
        for (pos, &src) in items.iter().enumerate() {
            dest[src] = pos;
        }
        dest
    }

    /// Every pair is a graph edge and no position repeats within a layer.
    pub fn is_valid_for(&self, graph: &HardwareGraph) -> bool {
        self.layers.iter().all(|layer| {
            let mut seen = std::collections::HashSet::new();
            layer
                .iter()
                .all(|&(a, b)| graph.are_adjacent(a, b) && seen.insert(a) && seen.insert(b))
        })
    }
}

/// Checks that `perm` is a bijection on `0..perm.len()`.
pub fn check_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &d in perm {
        if d >= perm.len() || std::mem::replace(&mut seen[d], true) {
            return Err(Error::InvalidPermutation(format!("{perm:?}")));
        }
    }
    Ok(())
}
