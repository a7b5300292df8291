use std::any::Any;
use std::collections::HashSet;

use crate::engine::Stage;
use crate::error::{Error, Result};
use crate::gate::{Command, GateKind, QubitId};

use super::{greedy_order, grid_route, oets_route, snake_embed, HardwareGraph, Placement};

pub const DEFAULT_BUFFER: usize = 1000;

/// Enforces nearest-neighbor connectivity. Output commands act on physical
/// positions (`QubitId(p)` is position `p`).
///
/// A new qubit takes the position equal to its id when that is free, else
/// the lowest free position. Commands are buffered. Each round first emits every buffered command that
/// is executable in the current placement without overtaking a blocked
/// command on a shared qubit, then moves qubits into the order chosen by the
/// greedy chain heuristic using parallel swap layers.
#[derive(Debug)]
pub struct MapperStage {
    graph: HardwareGraph,
    placement: Placement,
    buffer: Vec<Command>,
    buffer_limit: usize,
    swaps: usize,
    rounds: usize,
}

impl MapperStage {
    pub fn new(graph: HardwareGraph) -> Self {
        Self::with_buffer(graph, DEFAULT_BUFFER)
    }

    pub fn with_buffer(graph: HardwareGraph, buffer_limit: usize) -> Self {
        Self {
            graph,
            placement: Placement::new(graph.size()),
            buffer: Vec::new(),
            buffer_limit: buffer_limit.max(1),
            swaps: 0,
            rounds: 0,
        }
    }

    pub fn graph(&self) -> HardwareGraph {
        self.graph
    }

    /// Current logical-to-physical placement; final once the stage is flushed.
    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn swaps_inserted(&self) -> usize {
        self.swaps
    }

    pub fn routing_rounds(&self) -> usize {
        self.rounds
    }

    fn place_new(&mut self, q: QubitId, out: &mut Vec<Command>) -> Result<usize> {
        if self.placement.first_free().is_none() {
            // a buffered deallocation may free a position
            self.drain(out)?;
        }
        let own = q.index();
        let pos = if own < self.graph.size() && self.placement.qubit_at(own).is_none() {
            own
        } else {
            self.placement.first_free().ok_or(Error::CircuitTooWide {
                qubits: self.placement.len() + 1,
                positions: self.graph.size(),
            })?
        };
        self.placement.place(q, pos)?;
        Ok(pos)
    }

    fn physical(&self, cmd: &Command) -> Command {
        let map = |qs: &[QubitId]| -> Vec<QubitId> {
            qs.iter()
                .map(|q| QubitId(self.placement.position(*q).expect("placed") as u32))
                .collect()
        };
        let mut c = cmd.clone();
        c.targets = map(&cmd.targets);
        c.controls = map(&cmd.controls);
        c.classical = map(&cmd.classical);
        c
    }

    fn executable(&self, cmd: &Command) -> bool {
        let qs: Vec<usize> = cmd
            .qubits()
            .map(|q| self.placement.position(q).expect("placed"))
            .collect();
        qs.len() < 2 || self.graph.are_adjacent(qs[0], qs[1])
    }

    /// Emits executable buffered commands; returns how many were emitted.
    fn execute(&mut self, out: &mut Vec<Command>) -> usize {
        let mut blocked: HashSet<QubitId> = HashSet::new();
        let mut remaining = Vec::with_capacity(self.buffer.len());
        let mut emitted = 0;
        for cmd in std::mem::take(&mut self.buffer) {
            if cmd.all_qubits().any(|q| blocked.contains(&q)) || !self.executable(&cmd) {
                blocked.extend(cmd.all_qubits());
                remaining.push(cmd);
                continue;
            }
            out.push(self.physical(&cmd));
            if matches!(cmd.gate(), GateKind::Deallocate) {
                self.placement.remove(cmd.targets()[0]);
            }
            emitted += 1;
        }
        self.buffer = remaining;
        emitted
    }

    fn route(&mut self, out: &mut Vec<Command>) -> Result<()> {
        let order = match self.graph {
            HardwareGraph::Linear(_) => greedy_order(&self.buffer, &self.placement),
            HardwareGraph::Grid { cols, .. } => {
                // order by position along the snake the target is laid on
                let along = Placement::from_pairs(
                    self.graph.size(),
                    self.placement.iter().map(|(q, p)| (q, snake_index(p, cols))),
                )?;
                greedy_order(&self.buffer, &along)
            }
        };
        let target = match self.graph {
            HardwareGraph::Linear(n) => Placement::from_pairs(n, order.iter().enumerate().map(|(i, &q)| (q, i)))?,
            HardwareGraph::Grid { rows, cols } => snake_embed(&order, rows, cols)?,
        };
        let perm = self.placement.permutation_to(&target)?;
        let schedule = match self.graph {
            HardwareGraph::Linear(_) => oets_route(&perm)?,
            HardwareGraph::Grid { rows, cols } => grid_route(&perm, rows, cols)?,
        };
        for layer in &schedule.layers {
            for &(a, b) in layer {
                if self.placement.qubit_at(a).is_none() && self.placement.qubit_at(b).is_none() {
                    self.placement.swap_positions(a, b);
                    continue;
                }
                out.push(Command::swap(QubitId(a as u32), QubitId(b as u32)));
                self.placement.swap_positions(a, b);
                self.swaps += 1;
            }
        }
        self.rounds += 1;
        Ok(())
    }

    /// Runs rounds until the buffer is empty.
    fn drain(&mut self, out: &mut Vec<Command>) -> Result<()> {
        self.execute(out);
        while !self.buffer.is_empty() {
            self.route(out)?;
            if self.execute(out) == 0 {
                return Err(Error::UnmappableCommand(self.buffer[0].to_string()));
            }
        }
        Ok(())
    }
}

fn snake_index(pos: usize, cols: usize) -> usize {
    let (r, c) = (pos / cols, pos % cols);
    r * cols + if r % 2 == 0 { c } else { cols - 1 - c }
}

impl Stage for MapperStage {
    fn receive(&mut self, cmds: Vec<Command>, out: &mut Vec<Command>) -> Result<()> {
        for cmd in cmds {
            if cmd.qubits().count() > 2 {
                return Err(Error::UnmappableCommand(cmd.to_string()));
            }
            if matches!(cmd.gate(), GateKind::Allocate) {
                let pos = self.place_new(cmd.targets()[0], out)?;
                let mut c = cmd;
                c.targets = vec![QubitId(pos as u32)];
                out.push(c);
                continue;
            }
            let mut unplaced: Vec<QubitId> = cmd
                .all_qubits()
                .filter(|q| self.placement.position(*q).is_none())
                .collect();
            unplaced.sort_unstable();
            for q in unplaced {
                self.place_new(q, out)?;
            }
            self.buffer.push(cmd);
            if self.buffer.len() >= self.buffer_limit {
                self.execute(out);
                if self.buffer.len() >= self.buffer_limit {
                    self.route(out)?;
                    self.execute(out);
                }
            }
        }
        Ok(())
    }

    fn flush(&mut self, out: &mut Vec<Command>) -> Result<()> {
        self.drain(out)
    }

    fn name(&self) -> &str {
        "mapper"
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_stages;

    fn q(i: u32) -> QubitId {
        QubitId(i)
    }

    fn map(graph: HardwareGraph, cmds: Vec<Command>) -> Vec<Command> {
        let mut stages: Vec<Box<dyn Stage>> = vec![Box::new(MapperStage::new(graph))];
        run_stages(&mut stages, cmds).unwrap()
    }

    #[test]
    fn nearest_neighbor_circuit_needs_no_swaps() {
        let cmds = vec![
            Command::cnot(q(0), q(1)),
            Command::cnot(q(1), q(2)),
            Command::cnot(q(2), q(3)),
        ];
        let out = map(HardwareGraph::Linear(4), cmds.clone());
        assert_eq!(out, cmds);
    }

    #[test]
    fn distant_cnot_gets_swaps() {
        let cmds = vec![
            Command::single(GateKind::H, q(0)),
            Command::single(GateKind::H, q(1)),
            Command::single(GateKind::H, q(2)),
            Command::single(GateKind::H, q(3)),
            Command::cnot(q(0), q(3)),
        ];
        let out = map(HardwareGraph::Linear(4), cmds);
        assert!(out.iter().any(|c| matches!(c.gate(), GateKind::Swap)));
        let g = HardwareGraph::Linear(4);
        for c in &out {
            let qs: Vec<usize> = c.qubits().map(|q| q.index()).collect();
            if qs.len() == 2 {
                assert!(g.are_adjacent(qs[0], qs[1]));
            }
        }
    }

    #[test]
    fn too_many_qubits() {
        let mut stage = MapperStage::new(HardwareGraph::Linear(2));
        let mut out = Vec::new();
        let r = stage.receive(
            (0..3).map(|i| Command::single(GateKind::Allocate, q(i))).collect(),
            &mut out,
        );
        assert_eq!(
            r,
            Err(Error::CircuitTooWide {
                qubits: 3,
                positions: 2
            })
        );
    }
}
