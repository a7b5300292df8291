//! Windowed peephole optimizer.
//!
//! Each incoming command is compared with the most recent pending command on
//! its qubits. If that command is the last one on every qubit involved and
//! acts on exactly the same qubits, the pair is cancelled (inverse gates) or
//! merged (same-axis rotations). Pairing is stack-like, so nested patterns
//! such as `A B B† A†` collapse completely.

use std::any::Any;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::{PI, TAU};

use crate::decompose::{DecomposeStage, GateSet};
use crate::engine::{run_stages, Stage};
use crate::error::Result;
use crate::gate::{is_zero_angle, Command, GateKind, QubitId, Tag};

pub const DEFAULT_WINDOW: usize = 20;

#[derive(Debug)]
pub struct OptimizerStage {
    window: usize,
    /// Pending commands by sequence number; `None` marks removed entries.
    arena: VecDeque<Option<Command>>,
    base: u64,
    per_qubit: HashMap<QubitId, VecDeque<u64>>,
}

enum Combined {
    Cancel,
    Merge(Command),
}

impl OptimizerStage {
    /// # Panics
    /// Panics if `window < 2`.
    pub fn new(window: usize) -> Self {
        assert!(window >= 2, "optimizer window must be at least 2");
        Self {
            window,
            arena: VecDeque::new(),
            base: 0,
            per_qubit: HashMap::new(),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Largest number of commands currently pending on one qubit.
    pub fn max_pending(&self) -> usize {
        self.per_qubit.values().map(VecDeque::len).max().unwrap_or(0)
    }

    fn entry(&self, seq: u64) -> Option<&Command> {
        self.arena[(seq - self.base) as usize].as_ref()
    }

    fn push(&mut self, cmd: Command, out: &mut Vec<Command>) {
        let seq = self.base + self.arena.len() as u64;
        let qubits: Vec<QubitId> = cmd.all_qubits().collect();
        self.arena.push_back(Some(cmd));
        for q in &qubits {
            self.per_qubit.entry(*q).or_default().push_back(seq);
        }
        for q in qubits {
            while self.per_qubit.get(&q).is_some_and(|d| d.len() > self.window) {
                let oldest = self.per_qubit[&q][0];
                self.emit(oldest, out);
            }
        }
    }

    /// Emits the pending command `seq` after every earlier command sharing a
    /// qubit with it.
    fn emit(&mut self, seq: u64, out: &mut Vec<Command>) {
        let qubits: Vec<QubitId> = self.entry(seq).expect("emitting a live entry").all_qubits().collect();
        for q in &qubits {
            while let Some(&front) = self.per_qubit.get(q).and_then(|d| d.front()) {
                if front == seq {
                    break;
                }
                self.emit(front, out);
            }
        }
        for q in &qubits {
            let d = self.per_qubit.get_mut(q).expect("qubit deque");
            d.pop_front();
            if d.is_empty() {
                self.per_qubit.remove(q);
            }
        }
        let cmd = self.arena[(seq - self.base) as usize].take().expect("live entry");
        out.push(cmd);
        self.compact();
    }

    fn remove_last(&mut self, seq: u64) {
        let qubits: Vec<QubitId> = self.entry(seq).expect("live").all_qubits().collect();
        for q in &qubits {
            let d = self.per_qubit.get_mut(q).expect("qubit deque");
            debug_assert_eq!(d.back(), Some(&seq));
            d.pop_back();
            if d.is_empty() {
                self.per_qubit.remove(q);
            }
        }
        self.arena[(seq - self.base) as usize] = None;
        self.compact();
    }

    fn compact(&mut self) {
        while matches!(self.arena.front(), Some(None)) {
            self.arena.pop_front();
            self.base += 1;
        }
        while matches!(self.arena.back(), Some(None)) {
            self.arena.pop_back();
        }
    }

    /// Sequence number of the pending command that is last on every qubit of
    /// `cmd` and touches no other qubit.
    fn partner(&self, cmd: &Command) -> Option<u64> {
        let mut last = None;
        let mut count = 0;
        for q in cmd.all_qubits() {
            let s = *self.per_qubit.get(&q)?.back()?;
            if last.is_some_and(|l| l != s) {
                return None;
            }
            last = Some(s);
            count += 1;
        }
        let s = last?;
        let prev = self.entry(s)?;
        (prev.all_qubits().count() == count).then_some(s)
    }

    fn process(&mut self, cmd: Command, out: &mut Vec<Command>) {
        match cmd.gate() {
            GateKind::Allocate => {
                out.push(cmd);
                return;
            }
            GateKind::Deallocate => {
                let q = cmd.targets()[0];
                while let Some(&front) = self.per_qubit.get(&q).and_then(|d| d.front()) {
                    self.emit(front, out);
                }
                out.push(cmd);
                return;
            }
            _ => {}
        }
        if is_identity(&cmd) {
            return;
        }
        if let Some(s) = self.partner(&cmd) {
            let prev = self.entry(s).expect("live");
            match combine(prev, &cmd) {
                Some(Combined::Cancel) => {
                    self.remove_last(s);
                    return;
                }
                Some(Combined::Merge(merged)) => {
                    if is_identity(&merged) {
                        self.remove_last(s);
                    } else {
                        self.arena[(s - self.base) as usize] = Some(merged);
                    }
                    return;
                }
                None => {}
            }
        }
        self.push(cmd, out);
    }
}

impl Default for OptimizerStage {
    fn default() -> Self {
        Self::new(DEFAULT_WINDOW)
    }
}

impl Stage for OptimizerStage {
    fn receive(&mut self, cmds: Vec<Command>, out: &mut Vec<Command>) -> Result<()> {
        for cmd in cmds {
            self.process(cmd, out);
        }
        Ok(())
    }

    fn flush(&mut self, out: &mut Vec<Command>) -> Result<()> {
        while let Some(pos) = self.arena.iter().position(Option::is_some) {
            self.emit(self.base + pos as u64, out);
        }
        self.arena.clear();
        self.per_qubit.clear();
        Ok(())
    }

    fn name(&self) -> &str {
        "optimize"
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Identity rotations. Controlled `Rx/Ry/Rz(2π)` is not the identity, so
/// those are only dropped at multiples of 4π.
fn is_identity(cmd: &Command) -> bool {
    match cmd.gate() {
        GateKind::Phase(t) => is_zero_angle(*t, TAU),
        GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) => {
            let period = if cmd.controls().is_empty() { TAU } else { 2.0 * TAU };
            is_zero_angle(*t, period)
        }
        _ => false,
    }
}

fn pairable_tags(a: &[Tag], b: &[Tag]) -> bool {
    let strip = |t: &[Tag]| -> Vec<Tag> { t.iter().copied().filter(|t| !t.is_section()).collect() };
    let (a, b) = (strip(a), strip(b));
    a.is_empty() && b.is_empty()
}

fn same_set(a: &[QubitId], b: &[QubitId]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

fn combine(prev: &Command, next: &Command) -> Option<Combined> {
    if !prev.classical_controls().is_empty()
        || !next.classical_controls().is_empty()
        || !pairable_tags(prev.tags(), next.tags())
        || !same_set(prev.controls(), next.controls())
    {
        return None;
    }
    let same_targets = match prev.gate() {
        GateKind::Swap => same_set(prev.targets(), next.targets()),
        _ => prev.targets() == next.targets(),
    };
    if !same_targets {
        return None;
    }
    if prev.gate().is_inverse_of(next.gate()) {
        return Some(Combined::Cancel);
    }
    let merged = match (prev.gate(), next.gate()) {
        (GateKind::Rx(a), GateKind::Rx(b)) => GateKind::Rx(a + b),
        (GateKind::Ry(a), GateKind::Ry(b)) => GateKind::Ry(a + b),
        (GateKind::Rz(a), GateKind::Rz(b)) => GateKind::Rz(a + b),
        (GateKind::Phase(a), GateKind::Phase(b)) => {
            // keep phases in (-π, π] so repeated merging stays bounded
            let t = (a + b).rem_euclid(TAU);
            GateKind::Phase(if t > PI { t - TAU } else { t })
        }
        _ => return None,
    };
    let mut cmd = prev.clone();
    cmd.gate = merged;
    Some(Combined::Merge(cmd))
}

/// Lowers `circuit` to the target gate set with optimization, optionally
/// passing through the intermediate gate set first.
pub fn compile_with_igs(circuit: Vec<Command>, use_igs: bool, window: usize) -> Result<Vec<Command>> {
    let mut stages = compile_stages(use_igs, window);
    run_stages(&mut stages, circuit)
}

/// Stage chain used by [`compile_with_igs`].
pub fn compile_stages(use_igs: bool, window: usize) -> Vec<Box<dyn Stage>> {
    let mut stages: Vec<Box<dyn Stage>> = Vec::new();
    if use_igs {
        stages.push(Box::new(DecomposeStage::new(GateSet::Igs)));
        stages.push(Box::new(OptimizerStage::new(window)));
    }
    stages.push(Box::new(DecomposeStage::new(GateSet::Target)));
    stages.push(Box::new(OptimizerStage::new(window)));
    stages
}
