//! Streaming compiler engine chain.

use std::any::Any;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::gate::{Command, GateKind, QubitId};
use crate::meta::MetaState;

/// A compiler engine. Receives batches of commands and forwards zero or more
/// commands to `out`. Stages must preserve the relative order of commands that
/// share a qubit, and must hold nothing back after `flush`.
pub trait Stage {
    fn receive(&mut self, cmds: Vec<Command>, out: &mut Vec<Command>) -> Result<()>;

    fn flush(&mut self, out: &mut Vec<Command>) -> Result<()>;

    fn name(&self) -> &str;

    fn as_any(&self) -> &dyn Any;
}

/// Terminal stage of a pipeline.
pub trait Backend {
    fn receive(&mut self, cmds: &[Command]) -> Result<()>;

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }

    /// Whether the backend understands `Loop` tags; if not, loops are unrolled.
    fn supports_loops(&self) -> bool {
        false
    }
}

/// Front end of the compiler: allocates qubits, applies meta-instructions and
/// pushes commands through the stages into the backend.
pub struct Pipeline<B> {
    stages: Vec<Box<dyn Stage>>,
    backend: B,
    live: BTreeSet<QubitId>,
    next_id: u32,
    pub(crate) meta: MetaState,
}

impl<B: Backend> Pipeline<B> {
    pub fn new(backend: B) -> Self {
        Self {
            stages: Vec::new(),
            backend,
            live: BTreeSet::new(),
            next_id: 0,
            meta: MetaState::default(),
        }
    }

    pub fn with_stage(mut self, stage: impl Stage + 'static) -> Self {
        self.add_stage(stage);
        self
    }

    pub fn add_stage(&mut self, stage: impl Stage + 'static) {
        self.stages.push(Box::new(stage));
    }

    pub fn add_boxed_stage(&mut self, stage: Box<dyn Stage>) {
        self.stages.push(stage);
    }

    /// Controls every command inside control contexts, disabling the
    /// compute/uncompute exception.
    pub fn set_naive_control(&mut self, naive: bool) {
        self.meta.naive = naive;
    }

    pub fn naive_control(&self) -> bool {
        self.meta.naive
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn backend_mut(&mut self) -> &mut B {
        &mut self.backend
    }

    pub fn into_backend(self) -> B {
        self.backend
    }

    /// First stage of type `T`, if any.
    pub fn stage<T: 'static>(&self) -> Option<&T> {
        self.stages.iter().find_map(|s| s.as_any().downcast_ref::<T>())
    }

    pub fn live_qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.live.iter().copied()
    }

    pub fn is_live(&self, q: QubitId) -> bool {
        self.live.contains(&q)
    }

    pub fn allocate(&mut self) -> Result<QubitId> {
        if self.meta.in_loop() {
            return Err(Error::AllocateInLoop);
        }
        let q = QubitId(self.next_id);
        self.next_id += 1;
        self.live.insert(q);
        self.dispatch(vec![Command::single(GateKind::Allocate, q)])?;
        Ok(q)
    }

    /// Allocates `n` qubits.
    ///
    /// # Panics
    /// Panics if a downstream stage fails while receiving the allocations or
    /// if called inside a backend-supported loop; use [`Pipeline::allocate`]
    /// to handle those cases.
    pub fn allocate_qureg(&mut self, n: usize) -> Vec<QubitId> {
        (0..n).map(|_| self.allocate().expect("allocation failed")).collect()
    }

    pub fn try_allocate_qureg(&mut self, n: usize) -> Result<Vec<QubitId>> {
        (0..n).map(|_| self.allocate()).collect()
    }

    pub fn deallocate(&mut self, q: QubitId) -> Result<()> {
        if self.meta.in_loop() {
            return Err(Error::AllocateInLoop);
        }
        if !self.live.remove(&q) {
            return Err(Error::DeadQubitUse(q));
        }
        self.dispatch(vec![Command::single(GateKind::Deallocate, q)])
    }

    pub fn deallocate_all(&mut self, qs: &[QubitId]) -> Result<()> {
        qs.iter().try_for_each(|&q| self.deallocate(q))
    }

    /// Sends commands through the active meta-instructions and the stages.
    pub fn send(&mut self, cmds: Vec<Command>) -> Result<()> {
        let mut batch = Vec::with_capacity(cmds.len());
        for cmd in cmds {
            if cmd.gate().is_bookkeeping() {
                return Err(Error::InvalidParameter(
                    "use allocate/deallocate for qubit bookkeeping".into(),
                ));
            }
            cmd.validate()?;
            if let Some(q) = cmd.all_qubits().find(|q| !self.live.contains(q)) {
                return Err(Error::DeadQubitUse(q));
            }
            let cmd = self.meta.emit(cmd)?;
            batch.push(cmd);
        }
        self.dispatch(batch)
    }

    pub fn send_one(&mut self, cmd: Command) -> Result<()> {
        self.send(vec![cmd])
    }

    /// Drains every stage in order and then the backend. Idempotent.
    pub fn flush(&mut self) -> Result<()> {
        for i in 0..self.stages.len() {
            let mut out = Vec::new();
            self.stages[i].flush(&mut out)?;
            self.dispatch_from(i + 1, out)?;
        }
        self.backend.flush()
    }

    pub(crate) fn backend_supports_loops(&self) -> bool {
        self.backend.supports_loops()
    }

    fn dispatch(&mut self, cmds: Vec<Command>) -> Result<()> {
        self.dispatch_from(0, cmds)
    }

    fn dispatch_from(&mut self, start: usize, mut batch: Vec<Command>) -> Result<()> {
        for stage in &mut self.stages[start..] {
            if batch.is_empty() {
                return Ok(());
            }
            let mut out = Vec::with_capacity(batch.len());
            stage.receive(batch, &mut out)?;
            batch = out;
        }
        if batch.is_empty() {
            return Ok(());
        }
        self.backend.receive(&batch)
    }
}

/// Runs a command list through a sequence of stages, flushing at the end.
pub fn run_stages(stages: &mut [Box<dyn Stage>], cmds: Vec<Command>) -> Result<Vec<Command>> {
    fn pass(stages: &mut [Box<dyn Stage>], mut batch: Vec<Command>) -> Result<Vec<Command>> {
        for stage in stages.iter_mut() {
            let mut out = Vec::with_capacity(batch.len());
            stage.receive(batch, &mut out)?;
            batch = out;
        }
        Ok(batch)
    }
    let mut result = pass(stages, cmds)?;
    for i in 0..stages.len() {
        let mut out = Vec::new();
        stages[i].flush(&mut out)?;
        result.extend(pass(&mut stages[i + 1..], out)?);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::CommandCollector;

    #[test]
    fn ids_are_monotone_and_never_reused() {
        let mut eng = Pipeline::new(CommandCollector::default());
        let a = eng.allocate().unwrap();
        let b = eng.allocate().unwrap();
        assert_eq!((a, b), (QubitId(0), QubitId(1)));
        eng.deallocate(a).unwrap();
        assert_eq!(eng.allocate().unwrap(), QubitId(2));
    }

    #[test]
    fn identity_pipeline_forwards() {
        let mut eng = Pipeline::new(CommandCollector::default());
        let q = eng.allocate().unwrap();
        eng.send(vec![Command::single(GateKind::H, q)]).unwrap();
        eng.flush().unwrap();
        let cmds = eng.backend().commands();
        assert_eq!(cmds.len(), 2);
        assert_eq!(cmds[1], Command::single(GateKind::H, q));
    }

    #[test]
    fn dead_qubit_use_is_rejected() {
        let mut eng = Pipeline::new(CommandCollector::default());
        let q = eng.allocate().unwrap();
        eng.deallocate(q).unwrap();
        assert_eq!(
            eng.send(vec![Command::single(GateKind::X, q)]),
            Err(Error::DeadQubitUse(q))
        );
        assert_eq!(
            eng.send(vec![Command::single(GateKind::X, QubitId(7))]),
            Err(Error::DeadQubitUse(QubitId(7)))
        );
    }

    #[test]
    fn flush_on_empty_pipeline_is_noop() {
        let mut eng = Pipeline::new(CommandCollector::default());
        eng.flush().unwrap();
        eng.flush().unwrap();
        assert!(eng.backend().commands().is_empty());
    }
}
