//! Meta-instructions: compute/uncompute sections, control contexts and loops.
//!
//! Inside a control context, commands belonging to a compute or uncompute
//! section opened within that context stay uncontrolled; only the action
//! between them is controlled. For `U† V U` patterns whose compute part is
//! undone regardless of the control value this yields the same unitary as
//! controlling all three parts. Soundness of that assumption is left to the
//! caller. [`Pipeline::set_naive_control`] turns the exception off.

use crate::engine::{Backend, Pipeline};
use crate::error::{Error, Result};
use crate::gate::{Command, GateKind, QubitId, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SectionKind {
    Compute,
    Uncompute,
}

#[derive(Debug)]
struct OpenSection {
    kind: SectionKind,
    recorded: Vec<Command>,
    /// Number of control frames open when the section started.
    ctx_len: usize,
}

#[derive(Debug)]
struct ControlFrame {
    qubits: Vec<QubitId>,
    /// Number of open sections when the context started.
    depth: usize,
}

#[derive(Debug, Default)]
pub(crate) struct MetaState {
    pub(crate) naive: bool,
    controls: Vec<ControlFrame>,
    sections: Vec<OpenSection>,
    loops: Vec<u32>,
}

impl MetaState {
    pub(crate) fn in_loop(&self) -> bool {
        !self.loops.is_empty()
    }

    /// Applies the open contexts to a user command.
    pub(crate) fn emit(&mut self, mut cmd: Command) -> Result<Command> {
        let depth = self.sections.len();
        let qubits: Vec<QubitId> = cmd.all_qubits().collect();
        let mut added_at = Vec::new();
        for (i, frame) in self.controls.iter().enumerate() {
            if let Some(&q) = frame.qubits.iter().find(|q| qubits.contains(q)) {
                return Err(Error::ControlTargetsOverlap(q));
            }
            if self.naive || frame.depth == depth {
                if !cmd.gate().is_unitary() {
                    return Err(Error::ControlledNonUnitary(cmd.gate().name().to_string()));
                }
                added_at.push(i);
            }
        }
        let in_compute = self.sections.iter().any(|s| s.kind == SectionKind::Compute);
        if in_compute && !cmd.gate().is_unitary() {
            return Err(Error::NonInvertibleInCompute);
        }

        cmd.tags.retain(|t| !t.is_section());
        cmd.tags.extend(self.loops.iter().map(|&k| Tag::Loop(k)));

        for section in self.sections.iter_mut().filter(|s| s.kind == SectionKind::Compute) {
            let mut rec = cmd.clone();
            for &i in added_at.iter().filter(|&&i| i >= section.ctx_len) {
                rec.controls.extend_from_slice(&self.controls[i].qubits);
            }
            section.recorded.push(rec);
        }

        for &i in &added_at {
            cmd.controls.extend_from_slice(&self.controls[i].qubits);
        }
        if let Some(s) = self.sections.last() {
            cmd.tags.push(match s.kind {
                SectionKind::Compute => Tag::Compute,
                SectionKind::Uncompute => Tag::Uncompute,
            });
        }
        Ok(cmd)
    }
}

/// Commands recorded by [`Pipeline::compute`], replayed in reverse-adjoint
/// order by [`Pipeline::uncompute`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComputeSection {
    recorded: Vec<Command>,
    uncomputed: bool,
}

impl ComputeSection {
    pub fn recorded(&self) -> &[Command] {
        &self.recorded
    }

    pub fn is_uncomputed(&self) -> bool {
        self.uncomputed
    }
}

impl<B: Backend> Pipeline<B> {
    /// Emits the commands of `body` tagged `Compute` and records them.
    pub fn compute(&mut self, body: impl FnOnce(&mut Self) -> Result<()>) -> Result<ComputeSection> {
        let ctx_len = self.meta.controls.len();
        self.meta.sections.push(OpenSection {
            kind: SectionKind::Compute,
            recorded: Vec::new(),
            ctx_len,
        });
        let res = body(self);
        let section = self.meta.sections.pop().expect("section stack");
        res?;
        Ok(ComputeSection {
            recorded: section.recorded,
            uncomputed: false,
        })
    }

    /// Emits the inverse of the recorded commands in reverse order, tagged
    /// `Uncompute`.
    pub fn uncompute(&mut self, section: &mut ComputeSection) -> Result<()> {
        if section.uncomputed {
            return Err(Error::DoubleUncompute);
        }
        let inverses = section
            .recorded
            .iter()
            .rev()
            .map(Command::inverse)
            .collect::<Result<Vec<_>>>()?;
        section.uncomputed = true;
        self.uncompute_section(|eng| {
            // recorded commands already carry their inner controls and loop tags
            let loops = std::mem::take(&mut eng.meta.loops);
            let res = eng.send(inverses);
            eng.meta.loops = loops;
            res
        })
    }

    /// Closes `section` with a hand-written body instead of the automatic
    /// inverse. The body is emitted tagged `Uncompute`, so control contexts
    /// treat it like an automatic uncompute.
    pub fn custom_uncompute(
        &mut self,
        section: &mut ComputeSection,
        body: impl FnOnce(&mut Self) -> Result<()>,
    ) -> Result<()> {
        if section.uncomputed {
            return Err(Error::DoubleUncompute);
        }
        section.uncomputed = true;
        self.uncompute_section(body)
    }

    fn uncompute_section(&mut self, body: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let ctx_len = self.meta.controls.len();
        self.meta.sections.push(OpenSection {
            kind: SectionKind::Uncompute,
            recorded: Vec::new(),
            ctx_len,
        });
        let res = body(self);
        self.meta.sections.pop();
        res
    }

    /// Adds `controls` to the commands emitted by `body`, except compute and
    /// uncompute sections opened inside the context.
    pub fn with_control(&mut self, controls: &[QubitId], body: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        if controls.is_empty() {
            return Err(Error::EmptyControls);
        }
        if let Some(&q) = controls.iter().find(|q| !self.is_live(**q)) {
            return Err(Error::DeadQubitUse(q));
        }
        let mut sorted = controls.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateQubit(w[0]));
        }
        if let Some(q) = self
            .meta
            .controls
            .iter()
            .flat_map(|f| &f.qubits)
            .find(|q| controls.contains(q))
        {
            return Err(Error::ControlTargetsOverlap(*q));
        }
        let depth = self.meta.sections.len();
        self.meta.controls.push(ControlFrame {
            qubits: controls.to_vec(),
            depth,
        });
        let res = body(self);
        self.meta.controls.pop();
        res
    }

    /// Repeats `body` `count` times: a single `Loop(count)`-tagged emission if
    /// the backend supports loops, otherwise by unrolling.
    pub fn with_loop(&mut self, count: u32, mut body: impl FnMut(&mut Self) -> Result<()>) -> Result<()> {
        if count == 0 {
            return Err(Error::InvalidLoopCount);
        }
        if count == 1 {
            return body(self);
        }
        if self.backend_supports_loops() {
            self.meta.loops.push(count);
            let res = body(self);
            self.meta.loops.pop();
            res
        } else {
            (0..count).try_for_each(|_| body(self))
        }
    }
}

/// Moves a measurement ahead of a command controlled on the measured qubit,
/// turning the quantum control into a classical one. Applies when the
/// measurement is the next use of the control qubit.
pub fn deferred_measurement(cmds: Vec<Command>) -> Vec<Command> {
    let mut cmds = cmds;
    let mut i = 0;
    while i < cmds.len() {
        let mut k = 0;
        while k < cmds[i].controls.len() {
            let q = cmds[i].controls[k];
            let next = cmds[i + 1..]
                .iter()
                .position(|c| c.all_qubits().any(|x| x == q))
                .map(|p| p + i + 1);
            let is_measure =
                next.is_some_and(|j| matches!(cmds[j].gate, GateKind::Measure) && cmds[j].classical.is_empty());
            if !is_measure {
                k += 1;
                continue;
            }
            let m = cmds.remove(next.expect("checked"));
            cmds.insert(i, m);
            i += 1;
            let cmd = &mut cmds[i];
            cmd.controls.remove(k);
            cmd.classical.push(q);
        }
        i += 1;
    }
    cmds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::CommandCollector;

    fn pipeline(naive: bool) -> (Pipeline<CommandCollector>, Vec<QubitId>) {
        let mut eng = Pipeline::new(CommandCollector::default());
        eng.set_naive_control(naive);
        let q = eng.allocate_qureg(3);
        (eng, q)
    }

    fn gates(eng: &Pipeline<CommandCollector>) -> Vec<Command> {
        eng.backend()
            .commands()
            .iter()
            .filter(|c| !c.gate().is_bookkeeping())
            .cloned()
            .collect()
    }

    #[test]
    fn compute_tags_and_records() {
        let (mut eng, q) = pipeline(false);
        let sec = eng
            .compute(|e| e.send(vec![Command::single(GateKind::H, q[0]), Command::cnot(q[0], q[1])]))
            .unwrap();
        assert_eq!(sec.recorded().len(), 2);
        let out = gates(&eng);
        assert!(out.iter().all(|c| c.tags() == [Tag::Compute]));
        assert_eq!(out[0].gate(), &GateKind::H);
    }

    #[test]
    fn measurement_in_compute_fails() {
        let (mut eng, q) = pipeline(false);
        let r = eng.compute(|e| e.send(vec![Command::measure(q[0])]));
        assert_eq!(r, Err(Error::NonInvertibleInCompute));
    }

    #[test]
    fn uncompute_is_reverse_adjoint() {
        let (mut eng, q) = pipeline(false);
        let mut sec = eng
            .compute(|e| {
                e.send(vec![
                    Command::single(GateKind::H, q[0]),
                    Command::single(GateKind::S, q[0]),
                ])
            })
            .unwrap();
        eng.uncompute(&mut sec).unwrap();
        let out = gates(&eng);
        assert_eq!(out[2].gate(), &GateKind::Sdg);
        assert_eq!(out[3].gate(), &GateKind::H);
        assert_eq!(out[2].tags(), [Tag::Uncompute]);
        assert_eq!(eng.uncompute(&mut sec), Err(Error::DoubleUncompute));
    }

    #[test]
    fn empty_section_uncomputes_to_nothing() {
        let (mut eng, _) = pipeline(false);
        let mut sec = eng.compute(|_| Ok(())).unwrap();
        eng.uncompute(&mut sec).unwrap();
        assert!(gates(&eng).is_empty());
    }

    fn controlled_pattern(naive: bool) -> Vec<Command> {
        let (mut eng, q) = pipeline(naive);
        let (c, a, b) = (q[0], q[1], q[2]);
        eng.with_control(&[c], |e| {
            let mut sec = e.compute(|e| e.send(vec![Command::cnot(a, b)]))?;
            e.send(vec![Command::cnot(b, a)])?;
            e.uncompute(&mut sec)
        })
        .unwrap();
        gates(&eng)
    }

    #[test]
    fn only_action_is_controlled() {
        let out = controlled_pattern(false);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].controls(), [QubitId(1)]);
        assert_eq!(out[1].controls(), [QubitId(2), QubitId(0)]);
        assert_eq!(out[2].controls(), [QubitId(1)]);
    }

    #[test]
    fn naive_control_controls_everything() {
        let out = controlled_pattern(true);
        assert!(out.iter().all(|c| c.controls().contains(&QubitId(0))));
    }

    #[test]
    fn control_inside_compute_is_recorded_and_replayed() {
        let (mut eng, q) = pipeline(false);
        let mut sec = eng
            .compute(|e| e.with_control(&[q[0]], |e| e.send(vec![Command::single(GateKind::T, q[1])])))
            .unwrap();
        eng.uncompute(&mut sec).unwrap();
        let out = gates(&eng);
        assert_eq!(out[1].gate(), &GateKind::Tdg);
        assert_eq!(out[1].controls(), [q[0]]);
    }

    #[test]
    fn overlapping_control_is_rejected() {
        let (mut eng, q) = pipeline(false);
        let r = eng.with_control(&[q[0]], |e| e.send(vec![Command::cnot(q[0], q[1])]));
        assert_eq!(r, Err(Error::ControlTargetsOverlap(q[0])));
    }

    #[test]
    fn loop_unrolls_without_backend_support() {
        let (mut eng, q) = pipeline(false);
        eng.with_loop(10, |e| e.send(vec![Command::single(GateKind::X, q[0])]))
            .unwrap();
        let out = gates(&eng);
        assert_eq!(out.len(), 10);
        assert!(out.iter().all(|c| c.tags().is_empty()));
    }

    #[test]
    fn loop_tags_with_backend_support() {
        let mut eng = Pipeline::new(CommandCollector::with_loop_support());
        let q = eng.allocate().unwrap();
        eng.with_loop(10, |e| e.send(vec![Command::single(GateKind::X, q)]))
            .unwrap();
        let out = gates(&eng);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].tags(), [Tag::Loop(10)]);
        assert_eq!(out[0].multiplicity(), 10);
        assert_eq!(
            eng.with_loop(2, |e| e.allocate().map(|_| ())),
            Err(Error::AllocateInLoop)
        );
    }

    #[test]
    fn loop_of_one_is_plain_emission() {
        let mut eng = Pipeline::new(CommandCollector::with_loop_support());
        let q = eng.allocate().unwrap();
        eng.with_loop(1, |e| e.send(vec![Command::single(GateKind::X, q)]))
            .unwrap();
        assert!(gates(&eng)[0].tags().is_empty());
    }

    #[test]
    fn deferral_moves_measurement() {
        let (q, t) = (QubitId(0), QubitId(1));
        let out = deferred_measurement(vec![Command::cnot(q, t), Command::measure(q)]);
        assert_eq!(out[0], Command::measure(q));
        assert!(out[1].controls().is_empty());
        assert_eq!(out[1].classical_controls(), [q]);
    }

    #[test]
    fn deferral_respects_intervening_use() {
        let (q, t) = (QubitId(0), QubitId(1));
        let input = vec![
            Command::cnot(q, t),
            Command::single(GateKind::H, q),
            Command::measure(q),
        ];
        assert_eq!(deferred_measurement(input.clone()), input);
    }
}
