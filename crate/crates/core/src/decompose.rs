//! Decomposition rules lowering composite and controlled gates to a gate set.

use std::any::Any;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::engine::Stage;
use crate::error::{Error, Result};
use crate::gate::{is_zero_angle, Command, Composite, GateKind, QubitId};
use crate::linalg::{Matrix, C64};
use crate::qmath;

/// Name of the QFT composite without the terminal bit-reversal swaps.
pub const QFT_NOSWAP: &str = "qft_noswap";
/// Name of the Fourier-space constant adder composite; `params[0]` is the constant.
pub const PHI_ADD: &str = "phi_add";

/// Supported-gate predicate presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateSet {
    /// Uncontrolled single-qubit gates, CNOT, measurement and bookkeeping.
    Target,
    /// `Target` plus uncontrolled QFTs and any one- or two-qubit unitary with
    /// at most one control.
    Igs,
}

impl GateSet {
    pub fn supports(self, cmd: &Command) -> bool {
        let gate = cmd.gate();
        let k = cmd.controls().len();
        let target = match gate {
            GateKind::Measure | GateKind::Allocate | GateKind::Deallocate => true,
            GateKind::X => k <= 1,
            g if g.is_single_qubit() => k == 0,
            _ => false,
        };
        match self {
            GateSet::Target => target,
            GateSet::Igs => {
                target
                    || match gate {
                        GateKind::Qft { .. } => k == 0,
                        GateKind::Composite(c) => k == 0 && c.name == QFT_NOSWAP,
                        g => g.is_unitary() && k <= 1 && cmd.num_qubits() <= 2,
                    }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlCount {
    Exact(usize),
    AtLeast(usize),
}

impl ControlCount {
    fn matches(self, k: usize) -> bool {
        match self {
            ControlCount::Exact(n) => k == n,
            ControlCount::AtLeast(n) => k >= n,
        }
    }
}

type Expansion = fn(&Command) -> Result<Vec<Command>>;

/// A decomposition rule: gate matcher plus control-count matcher.
#[derive(Clone, Copy)]
pub struct Rule {
    pub name: &'static str,
    pub gate: fn(&GateKind) -> bool,
    pub controls: ControlCount,
    pub expand: Expansion,
}

impl std::fmt::Debug for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Rule")
            .field("name", &self.name)
            .field("controls", &self.controls)
            .finish()
    }
}

/// Ordered rule collection. Exact control-count matchers win over
/// `AtLeast` matchers; among equals the first registered wins.
#[derive(Clone, Debug)]
pub struct Registry {
    rules: Vec<Rule>,
}

impl Default for Registry {
    fn default() -> Self {
        let rules = vec![
            Rule {
                name: "swap",
                gate: |g| matches!(g, GateKind::Swap),
                controls: ControlCount::Exact(0),
                expand: rule_swap,
            },
            Rule {
                name: "controlled_swap",
                gate: |g| matches!(g, GateKind::Swap),
                controls: ControlCount::AtLeast(1),
                expand: rule_controlled_swap,
            },
            Rule {
                name: "toffoli",
                gate: |g| matches!(g, GateKind::X),
                controls: ControlCount::Exact(2),
                expand: rule_toffoli,
            },
            Rule {
                name: "multi_controlled_x",
                gate: |g| matches!(g, GateKind::X),
                controls: ControlCount::AtLeast(3),
                expand: rule_multi_controlled_x,
            },
            Rule {
                name: "controlled_diagonal_to_phase",
                gate: |g| {
                    matches!(
                        g,
                        GateKind::Z | GateKind::S | GateKind::Sdg | GateKind::T | GateKind::Tdg
                    )
                },
                controls: ControlCount::AtLeast(1),
                expand: rule_diagonal_to_phase,
            },
            Rule {
                name: "controlled_phase",
                gate: |g| matches!(g, GateKind::Phase(_)),
                controls: ControlCount::Exact(1),
                expand: rule_controlled_phase,
            },
            Rule {
                name: "cc_phase",
                gate: |g| matches!(g, GateKind::Phase(_)),
                controls: ControlCount::Exact(2),
                expand: rule_cc_phase,
            },
            Rule {
                name: "multi_controlled_phase",
                gate: |g| matches!(g, GateKind::Phase(_)),
                controls: ControlCount::AtLeast(3),
                expand: rule_multi_controlled_phase,
            },
            Rule {
                name: "controlled_rz",
                gate: |g| matches!(g, GateKind::Rz(_)),
                controls: ControlCount::AtLeast(1),
                expand: rule_controlled_rz,
            },
            Rule {
                name: "controlled_1q",
                gate: |g| matches!(g, GateKind::H | GateKind::Rx(_) | GateKind::Ry(_)),
                controls: ControlCount::Exact(1),
                expand: rule_controlled_1q,
            },
            Rule {
                name: "controlled_y",
                gate: |g| matches!(g, GateKind::Y),
                controls: ControlCount::AtLeast(1),
                expand: rule_controlled_y,
            },
            Rule {
                name: "multi_controlled_h",
                gate: |g| matches!(g, GateKind::H),
                controls: ControlCount::AtLeast(2),
                expand: rule_multi_controlled_h,
            },
            Rule {
                name: "multi_controlled_rx",
                gate: |g| matches!(g, GateKind::Rx(_)),
                controls: ControlCount::AtLeast(2),
                expand: rule_multi_controlled_rx,
            },
            Rule {
                name: "multi_controlled_ry",
                gate: |g| matches!(g, GateKind::Ry(_)),
                controls: ControlCount::AtLeast(2),
                expand: rule_multi_controlled_ry,
            },
            Rule {
                name: "qft",
                gate: |g| matches!(g, GateKind::Qft { .. }),
                controls: ControlCount::AtLeast(0),
                expand: rule_qft,
            },
            Rule {
                name: "composite",
                gate: |g| matches!(g, GateKind::Composite(_)),
                controls: ControlCount::AtLeast(0),
                expand: rule_control_composite,
            },
        ];
        Self { rules }
    }
}

impl Registry {
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn find(&self, cmd: &Command) -> Option<&Rule> {
        let k = cmd.controls().len();
        let candidates = || {
            self.rules
                .iter()
                .filter(move |r| (r.gate)(cmd.gate()) && r.controls.matches(k))
        };
        candidates()
            .find(|r| matches!(r.controls, ControlCount::Exact(_)))
            .or_else(|| candidates().next())
    }

    /// One expansion step. The output inherits the tags and classical
    /// controls of `cmd`.
    pub fn expand(&self, cmd: &Command) -> Result<Vec<Command>> {
        let rule = self.find(cmd).ok_or_else(|| Error::NoRuleApplicable(cmd.to_string()))?;
        let mut out = (rule.expand)(cmd)?;
        for c in &mut out {
            c.tags.extend_from_slice(&cmd.tags);
            c.classical.extend_from_slice(&cmd.classical);
        }
        Ok(out)
    }

    /// Expands `cmd` recursively until every command is supported by `set`.
    pub fn lower(&self, cmd: Command, set: GateSet, out: &mut Vec<Command>) -> Result<()> {
        if set.supports(&cmd) {
            out.push(cmd);
            return Ok(());
        }
        for c in self.expand(&cmd)? {
            self.lower(c, set, out)?;
        }
        Ok(())
    }
}

/// Stage lowering every command to a gate set.
#[derive(Debug)]
pub struct DecomposeStage {
    set: GateSet,
    registry: Registry,
}

impl DecomposeStage {
    pub fn new(set: GateSet) -> Self {
        Self {
            set,
            registry: Registry::default(),
        }
    }

    pub fn gate_set(&self) -> GateSet {
        self.set
    }
}

impl Stage for DecomposeStage {
    fn receive(&mut self, cmds: Vec<Command>, out: &mut Vec<Command>) -> Result<()> {
        for cmd in cmds {
            self.registry.lower(cmd, self.set, out)?;
        }
        Ok(())
    }

    fn flush(&mut self, _out: &mut Vec<Command>) -> Result<()> {
        Ok(())
    }

    fn name(&self) -> &str {
        "decompose"
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

fn phase(theta: f64, q: QubitId) -> Command {
    Command::single(GateKind::Phase(theta), q)
}

fn cphase(theta: f64, controls: &[QubitId], t: QubitId) -> Command {
    Command::controlled(GateKind::Phase(theta), controls.to_vec(), t)
}

fn mcx(controls: &[QubitId], t: QubitId) -> Command {
    Command::controlled(GateKind::X, controls.to_vec(), t)
}

fn target(cmd: &Command) -> QubitId {
    cmd.targets()[0]
}

pub fn rule_swap(cmd: &Command) -> Result<Vec<Command>> {
    let (a, b) = (cmd.targets()[0], cmd.targets()[1]);
    Ok(vec![Command::cnot(a, b), Command::cnot(b, a), Command::cnot(a, b)])
}

pub fn rule_controlled_swap(cmd: &Command) -> Result<Vec<Command>> {
    let (a, b) = (cmd.targets()[0], cmd.targets()[1]);
    let mut ctrls = cmd.controls().to_vec();
    ctrls.push(a);
    Ok(vec![Command::cnot(b, a), mcx(&ctrls, b), Command::cnot(b, a)])
}

/// Seven-T Clifford+T network for the Toffoli gate.
pub fn rule_toffoli(cmd: &Command) -> Result<Vec<Command>> {
    let (c1, c2, t) = (cmd.controls()[0], cmd.controls()[1], target(cmd));
    let g = Command::single;
    Ok(vec![
        g(GateKind::H, t),
        Command::cnot(c2, t),
        g(GateKind::Tdg, t),
        Command::cnot(c1, t),
        g(GateKind::T, t),
        Command::cnot(c2, t),
        g(GateKind::Tdg, t),
        Command::cnot(c1, t),
        g(GateKind::T, c2),
        g(GateKind::T, t),
        g(GateKind::H, t),
        Command::cnot(c1, c2),
        g(GateKind::T, c1),
        g(GateKind::Tdg, c2),
        Command::cnot(c1, c2),
    ])
}

pub fn rule_multi_controlled_x(cmd: &Command) -> Result<Vec<Command>> {
    let t = target(cmd);
    Ok(vec![
        Command::single(GateKind::H, t),
        cphase(PI, cmd.controls(), t),
        Command::single(GateKind::H, t),
    ])
}

pub fn rule_diagonal_to_phase(cmd: &Command) -> Result<Vec<Command>> {
    let theta = cmd.gate().phase_angle().expect("diagonal gate");
    Ok(vec![cphase(theta, cmd.controls(), target(cmd))])
}

fn phase_param(cmd: &Command) -> f64 {
    match cmd.gate() {
        GateKind::Phase(t) => *t,
        g => unreachable!("phase rule applied to {}", g.name()),
    }
}

/// `CP(θ) = P(θ/2)_c · P(θ/2)_t · CNOT · P(-θ/2)_t · CNOT`.
pub fn rule_controlled_phase(cmd: &Command) -> Result<Vec<Command>> {
    let theta = phase_param(cmd);
    let (c, t) = (cmd.controls()[0], target(cmd));
    Ok(vec![
        phase(theta / 2.0, c),
        phase(theta / 2.0, t),
        Command::cnot(c, t),
        phase(-theta / 2.0, t),
        Command::cnot(c, t),
    ])
}

/// Doubly-controlled phase from three singly-controlled phases and two CNOTs.
pub fn rule_cc_phase(cmd: &Command) -> Result<Vec<Command>> {
    let theta = phase_param(cmd);
    let (c1, c2, t) = (cmd.controls()[0], cmd.controls()[1], target(cmd));
    Ok(vec![
        cphase(theta / 2.0, &[c2], t),
        Command::cnot(c1, c2),
        cphase(-theta / 2.0, &[c2], t),
        Command::cnot(c1, c2),
        cphase(theta / 2.0, &[c1], t),
    ])
}

/// Ancilla-free recursion: peel off the last control.
pub fn rule_multi_controlled_phase(cmd: &Command) -> Result<Vec<Command>> {
    let theta = phase_param(cmd);
    let ctrls = cmd.controls();
    let (rest, last) = (&ctrls[..ctrls.len() - 1], ctrls[ctrls.len() - 1]);
    let t = target(cmd);
    Ok(vec![
        cphase(theta / 2.0, &[last], t),
        mcx(rest, last),
        cphase(-theta / 2.0, &[last], t),
        mcx(rest, last),
        cphase(theta / 2.0, rest, t),
    ])
}

/// `C^k Rz(θ) = C^k P(θ)` followed by the compensating phase `e^{-iθ/2}`
/// on the control subspace.
pub fn rule_controlled_rz(cmd: &Command) -> Result<Vec<Command>> {
    let theta = cmd.gate().angle().expect("Rz");
    let ctrls = cmd.controls();
    let (rest, last) = (&ctrls[..ctrls.len() - 1], ctrls[ctrls.len() - 1]);
    Ok(vec![
        cphase(theta, ctrls, target(cmd)),
        Command::controlled(GateKind::Phase(-theta / 2.0), rest.to_vec(), last),
    ])
}

pub fn rule_controlled_1q(cmd: &Command) -> Result<Vec<Command>> {
    let u = cmd.gate().matrix()?;
    Ok(controlled_1q(&u, cmd.controls()[0], target(cmd)))
}

/// `Y = S X S†`.
pub fn rule_controlled_y(cmd: &Command) -> Result<Vec<Command>> {
    let t = target(cmd);
    Ok(vec![
        Command::single(GateKind::Sdg, t),
        mcx(cmd.controls(), t),
        Command::single(GateKind::S, t),
    ])
}

/// `H = Ry(π/4) Z Ry(-π/4)`.
pub fn rule_multi_controlled_h(cmd: &Command) -> Result<Vec<Command>> {
    let t = target(cmd);
    Ok(vec![
        Command::single(GateKind::Ry(-FRAC_PI_4), t),
        cphase(PI, cmd.controls(), t),
        Command::single(GateKind::Ry(FRAC_PI_4), t),
    ])
}

/// `Rx(θ) = H Rz(θ) H`.
pub fn rule_multi_controlled_rx(cmd: &Command) -> Result<Vec<Command>> {
    let t = target(cmd);
    let theta = cmd.gate().angle().expect("Rx");
    Ok(vec![
        Command::single(GateKind::H, t),
        Command::controlled(GateKind::Rz(theta), cmd.controls().to_vec(), t),
        Command::single(GateKind::H, t),
    ])
}

/// `Ry(θ) = S Rx(θ) S†`.
pub fn rule_multi_controlled_ry(cmd: &Command) -> Result<Vec<Command>> {
    let t = target(cmd);
    let theta = cmd.gate().angle().expect("Ry");
    Ok(vec![
        Command::single(GateKind::Sdg, t),
        Command::controlled(GateKind::Rx(theta), cmd.controls().to_vec(), t),
        Command::single(GateKind::S, t),
    ])
}

/// Full QFT: no-swap body followed by the bit-reversal swaps. Controls, if
/// any, are attached to every command of the expansion.
pub fn rule_qft(cmd: &Command) -> Result<Vec<Command>> {
    let GateKind::Qft { inverse, .. } = *cmd.gate() else {
        unreachable!("qft rule applied to {}", cmd.gate().name());
    };
    let qs = cmd.targets();
    let w = qs.len();
    let mut body = qft_noswap_body(qs);
    body.extend((0..w / 2).map(|j| Command::swap(qs[j], qs[w - 1 - j])));
    let body = if inverse { adjoint(&body)? } else { body };
    Ok(attach_controls(body, cmd.controls()))
}

/// Expands a composite from its registered body and attaches the command's
/// controls to every resulting command.
pub fn rule_control_composite(cmd: &Command) -> Result<Vec<Command>> {
    let GateKind::Composite(c) = cmd.gate() else {
        unreachable!("composite rule applied to {}", cmd.gate().name());
    };
    let body = composite_body(c, cmd.targets())?;
    Ok(attach_controls(body, cmd.controls()))
}

fn attach_controls(body: Vec<Command>, controls: &[QubitId]) -> Vec<Command> {
    body.into_iter().map(|c| c.with_controls(controls)).collect()
}

fn adjoint(cmds: &[Command]) -> Result<Vec<Command>> {
    cmds.iter().rev().map(Command::inverse).collect()
}

/// Body of a registered composite gate on `targets`.
pub fn composite_body(c: &Composite, targets: &[QubitId]) -> Result<Vec<Command>> {
    let body = match c.name.as_str() {
        QFT_NOSWAP => qft_noswap_body(targets),
        PHI_ADD => {
            let constant = *c
                .params
                .first()
                .ok_or_else(|| Error::InvalidParameter("phi_add needs a constant".into()))?;
            qmath::phi_add_angles(constant, targets.len())
                .into_iter()
                .zip(targets)
                .map(|(theta, &q)| phase(theta, q))
                .collect()
        }
        other => return Err(Error::UnknownComposite(other.to_string())),
    };
    if c.inverse {
        adjoint(&body)
    } else {
        Ok(body)
    }
}

/// Hadamard / controlled-phase cascade leaving the output bit-reversed.
/// Qubit `j` ends up carrying the phase `2πx / 2^{j+1}`.
pub fn qft_noswap_body(qs: &[QubitId]) -> Vec<Command> {
    let mut out = Vec::new();
    for j in (0..qs.len()).rev() {
        out.push(Command::single(GateKind::H, qs[j]));
        for i in (0..j).rev() {
            let theta = PI / f64::from(1u32 << (j - i).min(31));
            out.push(cphase(theta, &[qs[i]], qs[j]));
        }
    }
    out
}

/// Euler angles `(δ, α, β, γ)` with `U = e^{iδ} Rz(α) Ry(β) Rz(γ)`.
pub fn zyz_angles(u: &Matrix) -> (f64, f64, f64, f64) {
    assert_eq!(u.dim(), 2, "zyz decomposition needs a 2x2 unitary");
    let det = u.get(0, 0) * u.get(1, 1) - u.get(0, 1) * u.get(1, 0);
    let delta = det.arg() / 2.0;
    let v = u.scale(C64::from_polar(1.0, -delta));
    let (v00, v10, v11) = (v.get(0, 0), v.get(1, 0), v.get(1, 1));
    let beta = 2.0 * v10.norm().atan2(v00.norm());
    let sum = if v00.norm() > 1e-12 { 2.0 * v11.arg() } else { 0.0 };
    let diff = if v10.norm() > 1e-12 { 2.0 * v10.arg() } else { 0.0 };
    let alpha = (sum + diff) / 2.0;
    let gamma = (sum - diff) / 2.0;
    (delta, alpha, beta, gamma)
}

/// Controlled-`U` from two CNOTs, single-qubit rotations on the target and a
/// phase on the control. Near-zero rotations are omitted.
pub fn controlled_1q(u: &Matrix, control: QubitId, t: QubitId) -> Vec<Command> {
    let (delta, alpha, beta, gamma) = zyz_angles(u);
    let rot = |g: GateKind| {
        let theta = g.angle().expect("rotation");
        (!is_zero_angle(theta, 4.0 * PI)).then(|| Command::single(g, t))
    };
    let mut out: Vec<Command> = Vec::new();
    out.extend(rot(GateKind::Rz((gamma - alpha) / 2.0)));
    out.push(Command::cnot(control, t));
    out.extend(rot(GateKind::Rz(-(gamma + alpha) / 2.0)));
    out.extend(rot(GateKind::Ry(-beta / 2.0)));
    out.push(Command::cnot(control, t));
    out.extend(rot(GateKind::Ry(beta / 2.0)));
    out.extend(rot(GateKind::Rz(alpha)));
    if !is_zero_angle(delta, 2.0 * PI) {
        out.push(phase(delta, control));
    }
    out
}
