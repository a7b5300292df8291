//! Circuit intermediate representation: qubits, gates, commands and tags.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64};

/// Tolerance used when canonicalizing and classifying rotation angles.
pub const ANGLE_TOLERANCE: f64 = 1e-10;

/// Largest gate width for which [`GateKind::matrix`] builds a dense matrix.
pub const MAX_MATRIX_WIDTH: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub u32);

impl QubitId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Code annotation attached to a command by a meta-instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    Compute,
    Uncompute,
    /// The command stands for `count` repetitions.
    Loop(u32),
}

impl Tag {
    pub fn is_section(self) -> bool {
        matches!(self, Tag::Compute | Tag::Uncompute)
    }
}

/// A named gate whose body is provided by the decomposition registry.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Composite {
    pub name: String,
    pub params: Vec<i64>,
    pub inverse: bool,
}

impl Composite {
    pub fn new(name: impl Into<String>, params: Vec<i64>) -> Self {
        Self {
            name: name.into(),
            params,
            inverse: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// `diag(1, e^{iθ})`
    Phase(f64),
    Swap,
    /// Quantum Fourier transform including the terminal bit reversal.
    Qft {
        width: usize,
        inverse: bool,
    },
    Measure,
    Allocate,
    Deallocate,
    Composite(Composite),
}

impl GateKind {
    pub fn name(&self) -> &str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::Rx(_) => "Rx",
            GateKind::Ry(_) => "Ry",
            GateKind::Rz(_) => "Rz",
            GateKind::Phase(_) => "Phase",
            GateKind::Swap => "Swap",
            GateKind::Qft { .. } => "QFT",
            GateKind::Measure => "Measure",
            GateKind::Allocate => "Allocate",
            GateKind::Deallocate => "Deallocate",
            GateKind::Composite(c) => &c.name,
        }
    }

    /// Number of target qubits, or `None` for composites (any width).
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::Swap => Some(2),
            GateKind::Qft { width, .. } => Some(*width),
            GateKind::Composite(_) => None,
            _ => Some(1),
        }
    }

    pub fn is_single_qubit(&self) -> bool {
        matches!(
            self,
            GateKind::X
                | GateKind::Y
                | GateKind::Z
                | GateKind::H
                | GateKind::S
                | GateKind::Sdg
                | GateKind::T
                | GateKind::Tdg
                | GateKind::Rx(_)
                | GateKind::Ry(_)
                | GateKind::Rz(_)
                | GateKind::Phase(_)
        )
    }

    pub fn is_bookkeeping(&self) -> bool {
        matches!(self, GateKind::Allocate | GateKind::Deallocate)
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Allocate | GateKind::Deallocate)
    }

    /// Angle of a diagonal phase-type gate, i.e. `θ` such that the gate equals
    /// `diag(1, e^{iθ})` exactly.
    pub fn phase_angle(&self) -> Option<f64> {
        match self {
            GateKind::Z => Some(PI),
            GateKind::S => Some(PI / 2.0),
            GateKind::Sdg => Some(-PI / 2.0),
            GateKind::T => Some(PI / 4.0),
            GateKind::Tdg => Some(-PI / 4.0),
            GateKind::Phase(t) => Some(*t),
            _ => None,
        }
    }

    /// Rotation angle of the parametrized gates.
    pub fn angle(&self) -> Option<f64> {
        match self {
            GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Phase(t) => Some(*t),
            _ => None,
        }
    }

    pub fn with_angle(&self, theta: f64) -> Option<GateKind> {
        match self {
            GateKind::Rx(_) => Some(GateKind::Rx(theta)),
            GateKind::Ry(_) => Some(GateKind::Ry(theta)),
            GateKind::Rz(_) => Some(GateKind::Rz(theta)),
            GateKind::Phase(_) => Some(GateKind::Phase(theta)),
            _ => None,
        }
    }

    pub fn inverse(&self) -> Result<GateKind> {
        Ok(match self {
            GateKind::X | GateKind::Y | GateKind::Z | GateKind::H | GateKind::Swap => self.clone(),
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::Rx(t) => GateKind::Rx(-t),
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::Qft { width, inverse } => GateKind::Qft {
                width: *width,
                inverse: !inverse,
            },
            GateKind::Composite(c) => GateKind::Composite(Composite {
                inverse: !c.inverse,
                ..c.clone()
            }),
            GateKind::Measure | GateKind::Allocate | GateKind::Deallocate => {
                return Err(Error::NonInvertibleGate(self.name().to_string()))
            }
        })
    }

    /// True if `other` is structurally the inverse of `self`.
    pub fn is_inverse_of(&self, other: &GateKind) -> bool {
        match (self, other) {
            (GateKind::Qft { width: a, inverse: x }, GateKind::Qft { width: b, inverse: y }) => a == b && x != y,
            (GateKind::Composite(a), GateKind::Composite(b)) => {
                a.name == b.name && a.params == b.params && a.inverse != b.inverse
            }
            (a, _) if a.angle().is_some() => false,
            (a, b) if a.is_unitary() => a.inverse().map(|inv| &inv == b).unwrap_or(false),
            _ => false,
        }
    }

    /// Dense unitary of the gate acting on its targets; target `k` is bit `k`
    /// of the row/column index.
    pub fn matrix(&self) -> Result<Matrix> {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        Ok(match self {
            GateKind::X => Matrix::from_rows(&[&[z, o], &[o, z]]),
            GateKind::Y => Matrix::from_rows(&[&[z, -i], &[i, z]]),
            GateKind::H => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                Matrix::from_rows(&[&[h, h], &[h, -h]])
            }
            GateKind::Rx(t) => {
                let c = C64::new((t / 2.0).cos(), 0.0);
                let s = C64::new(0.0, -(t / 2.0).sin());
                Matrix::from_rows(&[&[c, s], &[s, c]])
            }
            GateKind::Ry(t) => {
                let c = C64::new((t / 2.0).cos(), 0.0);
                let s = C64::new((t / 2.0).sin(), 0.0);
                Matrix::from_rows(&[&[c, -s], &[s, c]])
            }
            GateKind::Rz(t) => Matrix::diagonal(&[C64::from_polar(1.0, -t / 2.0), C64::from_polar(1.0, t / 2.0)]),
            GateKind::Z | GateKind::S | GateKind::Sdg | GateKind::T | GateKind::Tdg | GateKind::Phase(_) => {
                let t = self.phase_angle().expect("phase gate");
                Matrix::diagonal(&[o, C64::from_polar(1.0, t)])
            }
            GateKind::Swap => Matrix::from_fn(4, |r, c| {
                let swapped = ((c & 1) << 1) | (c >> 1);
                if r == swapped {
                    o
                } else {
                    z
                }
            }),
            GateKind::Qft { width, inverse } => {
                if *width > MAX_MATRIX_WIDTH {
                    return Err(Error::TooWide(*width));
                }
                let dim = 1usize << width;
                let norm = 1.0 / (dim as f64).sqrt();
                let sign = if *inverse { -1.0 } else { 1.0 };
                Matrix::from_fn(dim, |r, c| {
                    let k = (r * c) % dim;
                    C64::from_polar(norm, sign * TAU * k as f64 / dim as f64)
                })
            }
            GateKind::Composite(c) => return Err(Error::CompositeHasNoMatrix(c.name.clone())),
            GateKind::Measure | GateKind::Allocate | GateKind::Deallocate => {
                return Err(Error::UnsimulableGate(self.name().to_string()))
            }
        })
    }
}

/// Cost class of a command in the target gate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateClass {
    Cnot,
    Clifford1q,
    TClass,
    RzClass,
    MeasureClass,
    Bookkeeping,
    Other,
}

/// A gate applied to specific qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Command {
    pub(crate) gate: GateKind,
    pub(crate) targets: Vec<QubitId>,
    pub(crate) controls: Vec<QubitId>,
    pub(crate) tags: Vec<Tag>,
    /// Qubits whose measurement outcomes must all be 1 for the command to run.
    pub(crate) classical: Vec<QubitId>,
}

impl Command {
    pub fn new(gate: GateKind, targets: Vec<QubitId>, controls: Vec<QubitId>) -> Result<Self> {
        let cmd = Self::raw(gate, targets, controls);
        cmd.validate()?;
        Ok(cmd)
    }

    pub(crate) fn raw(gate: GateKind, targets: Vec<QubitId>, controls: Vec<QubitId>) -> Self {
        Self {
            gate,
            targets,
            controls,
            tags: Vec::new(),
            classical: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(expected) = self.gate.arity() {
            if expected != self.targets.len() {
                return Err(Error::ArityMismatch {
                    gate: self.gate.name().to_string(),
                    expected,
                    got: self.targets.len(),
                });
            }
        } else if self.targets.is_empty() {
            return Err(Error::ArityMismatch {
                gate: self.gate.name().to_string(),
                expected: 1,
                got: 0,
            });
        }
        if !self.gate.is_unitary() && !self.controls.is_empty() {
            return Err(Error::ControlledNonUnitary(self.gate.name().to_string()));
        }
        if let GateKind::Qft { width: 0, .. } = self.gate {
            return Err(Error::InvalidParameter("QFT width must be at least 1".into()));
        }
        if let Some(t) = self.gate.angle() {
            if !t.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite angle {t}")));
            }
        }
        let mut seen: Vec<QubitId> = self.qubits().collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateQubit(w[0]));
        }
        let sections = self.tags.iter().filter(|t| t.is_section()).count();
        if sections > 1 {
            return Err(Error::InvalidParameter("more than one compute/uncompute tag".into()));
        }
        if self.tags.iter().any(|t| matches!(t, Tag::Loop(0))) {
            return Err(Error::InvalidLoopCount);
        }
        Ok(())
    }

    pub fn single(gate: GateKind, target: QubitId) -> Self {
        Self::raw(gate, vec![target], Vec::new())
    }

    pub fn controlled(gate: GateKind, controls: Vec<QubitId>, target: QubitId) -> Self {
        Self::raw(gate, vec![target], controls)
    }

    pub fn cnot(control: QubitId, target: QubitId) -> Self {
        Self::raw(GateKind::X, vec![target], vec![control])
    }

    pub fn toffoli(c1: QubitId, c2: QubitId, target: QubitId) -> Self {
        Self::raw(GateKind::X, vec![target], vec![c1, c2])
    }

    pub fn swap(a: QubitId, b: QubitId) -> Self {
        Self::raw(GateKind::Swap, vec![a, b], Vec::new())
    }

    pub fn measure(q: QubitId) -> Self {
        Self::single(GateKind::Measure, q)
    }

    pub fn qft(targets: Vec<QubitId>) -> Self {
        let width = targets.len();
        Self::raw(GateKind::Qft { width, inverse: false }, targets, Vec::new())
    }

    pub fn composite(composite: Composite, targets: Vec<QubitId>) -> Self {
        Self::raw(GateKind::Composite(composite), targets, Vec::new())
    }

    pub fn gate(&self) -> &GateKind {
        &self.gate
    }

    pub fn targets(&self) -> &[QubitId] {
        &self.targets
    }

    pub fn controls(&self) -> &[QubitId] {
        &self.controls
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn classical_controls(&self) -> &[QubitId] {
        &self.classical
    }

    /// Targets followed by controls.
    pub fn qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.targets.iter().chain(&self.controls).copied()
    }

    /// Every qubit the command depends on, including classical controls.
    pub fn all_qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.qubits().chain(self.classical.iter().copied())
    }

    pub fn num_qubits(&self) -> usize {
        self.targets.len() + self.controls.len()
    }

    pub fn with_tag(mut self, tag: Tag) -> Self {
        self.tags.push(tag);
        self
    }

    pub fn with_tags(mut self, tags: &[Tag]) -> Self {
        self.tags.extend_from_slice(tags);
        self
    }

    pub fn with_controls(mut self, controls: &[QubitId]) -> Self {
        self.controls.extend_from_slice(controls);
        self
    }

    pub fn with_classical_controls(mut self, qubits: &[QubitId]) -> Self {
        self.classical.extend_from_slice(qubits);
        self
    }

    /// Product of all loop counts on the command.
    pub fn multiplicity(&self) -> u64 {
        self.tags
            .iter()
            .map(|t| match t {
                Tag::Loop(k) => u64::from(*k),
                _ => 1,
            })
            .product()
    }

    pub fn has_loop_tag(&self) -> bool {
        self.tags.iter().any(|t| matches!(t, Tag::Loop(_)))
    }

    pub fn section_tag(&self) -> Option<Tag> {
        self.tags.iter().copied().find(|t| t.is_section())
    }

    /// The adjoint command, with qubits and tags preserved.
    pub fn inverse(&self) -> Result<Command> {
        Ok(Command {
            gate: self.gate.inverse()?,
            ..self.clone()
        })
    }

    pub fn classify(&self) -> GateClass {
        classify(self)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.controls.is_empty() {
            write!(f, "C{}-", self.controls.len())?;
        }
        write!(f, "{}", self.gate.name())?;
        if let Some(t) = self.gate.angle() {
            write!(f, "({t:.6})")?;
        }
        if let GateKind::Qft { inverse: true, .. } = self.gate {
            write!(f, "†")?;
        }
        if let GateKind::Composite(c) = &self.gate {
            write!(f, "{:?}{}", c.params, if c.inverse { "†" } else { "" })?;
        }
        let qs: Vec<String> = self.qubits().map(|q| q.to_string()).collect();
        write!(f, " | {}", qs.join(","))
    }
}

/// Maps an angle into `[0, 2π)`, snapping values within tolerance of `2π` to 0.
pub fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if TAU - t < ANGLE_TOLERANCE {
        0.0
    } else {
        t
    }
}

/// True if the angle is a multiple of `period` within tolerance.
pub fn is_zero_angle(theta: f64, period: f64) -> bool {
    let t = theta.rem_euclid(period);
    t < ANGLE_TOLERANCE || period - t < ANGLE_TOLERANCE
}

fn classify_angle(theta: f64) -> GateClass {
    let t = canonical_angle(theta);
    let eighths = t / (PI / 4.0);
    let m = eighths.round();
    if (t - m * PI / 4.0).abs() < ANGLE_TOLERANCE {
        if (m as i64) % 2 == 0 {
            GateClass::Clifford1q
        } else {
            GateClass::TClass
        }
    } else {
        GateClass::RzClass
    }
}

/// Cost class of a command. Total over all commands.
pub fn classify(cmd: &Command) -> GateClass {
    match (&cmd.gate, cmd.controls.len()) {
        (GateKind::Measure, _) => GateClass::MeasureClass,
        (GateKind::Allocate | GateKind::Deallocate, _) => GateClass::Bookkeeping,
        (GateKind::X, 1) => GateClass::Cnot,
        (_, n) if n > 0 => GateClass::Other,
        (GateKind::H | GateKind::S | GateKind::Sdg | GateKind::X | GateKind::Y | GateKind::Z, _) => {
            GateClass::Clifford1q
        }
        (GateKind::T | GateKind::Tdg, _) => GateClass::TClass,
        (GateKind::Rz(t) | GateKind::Phase(t), _) => classify_angle(*t),
        (GateKind::Rx(_) | GateKind::Ry(_), _) => GateClass::RzClass,
        _ => GateClass::Other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: u32) -> QubitId {
        QubitId(i)
    }

    #[test]
    fn inverse_negates_rotation() {
        let c = Command::single(GateKind::Rz(0.3), q(0));
        assert_eq!(c.inverse().unwrap().gate(), &GateKind::Rz(-0.3));
        assert_eq!(c.inverse().unwrap().targets(), &[q(0)]);
    }

    #[test]
    fn inverse_of_cnot_is_cnot() {
        let c = Command::cnot(q(1), q(0));
        assert_eq!(c.inverse().unwrap(), c);
    }

    #[test]
    fn inverse_flips_qft_and_composites() {
        let c = Command::qft(vec![q(0), q(1), q(2), q(3)]);
        assert_eq!(
            c.inverse().unwrap().gate(),
            &GateKind::Qft {
                width: 4,
                inverse: true
            }
        );
        let comp = Command::composite(Composite::new("phi_add", vec![3]), vec![q(0), q(1)]);
        let inv = comp.inverse().unwrap();
        assert!(inv.gate().is_inverse_of(comp.gate()));
    }

    #[test]
    fn bookkeeping_has_no_inverse() {
        for g in [GateKind::Measure, GateKind::Allocate, GateKind::Deallocate] {
            assert!(matches!(
                Command::single(g, q(0)).inverse(),
                Err(Error::NonInvertibleGate(_))
            ));
        }
    }

    #[test]
    fn classify_examples() {
        let rz = |t: f64| Command::single(GateKind::Rz(t), q(0)).classify();
        assert_eq!(rz(PI / 2.0 + 1e-13), GateClass::Clifford1q);
        assert_eq!(rz(PI / 4.0), GateClass::TClass);
        assert_eq!(rz(0.7), GateClass::RzClass);
        assert_eq!(rz(0.7 + TAU), GateClass::RzClass);
        assert_eq!(rz(-PI / 4.0), GateClass::TClass);
        assert_eq!(rz(TAU - 1e-12), GateClass::Clifford1q);
        assert_eq!(Command::cnot(q(0), q(1)).classify(), GateClass::Cnot);
        assert_eq!(Command::toffoli(q(0), q(1), q(2)).classify(), GateClass::Other);
        assert_eq!(Command::measure(q(0)).classify(), GateClass::MeasureClass);
        assert_eq!(
            Command::single(GateKind::Allocate, q(0)).classify(),
            GateClass::Bookkeeping
        );
        assert_eq!(
            Command::single(GateKind::Phase(PI), q(0)).classify(),
            GateClass::Clifford1q
        );
        assert_eq!(Command::single(GateKind::Tdg, q(0)).classify(), GateClass::TClass);
        assert_eq!(Command::swap(q(0), q(1)).classify(), GateClass::Other);
    }

    #[test]
    fn construction_rejects_duplicates_and_bad_arity() {
        assert!(matches!(
            Command::new(GateKind::X, vec![q(0)], vec![q(0)]),
            Err(Error::DuplicateQubit(_))
        ));
        assert!(matches!(
            Command::new(GateKind::Swap, vec![q(0)], vec![]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            Command::new(GateKind::Measure, vec![q(0)], vec![q(1)]),
            Err(Error::ControlledNonUnitary(_))
        ));
        assert!(Command::new(GateKind::Rz(f64::NAN), vec![q(0)], vec![]).is_err());
    }

    #[test]
    fn qft1_is_hadamard() {
        let qft = GateKind::Qft {
            width: 1,
            inverse: false,
        }
        .matrix()
        .unwrap();
        assert!(qft.approx_eq(&GateKind::H.matrix().unwrap(), 1e-12));
    }

    #[test]
    fn swap_matrix_exchanges_01_and_10() {
        let m = GateKind::Swap.matrix().unwrap();
        let one = C64::new(1.0, 0.0);
        assert_eq!(m.get(0, 0), one);
        assert_eq!(m.get(2, 1), one);
        assert_eq!(m.get(1, 2), one);
        assert_eq!(m.get(3, 3), one);
    }

    #[test]
    fn qft3_matches_direct_dft() {
        // independent construction: F[j][k] = ω^{jk}/√8 via repeated multiplication
        let omega = C64::from_polar(1.0, TAU / 8.0);
        let mut expected = Matrix::zeros(8);
        for j in 0..8 {
            for k in 0..8 {
                let mut v = C64::new(1.0 / 8f64.sqrt(), 0.0);
                for _ in 0..j * k {
                    v *= omega;
                }
                expected.set(j, k, v);
            }
        }
        let m = GateKind::Qft {
            width: 3,
            inverse: false,
        }
        .matrix()
        .unwrap();
        assert!(m.approx_eq(&expected, 1e-10));
    }

    #[test]
    fn too_wide_and_composite_have_no_matrix() {
        assert!(matches!(
            GateKind::Qft {
                width: 11,
                inverse: false
            }
            .matrix(),
            Err(Error::TooWide(11))
        ));
        assert!(matches!(
            GateKind::Composite(Composite::new("qft_noswap", vec![])).matrix(),
            Err(Error::CompositeHasNoMatrix(_))
        ));
    }

    #[test]
    fn every_unitary_gate_matrix_is_unitary() {
        for g in [
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::H,
            GateKind::S,
            GateKind::Sdg,
            GateKind::T,
            GateKind::Tdg,
            GateKind::Rx(0.3),
            GateKind::Ry(1.1),
            GateKind::Rz(-2.0),
            GateKind::Phase(0.4),
            GateKind::Swap,
            GateKind::Qft {
                width: 4,
                inverse: true,
            },
        ] {
            let m = g.matrix().unwrap();
            assert!(m.is_unitary(1e-10), "{g:?}");
            let inv = g.inverse().unwrap().matrix().unwrap();
            assert!((&m * &inv).approx_eq(&Matrix::identity(m.dim()), 1e-10), "{g:?}");
        }
    }
}
