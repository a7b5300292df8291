use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decompose::composite_body;
use crate::engine::Backend;
use crate::error::{Error, Result};
use crate::gate::{Command, GateKind, QubitId};
use crate::linalg::{Matrix, C64};

pub const MAX_SIM_QUBITS: usize = 24;

/// State-vector simulator. Qubit `q` is bit `q.0` of the basis index; the
/// register grows on demand and new qubits start in `|0⟩`.
#[derive(Clone, Debug)]
pub struct Simulator {
    amps: Vec<C64>,
    width: usize,
    outcomes: HashMap<QubitId, bool>,
    rng: ChaCha8Rng,
}

impl Simulator {
    pub fn new(seed: u64) -> Self {
        Self {
            amps: vec![C64::new(1.0, 0.0)],
            width: 0,
            outcomes: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Starts in basis state `|index⟩` on `width` qubits.
    pub fn with_basis_state(width: usize, index: usize, seed: u64) -> Result<Self> {
        let mut sim = Self::new(seed);
        sim.ensure_width(width)?;
        sim.amps[0] = C64::new(0.0, 0.0);
        sim.amps[index] = C64::new(1.0, 0.0);
        Ok(sim)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps.get(index).copied().unwrap_or_default()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn outcome(&self, q: QubitId) -> Option<bool> {
        self.outcomes.get(&q).copied()
    }

    /// Probability that qubit `q` reads 1.
    pub fn probability_one(&self, q: QubitId) -> f64 {
        let bit = 1usize << q.index();
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn ensure_width(&mut self, width: usize) -> Result<()> {
        if width <= self.width {
            return Ok(());
        }
        if width > MAX_SIM_QUBITS {
            return Err(Error::TooWide(width));
        }
        self.amps.resize(1 << width, C64::new(0.0, 0.0));
        self.width = width;
        Ok(())
    }

    pub fn run(&mut self, cmds: &[Command]) -> Result<()> {
        cmds.iter().try_for_each(|c| self.apply(c))
    }

    pub fn apply(&mut self, cmd: &Command) -> Result<()> {
        if let Some(w) = cmd.all_qubits().map(|q| q.index() + 1).max() {
            self.ensure_width(w)?;
        }
        for q in cmd.classical_controls() {
            match self.outcomes.get(q) {
                Some(true) => {}
                Some(false) => return Ok(()),
                None => return Err(Error::UnsimulableGate(format!("classical control on unmeasured {q}"))),
            }
        }
        for _ in 0..cmd.multiplicity() {
            self.apply_once(cmd)?;
        }
        Ok(())
    }

    fn apply_once(&mut self, cmd: &Command) -> Result<()> {
        match cmd.gate() {
            GateKind::Allocate | GateKind::Deallocate => Ok(()),
            GateKind::Measure => {
                self.measure(cmd.targets()[0]);
                Ok(())
            }
            GateKind::Composite(c) => {
                let body = composite_body(c, cmd.targets())?;
                for b in body {
                    self.apply_once(&b.with_controls(cmd.controls()))?;
                }
                Ok(())
            }
            g => {
                let mask = cmd.controls().iter().fold(0usize, |m, q| m | (1 << q.index()));
                if let Some(theta) = g.phase_angle() {
                    self.apply_phase(theta, cmd.targets()[0], mask);
                    return Ok(());
                }
                let m = g.matrix()?;
                if cmd.targets().len() == 1 {
                    self.apply_1q(&m, cmd.targets()[0], mask);
                } else {
                    self.apply_nq(&m, cmd.targets(), mask);
                }
                Ok(())
            }
        }
    }

    fn apply_phase(&mut self, theta: f64, t: QubitId, mask: usize) {
        let m = mask | (1 << t.index());
        let f = C64::from_polar(1.0, theta);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m == m {
                *a *= f;
            }
        }
    }

    fn apply_1q(&mut self, m: &Matrix, t: QubitId, mask: usize) {
        let bit = 1usize << t.index();
        let (m00, m01, m10, m11) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        for i in 0..self.amps.len() {
            if i & bit != 0 || i & mask != mask {
                continue;
            }
            let (a, b) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = m00 * a + m01 * b;
            self.amps[i | bit] = m10 * a + m11 * b;
        }
    }

    fn apply_nq(&mut self, m: &Matrix, targets: &[QubitId], mask: usize) {
        let bits: Vec<usize> = targets.iter().map(|q| 1usize << q.index()).collect();
        let tmask: usize = bits.iter().sum();
        let dim = 1usize << bits.len();
        let offsets: Vec<usize> = (0..dim)
            .map(|k| {
                bits.iter()
                    .enumerate()
                    .filter(|(j, _)| k >> j & 1 == 1)
                    .map(|(_, b)| b)
                    .sum()
            })
            .collect();
        let mut local = vec![C64::new(0.0, 0.0); dim];
        for i in 0..self.amps.len() {
            if i & tmask != 0 || i & mask != mask {
                continue;
            }
            for (k, off) in offsets.iter().enumerate() {
                local[k] = self.amps[i | off];
            }
            let out = m.apply(&local);
            for (k, off) in offsets.iter().enumerate() {
                self.amps[i | off] = out[k];
            }
        }
    }

    fn measure(&mut self, q: QubitId) {
        let p1 = self.probability_one(q);
        let one = self.rng.random::<f64>() < p1;
        let bit = 1usize << q.index();
        let norm = if one { p1 } else { 1.0 - p1 }.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == one {
                *a /= norm;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        self.outcomes.insert(q, one);
    }
}

impl Backend for Simulator {
    fn receive(&mut self, cmds: &[Command]) -> Result<()> {
        self.run(cmds)
    }
}

/// Unitary of a measurement-free circuit on qubits `0..width`, built column
/// by column from basis-state simulation.
pub fn circuit_unitary(cmds: &[Command], width: usize) -> Result<Matrix> {
    let dim = 1usize << width;
    let mut u = Matrix::zeros(dim);
    for col in 0..dim {
        let mut sim = Simulator::with_basis_state(width, col, 0)?;
        for c in cmds {
            if matches!(c.gate(), GateKind::Measure) {
                return Err(Error::UnsimulableGate("Measure".into()));
            }
            sim.apply(c)?;
        }
        if sim.width() > width {
            return Err(Error::TooWide(sim.width()));
        }
        for row in 0..dim {
            u.set(row, col, sim.amplitude(row));
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: u32) -> QubitId {
        QubitId(i)
    }

    #[test]
    fn hadamard_amplitudes() {
        let mut sim = Simulator::new(1);
        sim.apply(&Command::single(GateKind::H, q(0))).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sim.amplitude(0).re - h).abs() < 1e-12);
        assert!((sim.amplitude(1).re - h).abs() < 1e-12);
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let mut sim = Simulator::with_basis_state(2, 0b01, 0).unwrap();
        sim.apply(&Command::cnot(q(0), q(1))).unwrap();
        assert!((sim.amplitude(0b11).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_wide_is_rejected() {
        let mut sim = Simulator::new(0);
        assert_eq!(sim.apply(&Command::single(GateKind::X, q(24))), Err(Error::TooWide(25)));
    }

    #[test]
    fn unitary_of_swap_matches_matrix() {
        let u = circuit_unitary(&[Command::swap(q(0), q(1))], 2).unwrap();
        assert!(u.approx_eq(&GateKind::Swap.matrix().unwrap(), 1e-12));
    }
}
