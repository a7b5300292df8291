#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rand::Rng;

use qcflow::backends::Simulator;
use qcflow::linalg::Matrix;
use qcflow::{Command, GateKind, QubitId};

pub fn q(i: u32) -> QubitId {
    QubitId(i)
}

pub fn qs(n: u32) -> Vec<QubitId> {
    (0..n).map(q).collect()
}

/// Largest entry deviation after removing a global phase.
pub fn phase_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (i, _) = a
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .unwrap();
    if a[i].norm() < 1e-12 {
        return b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let r = b[i] / a[i];
    let phase = r / r.norm();
    a.iter().zip(b).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
}

/// Final state of `cmds` on `width` qubits starting from `|0…0⟩`.
pub fn final_state(cmds: &[Command], width: usize) -> Vec<C64> {
    let mut sim = Simulator::new(0);
    sim.ensure_width(width).unwrap();
    sim.run(cmds).unwrap();
    sim.amplitudes().to_vec()
}

/// Diagonal matrix with `phase` on basis states where every bit in `bits` is set.
pub fn diag_phase(width: usize, bits: &[usize], phase: f64) -> Matrix {
    let mask: usize = bits.iter().map(|b| 1 << b).sum();
    let entries: Vec<C64> = (0..1usize << width)
        .map(|i| {
            if i & mask == mask {
                C64::from_polar(1.0, phase)
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    Matrix::diagonal(&entries)
}

/// Permutation matrix of a classical map on basis states.
pub fn permutation(width: usize, f: impl Fn(usize) -> usize) -> Matrix {
    Matrix::from_fn(1 << width, |r, c| {
        if f(c) == r {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Random product-state preparation followed by `len` random gates drawn
/// from a Clifford+T+rotation pool with one- and two-qubit gates.
pub fn random_circuit(rng: &mut impl Rng, k: u32, len: usize) -> Vec<Command> {
    let mut cmds = Vec::new();
    for i in 0..k {
        cmds.push(Command::single(GateKind::Ry(rng.random_range(0.0..PI)), q(i)));
        cmds.push(Command::single(GateKind::Rz(rng.random_range(0.0..TAU)), q(i)));
    }
    for _ in 0..len {
        let a = rng.random_range(0..k);
        let b = if k > 1 { (a + rng.random_range(1..k)) % k } else { a };
        let angle = rng.random_range(-TAU..TAU);
        let cmd = match rng.random_range(0..14) {
            0 => Command::single(GateKind::H, q(a)),
            1 => Command::single(GateKind::T, q(a)),
            2 => Command::single(GateKind::Tdg, q(a)),
            3 => Command::single(GateKind::S, q(a)),
            4 => Command::single(GateKind::X, q(a)),
            5 => Command::single(GateKind::Rz(angle), q(a)),
            6 => Command::single(GateKind::Rx(angle), q(a)),
            7 => Command::single(GateKind::Phase(angle), q(a)),
            8 if a != b => Command::controlled(GateKind::Phase(angle), vec![q(a)], q(b)),
            9 | 10 if a != b => Command::cnot(q(a), q(b)),
            11 if a != b => Command::swap(q(a), q(b)),
            _ => Command::single(GateKind::Z, q(a)),
        };
        cmds.push(cmd);
    }
    cmds
}
