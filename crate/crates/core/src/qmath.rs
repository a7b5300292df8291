//! Reversible arithmetic: Fourier-space constant adders, the modular adder,
//! the controlled modular multiplier and one Shor phase-estimation step.
//!
//! Registers are little-endian: qubit `k` of a register holds bit `k`.

use std::f64::consts::TAU;

use crate::decompose::QFT_NOSWAP;
use crate::engine::{Backend, Pipeline};
use crate::error::{Error, Result};
use crate::gate::{Command, Composite, GateKind, QubitId};

/// Phase angles of the Fourier-space adder for constant `c` on a `width`-qubit
/// register prepared by the no-swap QFT. Qubit `j` carries `2πx / 2^{j+1}`,
/// so adding `c` rotates it by `2π (c mod 2^{j+1}) / 2^{j+1}`.
pub fn phi_add_angles(c: i64, width: usize) -> Vec<f64> {
    (0..width)
        .map(|j| {
            let m = 1i128 << (j + 1);
            let r = i128::from(c).rem_euclid(m);
            TAU * r as f64 / m as f64
        })
        .collect()
}

/// Applies the no-swap QFT composite to `reg`.
pub fn qft_noswap<B: Backend>(eng: &mut Pipeline<B>, reg: &[QubitId]) -> Result<()> {
    eng.send(vec![Command::composite(
        Composite::new(QFT_NOSWAP, Vec::new()),
        reg.to_vec(),
    )])
}

/// Adds `c` to a register already in the no-swap Fourier basis using one
/// phase rotation per qubit.
pub fn phi_add_const<B: Backend>(eng: &mut Pipeline<B>, c: i64, reg: &[QubitId]) -> Result<()> {
    let cmds = phi_add_angles(c, reg.len())
        .into_iter()
        .zip(reg)
        .map(|(theta, &q)| Command::single(GateKind::Phase(theta), q))
        .collect();
    eng.send(cmds)
}

/// `|b⟩ → |b + c mod 2^w⟩`, with the basis changes in a compute section.
pub fn add_const<B: Backend>(eng: &mut Pipeline<B>, c: i64, reg: &[QubitId]) -> Result<()> {
    let mut section = eng.compute(|e| qft_noswap(e, reg))?;
    phi_add_const(eng, c, reg)?;
    eng.uncompute(&mut section)
}

/// `|b⟩ → |b + c mod N⟩` for `b < N` on a register with one overflow bit.
/// `ancilla` must be clean and is returned clean. Controls come from the
/// caller's control context.
pub fn add_const_mod_n<B: Backend>(
    eng: &mut Pipeline<B>,
    c: u64,
    modulus: u64,
    reg: &[QubitId],
    ancilla: QubitId,
) -> Result<()> {
    if c >= modulus {
        return Err(Error::ConstantOutOfRange { c, modulus });
    }
    if reg.len() < bit_length(modulus) + 1 {
        return Err(Error::InvalidParameter(format!(
            "register of {} qubits too small for modulus {modulus}",
            reg.len()
        )));
    }
    let (c, n) = (c as i64, modulus as i64);
    let msb = reg[reg.len() - 1];
    add_const(eng, c, reg)?;
    let mut section = eng.compute(|e| {
        add_const(e, -n, reg)?;
        e.send(vec![Command::cnot(msb, ancilla)])?;
        e.with_control(&[ancilla], |e| add_const(e, n, reg))
    })?;
    add_const(eng, -c, reg)?;
    eng.custom_uncompute(&mut section, |e| {
        e.send(vec![
            Command::single(GateKind::X, msb),
            Command::cnot(msb, ancilla),
            Command::single(GateKind::X, msb),
        ])
    })?;
    add_const(eng, c, reg)
}

/// `|x⟩ → |a·x mod N⟩` for `x < N`, optionally controlled. Uses an
/// `(n+1)`-qubit work register and one ancilla, both released clean.
pub fn mul_by_const_mod_n<B: Backend>(
    eng: &mut Pipeline<B>,
    a: u64,
    modulus: u64,
    x: &[QubitId],
    control: Option<QubitId>,
) -> Result<()> {
    let a_inv = modinv(a, modulus)?;
    let n = x.len();
    let work = eng.try_allocate_qureg(n + 1)?;
    let ancilla = eng.allocate()?;
    let body = |e: &mut Pipeline<B>| -> Result<()> {
        for (i, &xi) in x.iter().enumerate() {
            let c = mulmod(a, pow2_mod(i, modulus), modulus);
            e.with_control(&[xi], |e| add_const_mod_n(e, c, modulus, &work, ancilla))?;
        }
        let swaps = (0..n).map(|i| Command::swap(work[i], x[i])).collect();
        e.send(swaps)?;
        for (i, &xi) in x.iter().enumerate() {
            let c = mulmod(a_inv, pow2_mod(i, modulus), modulus);
            let neg = (modulus - c) % modulus;
            e.with_control(&[xi], |e| add_const_mod_n(e, neg, modulus, &work, ancilla))?;
        }
        Ok(())
    };
    match control {
        Some(c) => eng.with_control(&[c], body)?,
        None => body(eng)?,
    }
    eng.deallocate_all(&work)?;
    eng.deallocate(ancilla)
}

/// Validated parameters of a Shor run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShorParams {
    pub modulus: u64,
    pub base: u64,
    /// Bits of the modulus, `⌈log₂ N⌉`.
    pub n: usize,
}

impl ShorParams {
    pub fn new(modulus: u64, base: u64) -> Result<Self> {
        if modulus < 9 || modulus.is_multiple_of(2) || is_prime(modulus) {
            return Err(Error::InvalidN(modulus));
        }
        if base < 2 || base >= modulus {
            return Err(Error::ConstantOutOfRange { c: base, modulus });
        }
        if gcd(base, modulus) != 1 {
            return Err(Error::NotCoprime { a: base, modulus });
        }
        Ok(Self {
            modulus,
            base,
            n: bit_length(modulus),
        })
    }

    /// Uses the smallest base coprime to the modulus.
    pub fn with_default_base(modulus: u64) -> Result<Self> {
        if modulus < 9 {
            return Err(Error::InvalidN(modulus));
        }
        let base = (2..modulus)
            .find(|&a| gcd(a, modulus) == 1)
            .ok_or(Error::InvalidN(modulus))?;
        Self::new(modulus, base)
    }

    /// Number of phase-estimation iterations, `2⌈log₂ N⌉`.
    pub fn iterations(&self) -> usize {
        2 * self.n
    }

    /// Multiplier of iteration `k`: `a^{2^k} mod N`.
    pub fn multiplier(&self, k: usize) -> u64 {
        let mut m = self.base % self.modulus;
        for _ in 0..k {
            m = mulmod(m, m, self.modulus);
        }
        m
    }

    /// Qubits used by one iteration: control, `x`, work register, ancilla.
    pub fn width(&self) -> usize {
        2 * self.n + 3
    }
}

/// Qubits of one iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShorIteration {
    pub control: QubitId,
    pub x: Vec<QubitId>,
}

/// One phase-estimation step: `x` prepared in `|1⟩`, a control in `|+⟩`
/// driving multiplication by `a^{2^k} mod N`, then `H` and measurement of the
/// control.
pub fn shor_iteration<B: Backend>(eng: &mut Pipeline<B>, params: &ShorParams, k: usize) -> Result<ShorIteration> {
    if k >= params.iterations() {
        return Err(Error::InvalidParameter(format!(
            "iteration {k} out of range for {} iterations",
            params.iterations()
        )));
    }
    let x = eng.try_allocate_qureg(params.n)?;
    let control = eng.allocate()?;
    eng.send(vec![
        Command::single(GateKind::X, x[0]),
        Command::single(GateKind::H, control),
    ])?;
    mul_by_const_mod_n(eng, params.multiplier(k), params.modulus, &x, Some(control))?;
    eng.send(vec![Command::single(GateKind::H, control), Command::measure(control)])?;
    Ok(ShorIteration { control, x })
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `n`, in `[1, n)`.
pub fn modinv(a: u64, n: u64) -> Result<u64> {
    let (mut r0, mut r1) = (i128::from(n), i128::from(a % n));
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(Error::NotCoprime { a, modulus: n });
    }
    Ok(t0.rem_euclid(i128::from(n)) as u64)
}

pub fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(n)) as u64
}

fn pow2_mod(i: usize, n: u64) -> u64 {
    (0..i).fold(1 % n, |acc, _| mulmod(acc, 2, n))
}

pub fn bit_length(n: u64) -> usize {
    (u64::BITS - n.leading_zeros()) as usize
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modinv_examples() {
        assert_eq!(modinv(7, 15), Ok(13));
        assert_eq!(modinv(1, 21), Ok(1));
        assert_eq!(modinv(3, 15), Err(Error::NotCoprime { a: 3, modulus: 15 }));
    }

    #[test]
    fn modinv_matches_brute_force() {
        for n in 2..60u64 {
            for a in 1..n {
                let brute = (1..n).find(|&b| a * b % n == 1);
                assert_eq!(modinv(a, n).ok(), brute, "a={a} n={n}");
            }
        }
    }

    #[test]
    fn phi_add_zero_is_all_zero_angles() {
        assert!(phi_add_angles(0, 5).iter().all(|&t| t == 0.0));
        assert_eq!(phi_add_angles(3, 4).len(), 4);
    }

    #[test]
    fn negative_constants_wrap() {
        let a = phi_add_angles(-3, 4);
        let b = phi_add_angles(13, 4);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn shor_params() {
        let p = ShorParams::new(15, 7).unwrap();
        assert_eq!(p.n, 4);
        assert_eq!(p.iterations(), 8);
        assert_eq!(p.width(), 11);
        assert_eq!(p.multiplier(2), 1);
        assert_eq!(ShorParams::new(15, 2).unwrap().multiplier(0), 2);
        assert_eq!(ShorParams::with_default_base(21).unwrap().base, 2);
        assert_eq!(ShorParams::new(13, 2), Err(Error::InvalidN(13)));
        assert_eq!(ShorParams::new(16, 3), Err(Error::InvalidN(16)));
        assert!(matches!(ShorParams::new(15, 5), Err(Error::NotCoprime { .. })));
    }
}
