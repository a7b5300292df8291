//! Dense complex matrices for gate semantics and verification.

use std::ops::Mul;

use num_complex::Complex64;

pub type C64 = Complex64;

/// Square row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from rows; panics if the rows are not square.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix must be square");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, *e);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`; `other` occupies the low index bits.
    pub fn kron(&self, other: &Matrix) -> Self {
        let d = self.dim * other.dim;
        Self::from_fn(d, |r, c| {
            self.get(r / other.dim, c / other.dim) * other.get(r % other.dim, c % other.dim)
        })
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// Equality up to a global phase factor.
    pub fn approx_eq_up_to_phase(&self, other: &Matrix, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        // align phases on the largest entry of `other`
        let (idx, _) =
            other.data.iter().enumerate().fold(
                (0, 0.0),
                |best, (i, v)| if v.norm() > best.1 { (i, v.norm()) } else { best },
            );
        let a = self.data[idx];
        let b = other.data[idx];
        if a.norm() < 1e-12 {
            return false;
        }
        let phase = b / a;
        let phase = phase / phase.norm();
        self.scale(phase).approx_eq(other, tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).approx_eq(&Matrix::identity(self.dim), tol)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.get(k, c);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_places_other_in_low_bits() {
        let x = Matrix::from_rows(&[
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ]);
        let id = Matrix::identity(2);
        // X on the low bit maps |00> -> |01>
        let m = id.kron(&x);
        assert_eq!(m.get(1, 0), C64::new(1.0, 0.0));
        assert_eq!(m.get(2, 0), C64::new(0.0, 0.0));
    }

    #[test]
    fn phase_insensitive_comparison() {
        let id = Matrix::identity(4);
        let rotated = id.scale(C64::from_polar(1.0, 0.7));
        assert!(rotated.approx_eq_up_to_phase(&id, 1e-12));
        assert!(!rotated.approx_eq(&id, 1e-3));
    }
}
