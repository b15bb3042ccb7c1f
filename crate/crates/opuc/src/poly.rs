//! Dense univariate polynomials over a coefficient scalar.
//!
//! The scalar is abstracted so the same recurrence code runs over plain
//! complex numbers and over Wirtinger jets (first or second order). The
//! declared (nominal) degree travels with every polynomial: reversal is
//! degree-relative and star polynomials produced by the recurrence may
//! have vanishing leading terms.

use num_complex::Complex64;

use crate::{Error, Result};

/// Coefficient scalar for polynomial and recurrence arithmetic.
///
/// `zero_like`/`one_like` exist because a jet's shape (its partial count)
/// is a runtime property; constants must be minted from a value that
/// already has the right shape.
pub trait Coeff: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiply by a constant complex number (independent of the jet variables).
    fn scale_c(&self, c: Complex64) -> Self;
    /// Magnitude used for residual scales and structural asserts.
    fn mag(&self) -> f64;
}

impl Coeff for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale_c(&self, c: Complex64) -> Self {
        self * c
    }
    fn mag(&self) -> f64 {
        self.norm()
    }
}

/// Dense polynomial c0 + c1 z + ... + c_d z^d with d = declared degree.
/// `coeffs` always has length `nominal_degree + 1`; trailing zeros allowed.
#[derive(Debug, Clone)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

/// Polynomial with plain complex coefficients.
pub type CPoly = Poly<Complex64>;

impl<T: Coeff> Poly<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Poly { coeffs: vec![c] }
    }

    pub fn nominal_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest index with a nonzero coefficient (0 for the zero polynomial).
    pub fn actual_degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.mag() != 0.0)
            .unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        if k < self.coeffs.len() {
            self.coeffs[k].clone()
        } else {
            self.coeffs[0].zero_like()
        }
    }

    /// Pad with zero coefficients up to declared degree `d`.
    pub fn pad_to(&self, d: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        let z = self.coeffs[0].zero_like();
        while coeffs.len() < d + 1 {
            coeffs.push(z.clone());
        }
        Poly { coeffs }
    }

    /// Multiplication by z: shifts coefficients up, degree + 1.
    pub fn shift_up(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(self.coeffs[0].zero_like());
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    /// Division by z as a structural index shift. The constant term must be
    /// (numerically) zero; anything above `eps_rel * max |coeff|` is an
    /// internal-consistency failure, not a rounding artifact.
    pub fn shift_down(&self, eps_rel: f64) -> Result<Self> {
        let scale = self.max_mag().max(1.0);
        let limit = eps_rel * scale;
        let found = self.coeffs[0].mag();
        if found > limit {
            return Err(Error::StructuralDivision { found, limit });
        }
        if self.coeffs.len() == 1 {
            return Ok(Poly::constant(self.coeffs[0].zero_like()));
        }
        Ok(Poly {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    pub fn add_poly(&self, other: &Self) -> Self {
        let d = self.nominal_degree().max(other.nominal_degree());
        let a = self.pad_to(d);
        let b = other.pad_to(d);
        Poly {
            coeffs: a
                .coeffs
                .iter()
                .zip(b.coeffs.iter())
                .map(|(x, y)| x.add(y))
                .collect(),
        }
    }

    pub fn sub_poly(&self, other: &Self) -> Self {
        let d = self.nominal_degree().max(other.nominal_degree());
        let a = self.pad_to(d);
        let b = other.pad_to(d);
        Poly {
            coeffs: a
                .coeffs
                .iter()
                .zip(b.coeffs.iter())
                .map(|(x, y)| x.sub(y))
                .collect(),
        }
    }

    pub fn neg_poly(&self) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    /// Multiply every coefficient by a scalar of the coefficient type.
    pub fn scale_t(&self, s: &T) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    /// Multiply every coefficient by a constant complex number.
    pub fn scale_c(&self, c: Complex64) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|x| x.scale_c(c)).collect(),
        }
    }

    /// Horner evaluation at a complex parameter z.
    pub fn eval(&self, z: Complex64) -> T {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale_c(z).add(c);
        }
        acc
    }

    /// Exact coefficient-calculus derivative in z.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Poly::constant(self.coeffs[0].zero_like());
        }
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale_c(Complex64::new(k as f64, 0.0)))
                .collect(),
        }
    }

    pub fn max_mag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.mag()).fold(0.0, f64::max)
    }

    /// Max coefficient-wise magnitude of (self - other), padded to a common degree.
    pub fn max_coeff_dev(&self, other: &Self) -> f64 {
        self.sub_poly(other).max_mag()
    }
}

impl CPoly {
    pub fn one() -> Self {
        Poly::constant(Complex64::new(1.0, 0.0))
    }

    /// Reversal at the declared degree n: q_k = conj(p_{n-k}), so that
    /// q(z) = z^n conj(p(1/conj(z))).
    pub fn reverse(&self, n: usize) -> Result<Self> {
        let actual = self.actual_degree();
        if self.coeffs.iter().any(|c| c.mag() != 0.0) && actual > n {
            return Err(Error::DegreeTooSmall {
                declared: n,
                actual,
            });
        }
        let coeffs = (0..=n).map(|k| self.coeff(n - k).conj()).collect();
        Ok(Poly { coeffs })
    }

    /// Plain power-sum evaluation; oracle for Horner.
    pub fn eval_naive(&self, z: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut zk = Complex64::new(1.0, 0.0);
        for c in &self.coeffs {
            sum += c * zk;
            zk *= z;
        }
        sum
    }
}
