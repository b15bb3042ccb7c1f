//! Forward-mode differentiation over the 2N variables {alpha_k, alphabar_k},
//! treated as independent complex seeds. Every quantity of the theory is a
//! polynomial in these seeds, so no conjugation is ever needed mid-computation;
//! the recurrences run verbatim in jet arithmetic.
//!
//! A central-difference oracle grounds the Wirtinger convention
//! d/dalpha = (d/du - i d/dv)/2, d/dalphabar = (d/du + i d/dv)/2.

use num_complex::Complex64;

use crate::opuc_core::{monic_chain, wall_chain, VerblunskyData, WallQuad};
use crate::poly::{Coeff, Poly};
use crate::{Error, Result};

/// A value bundled with all first-order partials d/dalpha_k and d/dalphabar_k.
/// The component type is itself a `Coeff`, so one nesting level gives exact
/// second derivatives (used by the Jacobi check).
#[derive(Debug, Clone)]
pub struct Jet<T = Complex64> {
    pub value: T,
    pub d_alpha: Vec<T>,
    pub d_alpha_bar: Vec<T>,
}

/// First-order jet over plain complex numbers.
pub type Jet1 = Jet<Complex64>;
/// Jet-over-jet: exact second-order partials.
pub type Jet2 = Jet<Jet<Complex64>>;
/// Polynomial in z whose coefficients are first-order jets.
pub type JetPoly = Poly<Jet1>;

impl<T: Coeff> Jet<T> {
    pub fn constant(value: T, n: usize) -> Self {
        let z = value.zero_like();
        Jet {
            value,
            d_alpha: vec![z.clone(); n],
            d_alpha_bar: vec![z; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.d_alpha.len()
    }
}

impl Jet1 {
    /// Seed jet for the variable alpha_k.
    pub fn seed_alpha(k: usize, value: Complex64, n: usize) -> Self {
        let mut j = Jet::constant(value, n);
        j.d_alpha[k] = Complex64::new(1.0, 0.0);
        j
    }

    /// Seed jet for the independent variable alphabar_k; carries value conj(alpha_k).
    pub fn seed_alpha_bar(k: usize, value: Complex64, n: usize) -> Self {
        let mut j = Jet::constant(value, n);
        j.d_alpha_bar[k] = Complex64::new(1.0, 0.0);
        j
    }

    /// Principal square root, chain rule d -> d / (2 sqrt).
    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        let f = (s * 2.0).inv();
        Jet {
            value: s,
            d_alpha: self.d_alpha.iter().map(|d| d * f).collect(),
            d_alpha_bar: self.d_alpha_bar.iter().map(|d| d * f).collect(),
        }
    }

    /// Reciprocal, chain rule d -> -d / value^2.
    pub fn recip(&self) -> Self {
        let inv = self.value.inv();
        let f = -inv * inv;
        Jet {
            value: inv,
            d_alpha: self.d_alpha.iter().map(|d| d * f).collect(),
            d_alpha_bar: self.d_alpha_bar.iter().map(|d| d * f).collect(),
        }
    }

    /// The jet of conj(f): conjugate the value, swap and conjugate the
    /// partial vectors (d conj(f)/d alpha = conj(d f / d alphabar)).
    pub fn conj(&self) -> Self {
        Jet {
            value: self.value.conj(),
            d_alpha: self.d_alpha_bar.iter().map(|d| d.conj()).collect(),
            d_alpha_bar: self.d_alpha.iter().map(|d| d.conj()).collect(),
        }
    }

    /// Real part as a jet: (f + conj(f)) / 2.
    pub fn re(&self) -> Self {
        self.add(&self.conj()).scale_c(Complex64::new(0.5, 0.0))
    }

    /// Imaginary part as a jet: (f - conj(f)) / 2i.
    pub fn im(&self) -> Self {
        self.sub(&self.conj()).scale_c(Complex64::new(0.0, -0.5))
    }
}

/// Drop a second-order jet to first order (values of the outer components).
pub fn project_o1(j: &Jet2) -> Jet1 {
    Jet {
        value: j.value.value,
        d_alpha: j.d_alpha.iter().map(|d| d.value).collect(),
        d_alpha_bar: j.d_alpha_bar.iter().map(|d| d.value).collect(),
    }
}

impl<T: Coeff> Coeff for Jet<T> {
    fn zero_like(&self) -> Self {
        Jet {
            value: self.value.zero_like(),
            d_alpha: self.d_alpha.iter().map(|d| d.zero_like()).collect(),
            d_alpha_bar: self.d_alpha_bar.iter().map(|d| d.zero_like()).collect(),
        }
    }

    fn one_like(&self) -> Self {
        let mut j = self.zero_like();
        j.value = self.value.one_like();
        j
    }

    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        Jet {
            value: self.value.add(&other.value),
            d_alpha: zip(&self.d_alpha, &other.d_alpha, |a, b| a.add(b)),
            d_alpha_bar: zip(&self.d_alpha_bar, &other.d_alpha_bar, |a, b| a.add(b)),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        Jet {
            value: self.value.sub(&other.value),
            d_alpha: zip(&self.d_alpha, &other.d_alpha, |a, b| a.sub(b)),
            d_alpha_bar: zip(&self.d_alpha_bar, &other.d_alpha_bar, |a, b| a.sub(b)),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        let prod_rule = |df: &[T], dg: &[T]| -> Vec<T> {
            df.iter()
                .zip(dg.iter())
                .map(|(a, b)| a.mul(&other.value).add(&self.value.mul(b)))
                .collect()
        };
        Jet {
            value: self.value.mul(&other.value),
            d_alpha: prod_rule(&self.d_alpha, &other.d_alpha),
            d_alpha_bar: prod_rule(&self.d_alpha_bar, &other.d_alpha_bar),
        }
    }

    fn neg(&self) -> Self {
        Jet {
            value: self.value.neg(),
            d_alpha: self.d_alpha.iter().map(|d| d.neg()).collect(),
            d_alpha_bar: self.d_alpha_bar.iter().map(|d| d.neg()).collect(),
        }
    }

    fn scale_c(&self, c: Complex64) -> Self {
        Jet {
            value: self.value.scale_c(c),
            d_alpha: self.d_alpha.iter().map(|d| d.scale_c(c)).collect(),
            d_alpha_bar: self.d_alpha_bar.iter().map(|d| d.scale_c(c)).collect(),
        }
    }

    fn mag(&self) -> f64 {
        let m = self.value.mag();
        self.d_alpha
            .iter()
            .chain(self.d_alpha_bar.iter())
            .map(|d| d.mag())
            .fold(m, f64::max)
    }
}

fn zip<T>(a: &[T], b: &[T], f: impl Fn(&T, &T) -> T) -> Vec<T> {
    a.iter().zip(b.iter()).map(|(x, y)| f(x, y)).collect()
}

/// The 2N first-order seeds at a phase-space point.
pub fn seed_point(v: &VerblunskyData) -> (Vec<Jet1>, Vec<Jet1>) {
    let n = v.len();
    let alpha = (0..n).map(|k| Jet1::seed_alpha(k, v.alpha(k), n)).collect();
    let alpha_bar = (0..n)
        .map(|k| Jet1::seed_alpha_bar(k, v.alpha(k).conj(), n))
        .collect();
    (alpha, alpha_bar)
}

/// Second-order seeds: outer value is the first-order seed, outer partial
/// with respect to the same variable is the constant 1.
pub fn seed_point_o2(v: &VerblunskyData) -> (Vec<Jet2>, Vec<Jet2>) {
    let n = v.len();
    let one1 = Jet1::constant(Complex64::new(1.0, 0.0), n);
    let alpha = (0..n)
        .map(|k| {
            let mut j = Jet2::constant(Jet1::seed_alpha(k, v.alpha(k), n), n);
            j.d_alpha[k] = one1.clone();
            j
        })
        .collect();
    let alpha_bar = (0..n)
        .map(|k| {
            let mut j = Jet2::constant(Jet1::seed_alpha_bar(k, v.alpha(k).conj(), n), n);
            j.d_alpha_bar[k] = one1.clone();
            j
        })
        .collect();
    (alpha, alpha_bar)
}

/// All jet-valued polynomial families at a point, scalar type `T`.
#[derive(Debug, Clone)]
pub struct FamilySet<T> {
    pub n_max: usize,
    pub phi: Vec<(Poly<T>, Poly<T>)>,
    pub psi: Vec<(Poly<T>, Poly<T>)>,
    pub wall: Vec<WallQuad<T>>,
}

/// Rebuild every family with the given seeds; the recurrence consumes the
/// alphabar seeds directly, never conj of a jet.
pub fn families_from_seeds<T: Coeff>(
    alpha: &[T],
    alpha_bar: &[T],
    n_max: usize,
) -> Result<FamilySet<T>> {
    if n_max > alpha.len() {
        return Err(Error::LevelOutOfRange {
            n_max,
            n_alpha: alpha.len(),
        });
    }
    let neg_alpha: Vec<T> = alpha.iter().map(|a| a.neg()).collect();
    let neg_alpha_bar: Vec<T> = alpha_bar.iter().map(|a| a.neg()).collect();
    let phi = monic_chain(alpha, alpha_bar, n_max);
    let psi = monic_chain(&neg_alpha, &neg_alpha_bar, n_max);
    let wall = wall_chain(alpha, alpha_bar, n_max)?;
    Ok(FamilySet {
        n_max,
        phi,
        psi,
        wall,
    })
}

/// First-order jet families at a phase-space point.
pub fn jet_families(v: &VerblunskyData, n_max: usize) -> Result<FamilySet<Jet1>> {
    let (alpha, alpha_bar) = seed_point(v);
    families_from_seeds(&alpha, &alpha_bar, n_max)
}

/// Second-order jet families (for the Jacobi check only).
pub fn jet_families_o2(v: &VerblunskyData, n_max: usize) -> Result<FamilySet<Jet2>> {
    let (alpha, alpha_bar) = seed_point_o2(v);
    families_from_seeds(&alpha, &alpha_bar, n_max)
}

/// Jet of rho_k^2 = 1 - alpha_k alphabar_k.
pub fn rho_sq_jet(v: &VerblunskyData, k: usize) -> Jet1 {
    let n = v.len();
    let one = Jet1::constant(Complex64::new(1.0, 0.0), n);
    let a = Jet1::seed_alpha(k, v.alpha(k), n);
    let ab = Jet1::seed_alpha_bar(k, v.alpha(k).conj(), n);
    one.sub(&a.mul(&ab))
}

/// Jet of the norm inverse R_n = prod_{j<n} rho_j^{-1}.
pub fn norm_inv_jet(v: &VerblunskyData, n: usize) -> Result<Jet1> {
    for j in 0..n {
        if v.rho(j) <= 0.0 {
            return Err(Error::NormalizationUndefined { index: j });
        }
    }
    let mut acc = Jet1::constant(Complex64::new(1.0, 0.0), v.len());
    for j in 0..n {
        acc = acc.mul(&rho_sq_jet(v, j).sqrt().recip());
    }
    Ok(acc)
}

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Central-difference Wirtinger partials (d f/d alpha_k, d f/d alphabar_k)
/// of a complex function of the coefficient vector.
pub fn fd_oracle(
    f: &dyn Fn(&[Complex64]) -> Complex64,
    coeffs: &[Complex64],
    k: usize,
    h: f64,
) -> (Complex64, Complex64) {
    let mut work = coeffs.to_vec();
    let base = coeffs[k];
    let mut at = |delta: Complex64| {
        work[k] = base + delta;
        f(&work)
    };
    let fu = (at(Complex64::new(h, 0.0)) - at(Complex64::new(-h, 0.0))) / (2.0 * h);
    let fv = (at(Complex64::new(0.0, h)) - at(Complex64::new(0.0, -h))) / (2.0 * h);
    let i = Complex64::new(0.0, 1.0);
    ((fu - i * fv) * 0.5, (fu + i * fv) * 0.5)
}

/// Oracle with a Richardson-style consistency flag: recompute at h/2 and
/// flag when the two estimates disagree by more than `suspicion` (catches
/// cancellation near rho -> 0).
pub fn fd_oracle_checked(
    f: &dyn Fn(&[Complex64]) -> Complex64,
    coeffs: &[Complex64],
    k: usize,
    h: f64,
    suspicion: f64,
) -> ((Complex64, Complex64), bool) {
    let coarse = fd_oracle(f, coeffs, k, h);
    let fine = fd_oracle(f, coeffs, k, h / 2.0);
    let dev = (coarse.0 - fine.0).norm().max((coarse.1 - fine.1).norm());
    (fine, dev > suspicion)
}
