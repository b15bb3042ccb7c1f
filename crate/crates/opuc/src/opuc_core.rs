//! Polynomial families built from Verblunsky coefficients: monic orthogonal
//! polynomials and their reverses, second kind polynomials, rotated families,
//! Wall polynomials via the 2x2 transfer-matrix product, the Pinter-Nevai
//! formulae linking them, and the orthonormal normalization.

use num_complex::Complex64;

use crate::poly::{CPoly, Coeff, Poly};
use crate::{Error, Result, EPS_UNIT};

/// Structural tolerance for divisions by z inside the transfer product.
pub const EPS_STRUCT: f64 = 1e-12;

/// A finite sequence of Verblunsky coefficients; the phase-space point.
#[derive(Debug, Clone)]
pub struct VerblunskyData {
    coeffs: Vec<Complex64>,
    terminal_unimodular: bool,
}

impl VerblunskyData {
    pub fn new(coeffs: Vec<Complex64>, terminal_unimodular: bool) -> Result<Self> {
        let n = coeffs.len();
        for (k, a) in coeffs.iter().enumerate() {
            let m = a.norm();
            let last = k + 1 == n;
            if last && terminal_unimodular {
                if (m - 1.0).abs() > EPS_UNIT {
                    return Err(Error::TerminalNotUnimodular { modulus: m });
                }
            } else if m >= 1.0 {
                return Err(Error::CoefficientOutOfDisc { index: k, modulus: m });
            }
        }
        Ok(VerblunskyData {
            coeffs,
            terminal_unimodular,
        })
    }

    /// All coefficients strictly inside the disc.
    pub fn in_disc(coeffs: Vec<Complex64>) -> Result<Self> {
        VerblunskyData::new(coeffs, false)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn alpha(&self, k: usize) -> Complex64 {
        self.coeffs[k]
    }

    pub fn terminal_unimodular(&self) -> bool {
        self.terminal_unimodular
    }

    pub fn rho_sq(&self, k: usize) -> f64 {
        (1.0 - self.coeffs[k].norm_sqr()).max(0.0)
    }

    pub fn rho(&self, k: usize) -> f64 {
        self.rho_sq(k).sqrt()
    }

    /// The family with every coefficient negated (second kind polynomials).
    pub fn negated(&self) -> Self {
        VerblunskyData {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
            terminal_unimodular: self.terminal_unimodular,
        }
    }

    /// The family with coefficients {lambda alpha_k}, |lambda| = 1.
    pub fn rotated(&self, lambda: Complex64) -> Result<Self> {
        if (lambda.norm() - 1.0).abs() > EPS_UNIT {
            return Err(Error::NonUnimodular {
                modulus: lambda.norm(),
            });
        }
        Ok(VerblunskyData {
            coeffs: self.coeffs.iter().map(|a| lambda * a).collect(),
            terminal_unimodular: self.terminal_unimodular,
        })
    }
}

/// One application of the Szego recurrence: (Phi, Phi*) at degree n to
/// degree n+1, with alpha and alpha-bar supplied as independent scalars.
pub fn szego_step_generic<T: Coeff>(
    phi: &Poly<T>,
    phi_star: &Poly<T>,
    alpha: &T,
    alpha_bar: &T,
) -> (Poly<T>, Poly<T>) {
    let next = phi.shift_up().sub_poly(&phi_star.scale_t(alpha_bar));
    let d = next.nominal_degree();
    let next_star = phi_star.sub_poly(&phi.shift_up().scale_t(alpha)).pad_to(d);
    (next, next_star)
}

/// Szego step on plain complex polynomials; alpha-bar is the conjugate.
pub fn szego_step(phi: &CPoly, phi_star: &CPoly, alpha: Complex64) -> (CPoly, CPoly) {
    szego_step_generic(phi, phi_star, &alpha, &alpha.conj())
}

/// (Phi_n, Phi_n*) for n = 0..=n_max from iterated Szego steps.
pub fn monic_chain<T: Coeff>(alpha: &[T], alpha_bar: &[T], n_max: usize) -> Vec<(Poly<T>, Poly<T>)> {
    assert!(n_max <= alpha.len());
    assert_eq!(alpha.len(), alpha_bar.len());
    let one = if alpha.is_empty() {
        // degenerate: no coefficients at all, only n = 0 exists
        assert_eq!(n_max, 0);
        return vec![];
    } else {
        alpha[0].one_like()
    };
    let mut out = Vec::with_capacity(n_max + 1);
    let mut phi = Poly::constant(one.clone());
    let mut phi_star = Poly::constant(one);
    out.push((phi.clone(), phi_star.clone()));
    for n in 0..n_max {
        let (p, ps) = szego_step_generic(&phi, &phi_star, &alpha[n], &alpha_bar[n]);
        phi = p;
        phi_star = ps;
        out.push((phi.clone(), phi_star.clone()));
    }
    out
}

/// The Wall quadruple (A_n, B_n, A_n*, B_n*) at one level.
#[derive(Debug, Clone)]
pub struct WallQuad<T> {
    pub a: Poly<T>,
    pub b: Poly<T>,
    pub a_star: Poly<T>,
    pub b_star: Poly<T>,
}

/// Wall polynomials for n = 0..m-1 by accumulating the transfer product
/// [[z, -abar_k], [-a_k z, 1]]; the accumulated matrix reads
/// [[z B_n*, -A_n*], [-z A_n, B_n]]. The divisions by z are structural
/// coefficient shifts whose constant terms vanish identically.
pub fn wall_chain<T: Coeff>(alpha: &[T], alpha_bar: &[T], m: usize) -> Result<Vec<WallQuad<T>>> {
    assert!(m <= alpha.len());
    assert_eq!(alpha.len(), alpha_bar.len());
    if m == 0 {
        return Ok(vec![]);
    }
    let one = alpha[0].one_like();
    let zero = alpha[0].zero_like();
    // accumulated product, entries [[m11, m12], [m21, m22]], starts as identity
    let mut m11 = Poly::constant(one.clone());
    let mut m12 = Poly::constant(zero.clone());
    let mut m21 = Poly::constant(zero);
    let mut m22 = Poly::constant(one);
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        // left-multiply by [[z, -abar_k], [-a_k z, 1]]
        let (a, ab) = (&alpha[k], &alpha_bar[k]);
        let n11 = m11.shift_up().sub_poly(&m21.scale_t(ab));
        let n12 = m12.shift_up().sub_poly(&m22.scale_t(ab));
        let n21 = m21.sub_poly(&m11.shift_up().scale_t(a));
        let n22 = m22.sub_poly(&m12.shift_up().scale_t(a));
        m11 = n11;
        m12 = n12;
        m21 = n21;
        m22 = n22;
        let b_star = m11.shift_down(EPS_STRUCT)?;
        let a_star = m12.neg_poly();
        let a = m21.neg_poly().shift_down(EPS_STRUCT)?;
        let b = m22.clone();
        out.push(WallQuad { a, b, a_star, b_star });
    }
    Ok(out)
}

/// All polynomial families of the theory at one phase-space point.
#[derive(Debug, Clone)]
pub struct PolyFamily {
    pub n_max: usize,
    /// (Phi_n, Phi_n*) for n = 0..=n_max.
    pub phi: Vec<(CPoly, CPoly)>,
    /// (Psi_n, Psi_n*) for n = 0..=n_max.
    pub psi: Vec<(CPoly, CPoly)>,
    /// Wall quadruples for n = 0..n_max (index n built from alpha_0..alpha_n).
    pub wall: Vec<WallQuad<Complex64>>,
    /// ||Phi_n|| = prod_{j<n} rho_j for n = 0..=n_max.
    pub norms: Vec<f64>,
    /// rho_j for j = 0..n_max (only indices < n_max are used by norms).
    pub rho: Vec<f64>,
}

/// Families for the coefficient sequence itself (Phi) and its negation (Psi).
pub fn monic_families(v: &VerblunskyData, n_max: usize) -> Result<PolyFamily> {
    if n_max > v.len() {
        return Err(Error::LevelOutOfRange {
            n_max,
            n_alpha: v.len(),
        });
    }
    let alpha: Vec<Complex64> = v.coeffs().to_vec();
    let alpha_bar: Vec<Complex64> = alpha.iter().map(|a| a.conj()).collect();
    let neg_alpha: Vec<Complex64> = alpha.iter().map(|a| -a).collect();
    let neg_alpha_bar: Vec<Complex64> = alpha_bar.iter().map(|a| -a).collect();

    let phi = if n_max == 0 && alpha.is_empty() {
        vec![(CPoly::one(), CPoly::one())]
    } else {
        monic_chain(&alpha, &alpha_bar, n_max)
    };
    let psi = if n_max == 0 && alpha.is_empty() {
        vec![(CPoly::one(), CPoly::one())]
    } else {
        monic_chain(&neg_alpha, &neg_alpha_bar, n_max)
    };
    let wall = wall_chain(&alpha, &alpha_bar, n_max.min(v.len()))?;

    let mut norms = Vec::with_capacity(n_max + 1);
    let mut acc = 1.0;
    norms.push(acc);
    for j in 0..n_max {
        acc *= v.rho(j);
        norms.push(acc);
    }
    let rho = (0..n_max.min(v.len())).map(|j| v.rho(j)).collect();
    Ok(PolyFamily {
        n_max,
        phi,
        psi,
        wall,
        norms,
        rho,
    })
}

/// Families for the rotated coefficients {lambda alpha_k}. lambda = -1
/// reproduces the psi family of `monic_families` exactly.
pub fn rotated_family(v: &VerblunskyData, lambda: Complex64, n_max: usize) -> Result<PolyFamily> {
    let rotated = v.rotated(lambda)?;
    monic_families(&rotated, n_max)
}

/// Wall quadruples alone, for n = 0..m-1.
pub fn wall_family(v: &VerblunskyData, m: usize) -> Result<Vec<WallQuad<Complex64>>> {
    if m > v.len() {
        return Err(Error::LevelOutOfRange {
            n_max: m,
            n_alpha: v.len(),
        });
    }
    let alpha: Vec<Complex64> = v.coeffs().to_vec();
    let alpha_bar: Vec<Complex64> = alpha.iter().map(|a| a.conj()).collect();
    wall_chain(&alpha, &alpha_bar, m)
}

/// Orthonormal families phi_n = R_n Phi_n, psi_n = R_n Psi_n (reverses scaled
/// identically), with R_n = prod_{j<n} rho_j^{-1}.
#[derive(Debug, Clone)]
pub struct NormalizedFamily {
    pub n_max: usize,
    pub phi: Vec<(CPoly, CPoly)>,
    pub psi: Vec<(CPoly, CPoly)>,
    /// R_n for n = 0..=n_max.
    pub norm_inv: Vec<f64>,
}

pub fn normalized_families(fam: &PolyFamily) -> Result<NormalizedFamily> {
    for (j, &r) in fam.rho.iter().enumerate() {
        if r <= 0.0 {
            return Err(Error::NormalizationUndefined { index: j });
        }
    }
    let norm_inv: Vec<f64> = fam.norms.iter().map(|n| 1.0 / n).collect();
    let scale_pair = |(p, ps): &(CPoly, CPoly), r: f64| {
        let c = Complex64::new(r, 0.0);
        (p.scale_c(c), ps.scale_c(c))
    };
    let phi = fam
        .phi
        .iter()
        .enumerate()
        .map(|(n, pair)| scale_pair(pair, norm_inv[n]))
        .collect();
    let psi = fam
        .psi
        .iter()
        .enumerate()
        .map(|(n, pair)| scale_pair(pair, norm_inv[n]))
        .collect();
    Ok(NormalizedFamily {
        n_max: fam.n_max,
        phi,
        psi,
        norm_inv,
    })
}

/// Residuals of the Pinter-Nevai formulae at level n:
///   Phi_n = z B*_{n-1} - A*_{n-1},   Psi_n = z B*_{n-1} + A*_{n-1},
///   A_{n-1} = (Psi_n* - Phi_n*) / 2z,  B_{n-1} = (Psi_n* + Phi_n*) / 2.
#[derive(Debug, Clone, Copy)]
pub struct PinterNevaiResidual {
    pub max_abs: f64,
    pub scale: f64,
}

impl PinterNevaiResidual {
    pub fn max_rel(&self) -> f64 {
        self.max_abs / self.scale
    }
}

pub fn pinter_nevai(v: &VerblunskyData, n: usize) -> Result<PinterNevaiResidual> {
    assert!(n >= 1, "Pinter-Nevai relates level n >= 1 to Wall level n-1");
    let fam = monic_families(v, n)?;
    let (phi_n, phi_n_star) = &fam.phi[n];
    let (psi_n, psi_n_star) = &fam.psi[n];
    let wq = &fam.wall[n - 1];

    let zb = wq.b_star.shift_up();
    let lhs1 = zb.sub_poly(&wq.a_star); // should equal Phi_n
    let lhs2 = zb.add_poly(&wq.a_star); // should equal Psi_n

    // inverse direction
    let half = Complex64::new(0.5, 0.0);
    let a_rec = psi_n_star
        .sub_poly(phi_n_star)
        .scale_c(half)
        .shift_down(EPS_STRUCT)?; // should equal A_{n-1}
    let b_rec = psi_n_star.add_poly(phi_n_star).scale_c(half); // B_{n-1}

    let scale = [
        phi_n.max_mag(),
        psi_n.max_mag(),
        wq.a.max_mag(),
        wq.b.max_mag(),
        1.0,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let max_abs = [
        lhs1.max_coeff_dev(phi_n),
        lhs2.max_coeff_dev(psi_n),
        a_rec.max_coeff_dev(&wq.a),
        b_rec.max_coeff_dev(&wq.b),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(PinterNevaiResidual { max_abs, scale })
}
