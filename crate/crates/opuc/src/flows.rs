//! Hamiltonian flows generated by the bracket: the vector field dalpha_k/dt
//! = {H, alpha_k}, a classical RK4 integrator with a disc-exit guard, the
//! exact rotation flow generated by the norm constant R_n, and the
//! Ablowitz-Ladik involutivity check on the discriminant combination
//! D_n(z) = B_n(z) + z B_n*(z).

use num_complex::Complex64;

use crate::opuc_core::VerblunskyData;
use crate::poisson::{bracket, BracketContext};
use crate::report::Adjudication;
use crate::wirtinger::{jet_families, norm_inv_jet, seed_point, Jet1};
use crate::{Error, Result};

/// Flows are generated by real observables; complex family evaluations are
/// admitted only through their explicit Re/Im parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hamiltonian {
    /// R_n = prod_{j<n} rho_j^{-1}.
    NormInvR { n: usize },
    /// Re(B_n(z) + z B_n*(z)).
    DiscriminantRe { n: usize, z: Complex64 },
    /// Im(B_n(z) + z B_n*(z)).
    DiscriminantIm { n: usize, z: Complex64 },
}

impl Hamiltonian {
    /// Parse a CLI name; the discriminant variants require an evaluation
    /// point.
    pub fn parse(name: &str, n: usize, z: Option<Complex64>) -> Result<Self> {
        match name {
            "norm-inv" | "norm_inv_R" | "norm-inv-r" => Ok(Hamiltonian::NormInvR { n }),
            "disc-re" | "disc-im" => {
                let z = z.ok_or_else(|| {
                    Error::Parse(format!("hamiltonian {name} requires --z"))
                })?;
                if name == "disc-re" {
                    Ok(Hamiltonian::DiscriminantRe { n, z })
                } else {
                    Ok(Hamiltonian::DiscriminantIm { n, z })
                }
            }
            other => Err(Error::UnknownHamiltonian(other.to_string())),
        }
    }

    pub fn level(&self) -> usize {
        match self {
            Hamiltonian::NormInvR { n } => *n,
            Hamiltonian::DiscriminantRe { n, .. } => *n,
            Hamiltonian::DiscriminantIm { n, .. } => *n,
        }
    }
}

/// Jet of the discriminant combination B_n(z) + z B_n*(z).
pub fn discriminant_jet(v: &VerblunskyData, n: usize, z: Complex64) -> Result<Jet1> {
    use crate::poly::Coeff;
    if n >= v.len() {
        return Err(Error::LevelOutOfRange {
            n_max: n,
            n_alpha: v.len(),
        });
    }
    let fams = jet_families(v, n + 1)?;
    let q = &fams.wall[n];
    Ok(q.b.eval(z).add(&q.b_star.eval(z).scale_c(z)))
}

/// Plain value of the discriminant combination.
pub fn discriminant_value(v: &VerblunskyData, n: usize, z: Complex64) -> Result<Complex64> {
    Ok(discriminant_jet(v, n, z)?.value)
}

/// The Hamiltonian as a first-order jet at the given point.
pub fn hamiltonian_jet(v: &VerblunskyData, h: &Hamiltonian) -> Result<Jet1> {
    match h {
        Hamiltonian::NormInvR { n } => norm_inv_jet(v, *n),
        Hamiltonian::DiscriminantRe { n, z } => Ok(discriminant_jet(v, *n, *z)?.re()),
        Hamiltonian::DiscriminantIm { n, z } => Ok(discriminant_jet(v, *n, *z)?.im()),
    }
}

/// dalpha_k/dt = {H, alpha_k} for every k; the terminal coefficient gets an
/// exactly zero derivative (it is outside the bracket sum).
pub fn vector_field_from_jet(v: &VerblunskyData, h_jet: &Jet1) -> Result<Vec<Complex64>> {
    let ctx = BracketContext::new(v);
    let (alpha, _) = seed_point(v);
    alpha.iter().map(|a| bracket(h_jet, a, &ctx)).collect()
}

pub fn vector_field(v: &VerblunskyData, h: &Hamiltonian) -> Result<Vec<Complex64>> {
    let h_jet = hamiltonian_jet(v, h)?;
    vector_field_from_jet(v, &h_jet)
}

/// Conditioning guard: abort when a non-terminal coefficient climbs past
/// |alpha| = 1 - 1e-6 (rho -> 0 degrades everything downstream).
pub const DISC_GUARD: f64 = 1e-6;

fn guarded_state(
    coeffs: Vec<Complex64>,
    terminal: bool,
    step: usize,
) -> Result<VerblunskyData> {
    let n = coeffs.len();
    for (k, a) in coeffs.iter().enumerate() {
        let is_terminal = terminal && k + 1 == n;
        if !is_terminal && a.norm() > 1.0 - DISC_GUARD {
            return Err(Error::DiscExit { step, index: k });
        }
    }
    VerblunskyData::new(coeffs, terminal).map_err(|_| Error::DiscExit { step, index: 0 })
}

/// Classical fourth-order Runge-Kutta trajectory, initial state included.
/// Deterministic; errors with the offending step if the disc guard trips.
pub fn rk4_flow(
    v0: &VerblunskyData,
    h: &Hamiltonian,
    dt: f64,
    steps: usize,
) -> Result<Vec<VerblunskyData>> {
    let terminal = v0.terminal_unimodular();
    let mut out = Vec::with_capacity(steps + 1);
    let mut state = guarded_state(v0.coeffs().to_vec(), terminal, 0)?;
    out.push(state.clone());
    for step in 0..steps {
        let advance = |base: &[Complex64], k: &[Complex64], f: f64| -> Vec<Complex64> {
            base.iter().zip(k.iter()).map(|(a, d)| a + d * f).collect()
        };
        let y0 = state.coeffs().to_vec();
        let k1 = vector_field(&state, h)?;
        let s2 = guarded_state(advance(&y0, &k1, dt / 2.0), terminal, step)?;
        let k2 = vector_field(&s2, h)?;
        let s3 = guarded_state(advance(&y0, &k2, dt / 2.0), terminal, step)?;
        let k3 = vector_field(&s3, h)?;
        let s4 = guarded_state(advance(&y0, &k3, dt), terminal, step)?;
        let k4 = vector_field(&s4, h)?;
        let next: Vec<Complex64> = (0..y0.len())
            .map(|j| y0[j] + (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (dt / 6.0))
            .collect();
        state = guarded_state(next, terminal, step + 1)?;
        out.push(state.clone());
    }
    Ok(out)
}

/// The two candidate rotation rates for the R_n flow; the printed exponent
/// reads 1/(2 R_n), the bracket computation gives R_n/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationRate {
    HalfR,
    HalfInvR,
}

pub fn rotation_rate_value(v: &VerblunskyData, n: usize, rate: RotationRate) -> Result<f64> {
    let r = norm_inv_jet(v, n)?.value.re;
    Ok(match rate {
        RotationRate::HalfR => r / 2.0,
        RotationRate::HalfInvR => 1.0 / (2.0 * r),
    })
}

/// Exact solution of the R_n flow: alpha_j(t) = alpha_j e^{i theta t} for
/// j < n, the rest fixed. Moduli (hence R_n itself) are conserved, so the
/// rate is a constant of the motion.
pub fn rotation_flow_exact(
    v: &VerblunskyData,
    n: usize,
    t: f64,
    rate: RotationRate,
) -> Result<VerblunskyData> {
    let theta = rotation_rate_value(v, n, rate)?;
    let phase = Complex64::from_polar(1.0, theta * t);
    let coeffs = v
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, a)| if j < n { a * phase } else { *a })
        .collect();
    VerblunskyData::new(coeffs, v.terminal_unimodular())
}

/// Decide the rotation rate by comparing the bracket vector field of R_n
/// against d/dt of each candidate exact solution at t = 0.
pub fn adjudicate_rotation_rate(v: &VerblunskyData, n: usize) -> Result<Adjudication> {
    let field = vector_field(v, &Hamiltonian::NormInvR { n })?;
    let dev = |rate: RotationRate| -> Result<f64> {
        let theta = rotation_rate_value(v, n, rate)?;
        let mut worst = 0.0f64;
        for j in 0..n {
            let expect = Complex64::new(0.0, theta) * v.alpha(j);
            let d = (field[j] - expect).norm() / expect.norm().max(1.0);
            worst = worst.max(d);
        }
        Ok(worst)
    };
    let printed_passes = dev(RotationRate::HalfInvR)? < 1e-10;
    let corrected_passes = dev(RotationRate::HalfR)? < 1e-10;
    let selected = match (printed_passes, corrected_passes) {
        (true, false) => "alpha_j exp(i t / (2 R_n))",
        (false, true) => "alpha_j exp(i R_n t / 2)",
        (true, true) => "both",
        (false, false) => "neither",
    };
    Ok(Adjudication {
        topic: "rotation-flow rate for the R_n Hamiltonian".to_string(),
        printed_form: "alpha_j exp(i t / (2 R_n))".to_string(),
        corrected_form: "alpha_j exp(i R_n t / 2)".to_string(),
        printed_passes,
        corrected_passes,
        selected: selected.to_string(),
    })
}

/// Scaled residual of {D_n(z), D_n(w)} with D_n(z) = B_n(z) + z B_n*(z):
/// the involutivity at the heart of Ablowitz-Ladik integrability.
pub fn involutivity_residual(
    v: &VerblunskyData,
    n: usize,
    z: Complex64,
    w: Complex64,
) -> Result<f64> {
    let dz = discriminant_jet(v, n, z)?;
    let dw = discriminant_jet(v, n, w)?;
    let ctx = BracketContext::new(v);
    let b = bracket(&dz, &dw, &ctx)?;
    let scale = (dz.value.norm() * dw.value.norm()).max(1.0);
    Ok(b.norm() / scale)
}
