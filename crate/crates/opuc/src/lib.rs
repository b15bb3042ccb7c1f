//! Orthogonal polynomials on the unit circle (OPUC) built from Verblunsky
//! coefficients, the Ablowitz-Ladik Poisson bracket evaluated by exact
//! forward-mode Wirtinger differentiation, and a catalogue of closed-form
//! bracket identities checked as numerical residuals.

pub mod flows;
pub mod identities;
pub mod opuc_core;
pub mod poisson;
pub mod poly;
pub mod report;
pub mod wirtinger;

#[cfg(test)]
pub(crate) mod testutil;

use thiserror::Error;

/// Tolerance for unimodularity checks (|lambda| = 1, terminal coefficients).
pub const EPS_UNIT: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient {index} has |alpha| = {modulus}, must be < 1")]
    CoefficientOutOfDisc { index: usize, modulus: f64 },
    #[error("terminal coefficient has |alpha| = {modulus}, expected unimodular")]
    TerminalNotUnimodular { modulus: f64 },
    #[error("declared degree {declared} is below actual degree {actual}")]
    DegreeTooSmall { declared: usize, actual: usize },
    #[error("jet dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("rho[{index}] = 0: normalization undefined")]
    NormalizationUndefined { index: usize },
    #[error("lambda is not unimodular: |lambda| = {modulus}")]
    NonUnimodular { modulus: f64 },
    #[error("n_max {n_max} exceeds coefficient count {n_alpha}")]
    LevelOutOfRange { n_max: usize, n_alpha: usize },
    #[error("division by z: constant term magnitude {found} exceeds {limit}")]
    StructuralDivision { found: f64, limit: f64 },
    #[error("trajectory left the disc at step {step} (coefficient {index})")]
    DiscExit { step: usize, index: usize },
    #[error("z = w not admissible for identity {id}; use the diagonal form")]
    DiagonalNotAdmissible { id: String },
    #[error("unknown identity id {0}")]
    UnknownIdentity(String),
    #[error("unknown hamiltonian {0}")]
    UnknownHamiltonian(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
