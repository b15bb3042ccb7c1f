//! Shared helpers for unit tests.

use num_complex::Complex64;
use rand::Rng;

use crate::opuc_core::VerblunskyData;

pub fn random_v(rng: &mut impl Rng, n: usize, radius: f64) -> VerblunskyData {
    let coeffs = (0..n)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let t = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            Complex64::from_polar(r, t)
        })
        .collect();
    VerblunskyData::in_disc(coeffs).unwrap()
}

/// z drawn half from the unit circle, half from the annulus 0.5 <= |z| <= 2.
pub fn random_point(rng: &mut impl Rng) -> Complex64 {
    let t = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    let r = if rng.gen::<bool>() {
        1.0
    } else {
        0.5 + 1.5 * rng.gen::<f64>()
    };
    Complex64::from_polar(r, t)
}

/// Distinct pair with |z - w| > 1e-3.
pub fn random_pair(rng: &mut impl Rng) -> (Complex64, Complex64) {
    loop {
        let z = random_point(rng);
        let w = random_point(rng);
        if (z - w).norm() > 1e-3 {
            return (z, w);
        }
    }
}
