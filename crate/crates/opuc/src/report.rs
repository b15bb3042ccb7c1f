//! Verification report: residual rows, typo adjudications, and the
//! serializers (json / csv / text). Output is byte-deterministic for a fixed
//! seed; no timestamps.

use std::fmt;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::flows::{adjudicate_rotation_rate, involutivity_residual};
use crate::identities::{
    random_pair, run_suite, Evaluation, SuiteConfig,
};
use crate::opuc_core::{monic_families, pinter_nevai, rotated_family};
use crate::poisson::{
    antisymmetry_residual, jacobi_residual, leibniz_residual, BracketContext, FamilyMember,
    Observable,
};
use crate::wirtinger::jet_families;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Counted identity within tolerance.
    Pass,
    /// Counted identity out of tolerance.
    Fail,
    /// Informational (adjudication candidate) within tolerance.
    Agrees,
    /// Informational candidate out of tolerance.
    Disagrees,
    /// Evaluation error; counts as a failure.
    Error,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Agrees => "agrees",
            Verdict::Disagrees => "disagrees",
            Verdict::Error => "error",
        };
        f.write_str(s)
    }
}

/// One residual measurement. CSV column order is fixed:
/// id, n, trial, z_re, z_im, w_re, w_im, residual, tol, verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualRow {
    pub id: String,
    pub n: usize,
    pub trial: usize,
    pub z_re: f64,
    pub z_im: f64,
    pub w_re: f64,
    pub w_im: f64,
    pub residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub counted: bool,
}

impl ResidualRow {
    pub fn new(
        id: &str,
        n: usize,
        trial: usize,
        z: Complex64,
        w: Complex64,
        residual: f64,
        tol: f64,
    ) -> Self {
        let verdict = if residual <= tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        ResidualRow {
            id: id.to_string(),
            n,
            trial,
            z_re: z.re,
            z_im: z.im,
            w_re: w.re,
            w_im: w.im,
            residual,
            tol,
            verdict,
            counted: true,
        }
    }

    pub fn from_eval(
        id: &str,
        n: usize,
        trial: usize,
        z: Complex64,
        w: Complex64,
        eval: &Evaluation,
        tol: f64,
        counted: bool,
    ) -> Self {
        let ok = eval.residual <= tol;
        let verdict = match (counted, ok) {
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Fail,
            (false, true) => Verdict::Agrees,
            (false, false) => Verdict::Disagrees,
        };
        ResidualRow {
            id: id.to_string(),
            n,
            trial,
            z_re: z.re,
            z_im: z.im,
            w_re: w.re,
            w_im: w.im,
            residual: eval.residual,
            tol,
            verdict,
            counted,
        }
    }

    /// Evaluation error; residual recorded as -1 (not evaluated).
    pub fn failure(
        id: &str,
        n: usize,
        trial: usize,
        z: Complex64,
        w: Complex64,
        tol: f64,
        _message: &str,
    ) -> Self {
        ResidualRow {
            id: id.to_string(),
            n,
            trial,
            z_re: z.re,
            z_im: z.im,
            w_re: w.re,
            w_im: w.im,
            residual: -1.0,
            tol,
            verdict: Verdict::Error,
            counted: true,
        }
    }

    pub fn failed(&self) -> bool {
        self.counted && !matches!(self.verdict, Verdict::Pass)
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.id,
            self.n,
            self.trial,
            self.z_re,
            self.z_im,
            self.w_re,
            self.w_im,
            self.residual,
            self.tol,
            self.verdict
        )
    }
}

pub const CSV_HEADER: &str = "id,n,trial,z_re,z_im,w_re,w_im,residual,tol,verdict";

/// Outcome of carrying both variants of an internally inconsistent printed
/// formula through the suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adjudication {
    pub topic: String,
    pub printed_form: String,
    pub corrected_form: String,
    pub printed_passes: bool,
    pub corrected_passes: bool,
    pub selected: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullReport {
    pub seed: u64,
    pub n_max: usize,
    pub trials: usize,
    pub counted_failures: usize,
    pub passed: bool,
    pub adjudications: Vec<Adjudication>,
    pub rows: Vec<ResidualRow>,
}

impl FullReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.csv_line());
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self) -> String {
        use std::collections::BTreeMap;
        let mut agg: BTreeMap<&str, (usize, usize, f64, f64)> = BTreeMap::new();
        for row in &self.rows {
            let e = agg.entry(&row.id).or_insert((0, 0, 0.0, row.tol));
            e.0 += 1;
            if row.failed() || row.verdict == Verdict::Disagrees {
                e.1 += 1;
            }
            e.2 = e.2.max(row.residual);
            e.3 = row.tol;
        }
        let mut s = format!(
            "verification report  seed={} n_max={} trials={}\n\n",
            self.seed, self.n_max, self.trials
        );
        s.push_str(&format!(
            "{:<34} {:>6} {:>6} {:>12} {:>9}\n",
            "id", "runs", "fails", "max_residual", "tol"
        ));
        for (id, (runs, fails, max_res, tol)) in &agg {
            s.push_str(&format!(
                "{id:<34} {runs:>6} {fails:>6} {max_res:>12.3e} {tol:>9.1e}\n"
            ));
        }
        if !self.adjudications.is_empty() {
            s.push_str("\nadjudications:\n");
            for a in &self.adjudications {
                s.push_str(&format!(
                    "  {}: printed `{}` {} | corrected `{}` {} -> selected `{}`\n",
                    a.topic,
                    a.printed_form,
                    if a.printed_passes { "passes" } else { "fails" },
                    a.corrected_form,
                    if a.corrected_passes { "passes" } else { "fails" },
                    a.selected
                ));
            }
        }
        s.push_str(&format!(
            "\n{}: {} rows, {} counted failures\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.rows.len(),
            self.counted_failures
        ));
        s
    }
}

fn random_member(rng: &mut StdRng) -> FamilyMember {
    use rand::Rng;
    use FamilyMember::*;
    match rng.gen_range(0..8) {
        0 => Phi,
        1 => PhiStar,
        2 => Psi,
        3 => PsiStar,
        4 => WallA,
        5 => WallB,
        6 => WallAStar,
        _ => WallBStar,
    }
}

fn axiom_rows(seed: u64, rows: &mut Vec<ResidualRow>) -> Result<()> {
    use rand::Rng;
    let mut rng = StdRng::seed_from_u64(seed.wrapping_add(0x61786d)); // axiom stream
    // antisymmetry and Leibniz share draws: 1000 each
    for trial in 0..1000 {
        let v = crate::identities::draw_coeffs(&mut rng, 4, 0.9)?;
        let ctx = BracketContext::new(&v);
        let fams = jet_families(&v, 3)?;
        let (z, w) = random_pair(&mut rng);
        let u = random_pair(&mut rng).0;
        let f = crate::poisson::eval_observable(
            &fams,
            &Observable {
                member: random_member(&mut rng),
                n: rng.gen_range(0..=3).min(2),
                z,
            },
        );
        let g = crate::poisson::eval_observable(
            &fams,
            &Observable {
                member: random_member(&mut rng),
                n: rng.gen_range(0..=3).min(2),
                z: w,
            },
        );
        let h = crate::poisson::eval_observable(
            &fams,
            &Observable {
                member: random_member(&mut rng),
                n: rng.gen_range(0..=3).min(2),
                z: u,
            },
        );
        let anti = antisymmetry_residual(&f, &g, &ctx)?;
        rows.push(ResidualRow::new("axiom.antisymmetry", 3, trial, z, w, anti, 1e-13));
        let leib = leibniz_residual(&f, &g, &h, &ctx)?;
        rows.push(ResidualRow::new("axiom.leibniz", 3, trial, z, w, leib, 1e-12));
    }
    // Jacobi: 100 draws in jet-over-jet arithmetic
    for trial in 0..100 {
        let v = crate::identities::draw_coeffs(&mut rng, 3, 0.8)?;
        let (z, w) = random_pair(&mut rng);
        let u = random_pair(&mut rng).0;
        // wall quads stop one level short of the monic families
        let level = |m: FamilyMember| match m {
            FamilyMember::WallA
            | FamilyMember::WallB
            | FamilyMember::WallAStar
            | FamilyMember::WallBStar => 1,
            _ => 2,
        };
        let members = [
            random_member(&mut rng),
            random_member(&mut rng),
            random_member(&mut rng),
        ];
        let obs = [
            Observable { member: members[0], n: level(members[0]), z },
            Observable { member: members[1], n: level(members[1]), z: w },
            Observable { member: members[2], n: level(members[2]), z: u },
        ];
        let r = jacobi_residual(&v, [&obs[0], &obs[1], &obs[2]], 2)?;
        rows.push(ResidualRow::new("axiom.jacobi", 2, trial, z, w, r, 1e-9));
    }
    Ok(())
}

fn structural_rows(seed: u64, n_max: usize, trials: usize, rows: &mut Vec<ResidualRow>) -> Result<()> {
    use rand::Rng;
    let mut rng = StdRng::seed_from_u64(seed.wrapping_add(0x737472)); // structural stream
    let n = n_max.max(2);
    for trial in 0..trials {
        let v = crate::identities::draw_coeffs(&mut rng, n, 0.9)?;
        let zero = Complex64::new(0.0, 0.0);

        let pn = pinter_nevai(&v, n)?;
        rows.push(ResidualRow::new("struct.pinter_nevai", n, trial, zero, zero, pn.max_rel(), 1e-12));

        // Wall determinant B B* - A A* = z^m prod_{k<=m} rho_k^2 at a random z
        let fam = monic_families(&v, n)?;
        let m = n - 1;
        let q = &fam.wall[m];
        let z = random_pair(&mut rng).0;
        let prod: f64 = (0..=m).map(|k| v.rho_sq(k)).product();
        let lhs = q.b.eval(z) * q.b_star.eval(z) - q.a.eval(z) * q.a_star.eval(z);
        let rhs = z.powu(m as u32) * prod;
        let det_res = (lhs - rhs).norm() / rhs.norm().max(1.0);
        rows.push(ResidualRow::new("struct.wall_det", m, trial, z, zero, det_res, 1e-12));

        // lambda-mixing: Phi^lambda = (1+conj(lambda))/2 Phi + (1-conj(lambda))/2 Psi
        let lambda = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * rng.gen::<f64>());
        let rot = rotated_family(&v, lambda, n)?;
        let cp = (Complex64::new(1.0, 0.0) + lambda.conj()) * 0.5;
        let cm = (Complex64::new(1.0, 0.0) - lambda.conj()) * 0.5;
        let mixed = fam.phi[n].0.scale_c(cp).add_poly(&fam.psi[n].0.scale_c(cm));
        let mix_res = rot.phi[n].0.max_coeff_dev(&mixed) / rot.phi[n].0.max_mag().max(1.0);
        rows.push(ResidualRow::new("struct.lambda_mixing", n, trial, lambda, zero, mix_res, 1e-13));
    }
    Ok(())
}

fn involutivity_rows(seed: u64, n_max: usize, rows: &mut Vec<ResidualRow>) -> Result<()> {
    use rand::Rng;
    let mut rng = StdRng::seed_from_u64(seed.wrapping_add(0x666c77)); // flow stream
    let top = n_max.max(2);
    for trial in 0..100 {
        // top + 2 coefficients: level `top` needs alpha_top inside the bracket sum
        let v = crate::identities::draw_coeffs(&mut rng, top + 2, 0.9)?;
        let (z, w) = random_pair(&mut rng);
        let n = rng.gen_range(0..=top);
        let r = involutivity_residual(&v, n, z, w)?;
        rows.push(ResidualRow::new("flow.involutivity", n, trial, z, w, r, 1e-10));
    }
    Ok(())
}

/// The complete verification: identity suite, Poisson axioms, structural
/// identities, flow involutivity, plus all recorded adjudications.
pub fn run_full(cfg: &SuiteConfig) -> Result<FullReport> {
    let suite = run_suite(cfg)?;
    let mut rows = suite.rows;
    let mut adjudications = suite.adjudications;

    axiom_rows(cfg.seed, &mut rows)?;
    structural_rows(cfg.seed, cfg.n_max, cfg.trials.min(25), &mut rows)?;
    involutivity_rows(cfg.seed, cfg.n_max.min(6), &mut rows)?;

    // rotation-rate adjudication at a fixed deterministic point
    let mut rng = StdRng::seed_from_u64(cfg.seed.wrapping_add(0x726f74));
    let v = crate::identities::draw_coeffs(&mut rng, 4, 0.8)?;
    adjudications.push(adjudicate_rotation_rate(&v, 3)?);

    let counted_failures = rows.iter().filter(|r| r.failed()).count();
    Ok(FullReport {
        seed: cfg.seed,
        n_max: cfg.n_max,
        trials: cfg.trials,
        counted_failures,
        passed: counted_failures == 0,
        adjudications,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape() {
        let row = ResidualRow::new(
            "thm.PhiPhi",
            3,
            0,
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.0),
            1e-14,
            1e-10,
        );
        assert_eq!(row.verdict, Verdict::Pass);
        let line = row.csv_line();
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
        assert!(line.starts_with("thm.PhiPhi,3,0,1,2,-0.5,0,"));
        assert!(line.ends_with(",pass"));
    }

    #[test]
    fn verdict_thresholds() {
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(ResidualRow::new("x", 0, 0, z, z, 2e-10, 1e-10).verdict, Verdict::Fail);
        assert_eq!(ResidualRow::new("x", 0, 0, z, z, 1e-10, 1e-10).verdict, Verdict::Pass);
        let fail = ResidualRow::failure("x", 0, 0, z, z, 1e-10, "boom");
        assert!(fail.failed());
    }

    #[test]
    fn full_report_small_run() {
        let cfg = SuiteConfig {
            n_max: 3,
            trials: 1,
            seed: 11,
            ..Default::default()
        };
        let report = run_full(&cfg).unwrap();
        assert!(report.passed, "failures: {}", report.counted_failures);
        assert_eq!(report.adjudications.len(), 5);
        // all three output formats render
        let json = report.to_json();
        assert!(json.contains("\"adjudications\""));
        let csv = report.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        let text = report.to_text();
        assert!(text.contains("PASS"));
        // byte determinism
        let report2 = run_full(&cfg).unwrap();
        assert_eq!(report.to_json(), report2.to_json());
        assert_eq!(report.to_csv(), report2.to_csv());
    }
}
