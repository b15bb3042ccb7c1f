//! Command-line harness: family construction, single-identity bracket
//! evaluation, the full verification suite, and Hamiltonian flow runs.
//!
//! Exit codes: 0 = all pass, 1 = verification failure, 2 = usage/I-O error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use opuc::flows::{discriminant_value, rk4_flow, Hamiltonian};
use opuc::identities::{catalogue, evaluate, level_range, IdentityKind, SuiteConfig, Workspace};
use opuc::opuc_core::{monic_families, VerblunskyData};
use opuc::report::run_full;
use opuc::{Error, Result};

#[derive(Parser)]
#[command(name = "opuc", about = "OPUC families, Ablowitz-Ladik brackets, identity verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the polynomial families built from the given coefficients.
    Family {
        #[command(flatten)]
        coeffs: CoeffArgs,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate one catalogued bracket identity at (z, w).
    Bracket {
        /// Identity id, e.g. thm.PhiPhiStar or prop26.AAstar.
        id: String,
        #[command(flatten)]
        coeffs: CoeffArgs,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, value_parser = parse_complex_arg)]
        z: Complex64,
        #[arg(long, value_parser = parse_complex_arg)]
        w: Option<Complex64>,
        /// q power for the combination identities (appended as .qQ).
        #[arg(long)]
        q: Option<i32>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the full verification suite and write a report.
    Verify {
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, env = "OPUC_SEED", default_value_t = 0)]
        seed: u64,
        /// Tolerance override, ID=VALUE (repeatable).
        #[arg(long = "tol", value_name = "ID=VAL")]
        tol: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Integrate a Hamiltonian flow and dump the trajectory.
    Flow {
        #[command(flatten)]
        coeffs: CoeffArgs,
        /// Hamiltonian name: norm-inv, disc-re, disc-im.
        #[arg(long)]
        hamiltonian: String,
        /// Level n of the Hamiltonian (clamped to the coefficient count).
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Evaluation point for the discriminant Hamiltonians.
        #[arg(long, value_parser = parse_complex_arg)]
        z: Option<Complex64>,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CoeffArgs {
    /// Verblunsky coefficient as "re,im" or a bare real (repeatable).
    #[arg(long = "alpha", value_name = "RE,IM")]
    alpha: Vec<String>,
    /// JSON coefficient file: [[re,im],...] or
    /// {"coeffs": [[re,im],...], "terminal_unimodular": true}.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let parse_part = |p: &str, what: &str| -> Result<f64> {
        p.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad {what} part in complex number `{s}`")))
    };
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(
            parse_part(re, "real")?,
            parse_part(im, "imaginary")?,
        )),
        None => Ok(Complex64::new(parse_part(s, "real")?, 0.0)),
    }
}

fn parse_complex_arg(s: &str) -> std::result::Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn load_coeffs(args: &CoeffArgs) -> Result<VerblunskyData> {
    if let Some(path) = &args.input {
        if !args.alpha.is_empty() {
            return Err(Error::Parse(
                "provide coefficients via --alpha or --input, not both".to_string(),
            ));
        }
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("coefficient file: {e}")))?;
        let (pairs, terminal) = match &value {
            serde_json::Value::Array(a) => (a.clone(), false),
            serde_json::Value::Object(o) => {
                let coeffs = o
                    .get("coeffs")
                    .and_then(|c| c.as_array())
                    .ok_or_else(|| Error::Parse("coefficient file: missing `coeffs` array".to_string()))?;
                let terminal = o
                    .get("terminal_unimodular")
                    .map(|t| {
                        t.as_bool().ok_or_else(|| {
                            Error::Parse("coefficient file: `terminal_unimodular` must be a boolean".to_string())
                        })
                    })
                    .transpose()?
                    .unwrap_or(false);
                (coeffs.clone(), terminal)
            }
            _ => {
                return Err(Error::Parse(
                    "coefficient file: expected an array or an object with `coeffs`".to_string(),
                ))
            }
        };
        let mut coeffs = Vec::with_capacity(pairs.len());
        for (k, p) in pairs.iter().enumerate() {
            let pair = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                Error::Parse(format!("coefficient file: entry {k} is not a [re, im] pair"))
            })?;
            let get = |i: usize| {
                pair[i]
                    .as_f64()
                    .ok_or_else(|| Error::Parse(format!("coefficient file: entry {k} has a non-numeric component")))
            };
            coeffs.push(Complex64::new(get(0)?, get(1)?));
        }
        VerblunskyData::new(coeffs, terminal)
    } else {
        let coeffs = args
            .alpha
            .iter()
            .map(|s| parse_complex(s))
            .collect::<Result<Vec<_>>>()?;
        VerblunskyData::in_disc(coeffs)
    }
}

fn fmt_c(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{},{}", c.re, c.im)
    }
}

fn fmt_poly(p: &opuc::poly::CPoly) -> String {
    let inner: Vec<String> = p.coeffs().iter().map(|c| fmt_c(*c)).collect();
    format!("[{}]", inner.join(" "))
}

fn json_poly(p: &opuc::poly::CPoly) -> serde_json::Value {
    serde_json::Value::Array(
        p.coeffs()
            .iter()
            .map(|c| serde_json::json!([c.re, c.im]))
            .collect(),
    )
}

fn emit(output: &Option<PathBuf>, s: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, s)?,
        None => print!("{s}"),
    }
    Ok(())
}

fn cmd_family(
    coeffs: &CoeffArgs,
    n_max: usize,
    format: Format,
    output: &Option<PathBuf>,
) -> Result<ExitCode> {
    let v = load_coeffs(coeffs)?;
    let n_max = n_max.min(v.len());
    let fam = monic_families(&v, n_max)?;
    let out = match format {
        Format::Text => {
            let mut s = String::new();
            for n in 0..=n_max {
                s.push_str(&format!(
                    "n={n} Phi={} Phi*={} Psi={} Psi*={} norm={}\n",
                    fmt_poly(&fam.phi[n].0),
                    fmt_poly(&fam.phi[n].1),
                    fmt_poly(&fam.psi[n].0),
                    fmt_poly(&fam.psi[n].1),
                    fam.norms[n]
                ));
            }
            for (n, q) in fam.wall.iter().enumerate() {
                s.push_str(&format!(
                    "wall n={n} A={} B={} A*={} B*={}\n",
                    fmt_poly(&q.a),
                    fmt_poly(&q.b),
                    fmt_poly(&q.a_star),
                    fmt_poly(&q.b_star)
                ));
            }
            s
        }
        Format::Json => {
            let levels: Vec<serde_json::Value> = (0..=n_max)
                .map(|n| {
                    serde_json::json!({
                        "n": n,
                        "phi": json_poly(&fam.phi[n].0),
                        "phi_star": json_poly(&fam.phi[n].1),
                        "psi": json_poly(&fam.psi[n].0),
                        "psi_star": json_poly(&fam.psi[n].1),
                        "norm": fam.norms[n],
                    })
                })
                .collect();
            let wall: Vec<serde_json::Value> = fam
                .wall
                .iter()
                .enumerate()
                .map(|(n, q)| {
                    serde_json::json!({
                        "n": n,
                        "a": json_poly(&q.a),
                        "b": json_poly(&q.b),
                        "a_star": json_poly(&q.a_star),
                        "b_star": json_poly(&q.b_star),
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "levels": levels,
                "wall": wall,
            }))
            .expect("family serialization");
            s.push('\n');
            s
        }
        Format::Csv => {
            return Err(Error::Parse(
                "csv format is not defined for `family`; use text or json".to_string(),
            ))
        }
    };
    emit(output, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn is_wall_identity(kind: &IdentityKind) -> bool {
    use IdentityKind::*;
    matches!(
        kind,
        P26AA
            | P26BB
            | P26AAStar
            | P26BBStar
            | P26AB
            | P26ABStar
            | P27AlphaBeta
            | P27Gamma(_)
            | P27GammaClosed(_)
            | P27R(_)
            | P27S(_)
            | P27X(_)
    )
}

fn cmd_bracket(
    id: &str,
    coeffs: &CoeffArgs,
    n_max: usize,
    z: Complex64,
    w: Option<Complex64>,
    q: Option<i32>,
    format: Format,
    output: &Option<PathBuf>,
) -> Result<ExitCode> {
    let full_id = match q {
        Some(q) if !id.contains(".q") => format!("{id}.q{q}"),
        _ => id.to_string(),
    };
    let rec = catalogue()
        .into_iter()
        .find(|r| r.id == full_id)
        .ok_or_else(|| Error::UnknownIdentity(full_id.clone()))?;

    let v = load_coeffs(coeffs)?;
    let depth = n_max.min(v.len());
    let ws = Workspace::new(v, depth)?;
    let (lo, hi) = level_range(&rec.kind, depth);
    let n = depth.clamp(lo, hi);
    if is_wall_identity(&rec.kind) && n >= ws.fam.wall.len() {
        return Err(Error::LevelOutOfRange {
            n_max: n,
            n_alpha: ws.fam.wall.len(),
        });
    }
    let w = w.unwrap_or(z);
    let e = evaluate(&ws, &rec.kind, n, z, w)?;
    let out = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "id": full_id,
                "n": n,
                "z": [z.re, z.im],
                "w": [w.re, w.im],
                "lhs": [e.lhs.re, e.lhs.im],
                "rhs": [e.rhs.re, e.rhs.im],
                "residual": e.residual,
                "scale": e.scale,
            }))
            .expect("bracket serialization");
            s.push('\n');
            s
        }
        _ => format!(
            "id={full_id} n={n} z={} w={}\nlhs={}\nrhs={}\nresidual={:e} scale={}\n",
            fmt_c(z),
            fmt_c(w),
            fmt_c(e.lhs),
            fmt_c(e.rhs),
            e.residual,
            e.scale
        ),
    };
    emit(output, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_tol_overrides(tol: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for entry in tol {
        let (id, val) = entry
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("--tol expects ID=VALUE, got `{entry}`")))?;
        let val: f64 = val
            .parse()
            .map_err(|_| Error::Parse(format!("--tol value `{val}` is not a number")))?;
        map.insert(id.to_string(), val);
    }
    Ok(map)
}

fn cmd_verify(
    n_max: usize,
    trials: usize,
    seed: u64,
    tol: &[String],
    format: Format,
    output: &Option<PathBuf>,
) -> Result<ExitCode> {
    let cfg = SuiteConfig {
        n_max,
        trials,
        seed,
        tol_overrides: parse_tol_overrides(tol)?,
        terminal_subsuite: true,
    };
    let report = run_full(&cfg)?;
    let out = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    };
    emit(output, &out)?;
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_flow(
    coeffs: &CoeffArgs,
    name: &str,
    n_max: usize,
    z: Option<Complex64>,
    dt: f64,
    steps: usize,
    format: Format,
    output: &Option<PathBuf>,
) -> Result<ExitCode> {
    let v = load_coeffs(coeffs)?;
    if v.is_empty() {
        return Err(Error::Parse("flow requires at least one coefficient".to_string()));
    }
    let level = match name {
        "disc-re" | "disc-im" => n_max.min(v.len() - 1),
        _ => n_max.min(v.len()),
    };
    let h = Hamiltonian::parse(name, level, z)?;
    let traj = rk4_flow(&v, &h, dt, steps)?;

    let n_alpha = v.len();
    let r_level = match h {
        Hamiltonian::NormInvR { n } => n,
        _ => level.min(n_alpha),
    };
    let row_values = |state: &VerblunskyData, step: usize| -> Result<Vec<(String, String)>> {
        let mut cols: Vec<(String, String)> = vec![
            ("step".to_string(), step.to_string()),
            ("t".to_string(), format!("{}", step as f64 * dt)),
        ];
        for k in 0..n_alpha {
            cols.push((format!("alpha{k}_re"), format!("{}", state.alpha(k).re)));
            cols.push((format!("alpha{k}_im"), format!("{}", state.alpha(k).im)));
        }
        let r: f64 = (0..r_level).map(|j| 1.0 / state.rho(j)).product();
        cols.push(("r_n".to_string(), format!("{r}")));
        cols.push((
            "casimir_abs".to_string(),
            format!("{}", state.alpha(n_alpha - 1).norm()),
        ));
        if let Some(z0) = z {
            if level < n_alpha {
                let d = discriminant_value(state, level, z0)?;
                cols.push(("disc_re".to_string(), format!("{}", d.re)));
                cols.push(("disc_im".to_string(), format!("{}", d.im)));
            }
        }
        Ok(cols)
    };

    let mut rows = Vec::with_capacity(traj.len());
    for (step, state) in traj.iter().enumerate() {
        rows.push(row_values(state, step)?);
    }
    let out = match format {
        Format::Csv => {
            let mut s = rows[0]
                .iter()
                .map(|(k, _)| k.clone())
                .collect::<Vec<_>>()
                .join(",");
            s.push('\n');
            for row in &rows {
                s.push_str(&row.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let arr: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (k, v) in row {
                        let num: f64 = v.parse().unwrap_or(f64::NAN);
                        obj.insert(k.clone(), serde_json::json!(num));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::Value::Array(arr))
                .expect("trajectory serialization");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            for row in &rows {
                let line: Vec<String> = row.iter().map(|(k, v)| format!("{k}={v}")).collect();
                s.push_str(&line.join(" "));
                s.push('\n');
            }
            s
        }
    };
    emit(output, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Family {
            coeffs,
            n_max,
            format,
            output,
        } => cmd_family(coeffs, *n_max, *format, output),
        Cmd::Bracket {
            id,
            coeffs,
            n_max,
            z,
            w,
            q,
            format,
            output,
        } => cmd_bracket(id, coeffs, *n_max, *z, *w, *q, *format, output),
        Cmd::Verify {
            n_max,
            trials,
            seed,
            tol,
            format,
            output,
        } => cmd_verify(*n_max, *trials, *seed, tol, *format, output),
        Cmd::Flow {
            coeffs,
            hamiltonian,
            n_max,
            z,
            dt,
            steps,
            format,
            output,
        } => cmd_flow(coeffs, hamiltonian, *n_max, *z, *dt, *steps, *format, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
