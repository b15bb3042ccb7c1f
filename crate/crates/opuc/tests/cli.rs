//! End-to-end tests of the `opuc` binary: exit-code contract, output
//! determinism, and the coefficient-file formats.

use std::process::{Command, Output};

fn opuc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opuc"))
        .args(args)
        .env_remove("OPUC_SEED")
        .output()
        .expect("spawn opuc")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn family_text_basic() {
    let out = opuc(&["family", "--alpha", "0.5"]);
    assert!(out.status.success());
    let s = stdout(&out);
    // Phi_1 = z - 0.5
    assert!(s.contains("n=1 Phi=[-0.5 1]"), "{s}");
    assert!(s.contains("wall n=0"), "{s}");
}

#[test]
fn family_json_parses_and_csv_is_usage_error() {
    let out = opuc(&["family", "--alpha", "0.3,0.1", "--alpha=-0.2,0.4", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["levels"].as_array().unwrap().len(), 3);

    let out = opuc(&["family", "--alpha", "0.5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_json_is_deterministic_and_exits_zero() {
    let args = [
        "verify", "--trials", "2", "--n-max", "4", "--seed", "9", "--format", "json",
    ];
    let a = opuc(&args);
    let b = opuc(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["passed"], true);
    assert!(v["adjudications"].as_array().unwrap().len() >= 5);
}

#[test]
fn verify_env_seed_fallback() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_opuc"))
        .args(["verify", "--trials", "1", "--n-max", "3", "--format", "json"])
        .env("OPUC_SEED", "5")
        .output()
        .unwrap();
    let with_flag = opuc(&[
        "verify", "--trials", "1", "--n-max", "3", "--seed", "5", "--format", "json",
    ]);
    assert!(with_env.status.success());
    assert_eq!(with_env.stdout, with_flag.stdout);
}

#[test]
fn verify_impossible_tolerance_fails_with_exit_one() {
    let out = opuc(&[
        "verify",
        "--trials",
        "1",
        "--n-max",
        "4",
        "--tol",
        "thm.PhiPhiStar=1e-30",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let s = stdout(&out);
    assert!(s.lines().any(|l| l.starts_with("thm.PhiPhiStar") && l.ends_with("fail")), "{s}");
}

#[test]
fn verify_csv_has_contract_header() {
    let out = opuc(&["verify", "--trials", "1", "--n-max", "3", "--format", "csv"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("id,n,trial,z_re,z_im,w_re,w_im,residual,tol,verdict"));
}

#[test]
fn bracket_known_identity() {
    let out = opuc(&[
        "bracket",
        "thm.PhiPhiStar",
        "--alpha",
        "0.3,0.1",
        "--alpha=-0.2,0.25",
        "--alpha",
        "0.1,0.4",
        "--z",
        "0.7,0.4",
        "--w",
        "0.2,-0.9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = stdout(&out);
    assert!(s.contains("id=thm.PhiPhiStar"), "{s}");
    assert!(s.contains("residual="), "{s}");
}

#[test]
fn bracket_q_suffix_resolution() {
    let out = opuc(&[
        "bracket",
        "prop27.gamma",
        "--alpha",
        "0.3,0.1",
        "--alpha",
        "0.2,0.2",
        "--alpha",
        "0.1,0.0",
        "--z",
        "0.7,0.4",
        "--w",
        "0.2,-0.9",
        "--q",
        "2",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["id"], "prop27.gamma.q2");
}

#[test]
fn bracket_unknown_identity_is_usage_error() {
    let out = opuc(&["bracket", "thm.NoSuchThing", "--alpha", "0.5", "--z", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_file_is_usage_error() {
    let dir = std::env::temp_dir().join("opuc-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"coeffs\": \"nope\"}").unwrap();
    let out = opuc(&["family", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // --alpha and --input are mutually exclusive
    let good = dir.join("good.json");
    std::fs::write(&good, "[[0.5, 0.0]]").unwrap();
    let out = opuc(&[
        "family",
        "--alpha",
        "0.5",
        "--input",
        good.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_file_object_with_terminal_coefficient() {
    let dir = std::env::temp_dir().join("opuc-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("terminal.json");
    std::fs::write(
        &path,
        "{\"coeffs\": [[0.3, 0.1], [1.0, 0.0]], \"terminal_unimodular\": true}",
    )
    .unwrap();
    let out = opuc(&["family", "--input", path.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flow_zero_steps_echoes_initial_state() {
    let out = opuc(&[
        "flow",
        "--alpha",
        "0.3,0.1",
        "--alpha",
        "0.2,0.0",
        "--hamiltonian",
        "norm-inv",
        "--steps",
        "0",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = stdout(&out);
    let mut lines = s.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("step,t,alpha0_re,alpha0_im"), "{header}");
    assert!(header.contains("casimir_abs"), "{header}");
    let row = lines.next().unwrap();
    assert!(row.starts_with("0,0,0.3,0.1,0.2,0"), "{row}");
    assert!(lines.next().is_none());
}

#[test]
fn flow_rotation_preserves_moduli() {
    let out = opuc(&[
        "flow",
        "--alpha",
        "0.5,0.0",
        "--alpha",
        "0.1,0.2",
        "--hamiltonian",
        "norm-inv",
        "--n-max",
        "1",
        "--dt",
        "0.05",
        "--steps",
        "20",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 21);
    for row in rows {
        let re = row["alpha0_re"].as_f64().unwrap();
        let im = row["alpha0_im"].as_f64().unwrap();
        assert!((re.hypot(im) - 0.5).abs() < 1e-10);
        // alpha_1 is beyond the flow level and must not move
        assert_eq!(row["alpha1_re"].as_f64().unwrap(), 0.1);
        assert_eq!(row["alpha1_im"].as_f64().unwrap(), 0.2);
    }
}

#[test]
fn coefficient_outside_disc_is_usage_error() {
    let out = opuc(&["family", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}
