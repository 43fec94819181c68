//! End-to-end tests against the compiled binary: flag surface, exit codes,
//! machine-parseable errors, file outputs, and rerun determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dplab(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dplab"));
    c.args(args);
    c
}

fn run(args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } = dplab(args).output().expect("spawn dplab");
    (
        status.code().expect("exit code"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

/// First line starting with `<key> = ` has its first token after the `=`
/// parsed as f64.
fn field(stdout: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    let line = stdout
        .lines()
        .find_map(|l| l.trim_start().strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{prefix}` line in:\n{stdout}"));
    line.split_whitespace().next().unwrap().parse().unwrap()
}

const SIGMA_REF: f64 = 10.14908992943615728;

#[test]
fn calibrate_reports_reference_noise_scale() {
    let (code, out, _) = run(&["calibrate", "--eps", "1", "--delta", "0.05", "--s", "4"]);
    assert_eq!(code, 0);
    assert!((field(&out, "sigma_z") - SIGMA_REF).abs() < 1e-9);
    assert!((field(&out, "sigma_z^2") - SIGMA_REF * SIGMA_REF).abs() < 1e-6);
    assert!(out.contains("mode = definition3"));
}

#[test]
fn calibrate_alternate_mode_squares_the_log() {
    let (code, out, _) = run(&[
        "calibrate",
        "--eps",
        "1",
        "--delta",
        "0.05",
        "--s",
        "4",
        "--calibration-mode",
        "theorem1",
    ]);
    assert_eq!(code, 0);
    // 4 * ln 25
    assert!((field(&out, "sigma_z") - 12.875503299472802996).abs() < 1e-9);
    assert!(out.contains("mode = theorem1"));
}

#[test]
fn calibrate_rejects_delta_outside_open_interval() {
    let (code, _, err) = run(&["calibrate", "--eps", "1", "--delta", "1.3", "--s", "4"]);
    assert_eq!(code, 2);
    assert!(err.lines().any(|l| l.starts_with("error: delta:")), "{err}");
}

#[test]
fn calibrate_requires_eps() {
    let (code, _, err) = run(&["calibrate", "--delta", "0.05", "--s", "4"]);
    assert_eq!(code, 2);
    assert!(err.lines().any(|l| l.starts_with("error: eps:")), "{err}");
}

#[test]
fn unknown_flag_exits_two() {
    let (code, _, _) = run(&["calibrate", "--bogus", "1"]);
    assert_eq!(code, 2);
}

fn read(p: &Path) -> Vec<u8> {
    fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn roc_writes_curve_files_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("curves");
    let (code, _, _) = run(&[
        "roc",
        "--eps",
        "0.5,1",
        "--dmu",
        "8,4,2",
        "--alpha-grid",
        "0.01:0.01:0.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for name in [
        "roc_eps0.5_dmu8.csv",
        "roc_eps0.5_dmu4.csv",
        "roc_eps0.5_dmu2.csv",
        "roc_eps1_dmu8.csv",
        "roc_eps1_dmu4.csv",
        "roc_eps1_dmu2.csv",
    ] {
        let text = String::from_utf8(read(&out.join(name))).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "alpha,beta_bar,delta_mu,sigma_z,epsilon,delta,s"
        );
        assert_eq!(lines.count(), 20);
    }
    let manifest = String::from_utf8(read(&out.join("manifest.json"))).unwrap();
    assert!(manifest.contains("\"sha256\""));
    assert!(manifest.contains("roc_eps1_dmu2.csv"));
}

#[test]
fn roc_reruns_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |dir: &str| {
        vec![
            "roc".to_string(),
            "--eps".into(),
            "1,2".into(),
            "--dmu".into(),
            "8".into(),
            "--alpha-grid".into(),
            "0.05,0.1,0.2".into(),
            "--out".into(),
            dir.to_string(),
        ]
    };
    let d1 = tmp.path().join("a");
    let d2 = tmp.path().join("b");
    for d in [&d1, &d2] {
        let a = args(d.to_str().unwrap());
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(run(&refs).0, 0);
    }
    for name in ["roc_eps1_dmu8.csv", "roc_eps2_dmu8.csv"] {
        assert_eq!(read(&d1.join(name)), read(&d2.join(name)), "{name}");
    }
}

#[test]
fn roc_rejects_zero_impact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let (code, _, err) = run(&["roc", "--dmu", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.lines().any(|l| l.starts_with("error: dmu:")), "{err}");
}

#[test]
fn roc_rejects_unsorted_alpha_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let (code, _, err) = run(&[
        "roc",
        "--alpha-grid",
        "0.2,0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.lines().any(|l| l.starts_with("error: alpha_grid:")), "{err}");
}

#[test]
fn validate_small_run_warns_and_passes() {
    let (code, out, _) = run(&[
        "validate",
        "--eps",
        "1",
        "--dmu",
        "8",
        "--alpha-grid",
        "0.05,0.1",
        "--trials",
        "5000",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("warning: fewer than 10000 trials"));
    assert!(out.contains("overall: PASS (4/4 checks within 3-sigma bands)"));
}

#[test]
fn validate_biased_analytic_power_fails_with_exit_one() {
    let (code, out, _) = run(&[
        "validate",
        "--eps",
        "1",
        "--dmu",
        "8",
        "--alpha-grid",
        "0.05",
        "--trials",
        "20000",
        "--seed",
        "3",
        "--selfcheck-power-bias",
        "0.05",
    ]);
    assert_eq!(code, 1);
    assert!(out.contains("overall: FAIL"));
}

#[test]
fn validate_seed_env_fallback_matches_flag() {
    let args = [
        "validate", "--eps", "1", "--dmu", "8", "--alpha-grid", "0.05", "--trials", "5000",
    ];
    let by_flag = {
        let mut a = args.to_vec();
        a.extend(["--seed", "123"]);
        run(&a)
    };
    let by_env = dplab(&args).env("DPLAB_SEED", "123").output().unwrap();
    assert_eq!(by_flag.0, 0);
    assert!(by_env.status.success());
    assert_eq!(by_flag.1, String::from_utf8(by_env.stdout).unwrap());

    // an explicit flag wins over the environment
    let flag_wins = dplab(&["validate", "--eps", "1", "--dmu", "8", "--alpha-grid", "0.05",
        "--trials", "5000", "--seed", "5"])
        .env("DPLAB_SEED", "123")
        .output()
        .unwrap();
    assert!(String::from_utf8(flag_wins.stdout).unwrap().contains("seed = 5"));

    let bad = dplab(&args).env("DPLAB_SEED", "abc").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8(bad.stderr).unwrap().starts_with("error: seed:"));
}

#[test]
fn bounds_reports_ceiling_and_recovers_sensitivity() {
    let (code, out, _) = run(&["bounds", "--n", "1", "--sum-var", "4", "--s2", "2"]);
    assert_eq!(code, 0);
    assert!((field(&out, "mi_second") - 0.3465735902799726547).abs() < 1e-12);
    let ceiling = field(&out, "attack variance ceiling: sigma2_a");
    assert!((ceiling - 4.0).abs() < 1e-9, "{ceiling}");
    let s_min = field(&out, "sensitivity lower bound at ceiling: s_min");
    assert!((s_min - 2f64.sqrt()).abs() < 1e-9, "{s_min}");
}

#[test]
fn bounds_flags_infeasible_constraint_as_unbounded() {
    let (code, out, _) = run(&["bounds", "--n", "1", "--sum-var", "4", "--s2", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("attack variance ceiling: unbounded (infeasible constraint)"));
}

#[test]
fn bounds_large_population_stays_finite_in_log_domain() {
    let (code, out, _) = run(&["bounds", "--n", "300", "--sum-var", "4", "--s2", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("linear value outside f64 range"), "{out}");
    assert!(!out.contains("inf") && !out.contains("NaN"), "{out}");
    // the recovered sensitivity must survive the huge intermediate terms
    let s_min = field(&out, "sensitivity lower bound at ceiling: s_min");
    assert!((s_min - 2f64.sqrt()).abs() < 1e-9, "{s_min}");
}

#[test]
fn bounds_units_flag_puts_bits_first() {
    let (code, out, _) = run(&[
        "bounds", "--n", "1", "--sum-var", "4", "--s2", "2", "--units", "bits",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("bits (") && out.contains("nats)"), "{out}");
}

#[test]
fn metrics_sweep_satisfies_quarter_identity_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep.csv");
    let args = [
        "metrics",
        "--eps",
        "0.5,1,2,4",
        "--dmu",
        "8,16",
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(run(&args).0, 0);
    let first = read(&out);
    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epsilon,delta,delta_mu,kl,chernoff_half,bound_exp_eps,kl_complies,chernoff_complies"
    );
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let kl: f64 = cols[3].parse().unwrap();
        let ch: f64 = cols[4].parse().unwrap();
        assert!((ch - kl / 4.0).abs() <= 1e-12 * kl.max(1.0), "{line}");
        rows += 1;
    }
    assert_eq!(rows, 8);
    assert!(tmp.path().join("sweep.manifest.json").exists());

    assert_eq!(run(&args).0, 0);
    assert_eq!(first, read(&out), "rerun must be byte-identical");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"eps": 2.0, "delta": 0.05, "s": 4.0}"#).unwrap();

    let (code, out, _) = run(&["calibrate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!((field(&out, "sigma_z") - SIGMA_REF / 2.0).abs() < 1e-9);

    let (code, out, _) = run(&["calibrate", "--config", cfg.to_str().unwrap(), "--eps", "1"]);
    assert_eq!(code, 0);
    assert!((field(&out, "sigma_z") - SIGMA_REF).abs() < 1e-9);
}

#[test]
fn config_rejects_unknown_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"epz": 1}"#).unwrap();
    let (code, _, err) = run(&["calibrate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: config:"), "{err}");
}

#[test]
fn missing_config_file_is_a_runtime_error() {
    let (code, _, err) = run(&["calibrate", "--config", "/nonexistent/cfg.json", "--eps", "1"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: "), "{err}");
}
