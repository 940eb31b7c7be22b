use std::path::{Path, PathBuf};
use std::process::Command;

use superint::verify::Verdict;
use superint_cli::report::Report;
use superint_cli::{execute, json, RunConfig};
use tempfile::TempDir;

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(sub: &str, config: &Path, extra: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_superint"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .args(extra)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn verify_three_singletons() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"partition":[1,1,1],"eta":1.0,"alpha":[0.5,0.25]}"#);
    let (code, stdout, stderr) = run("verify", &cfg, &["--samples", "12"]);
    assert_eq!(code, 0, "{stderr}");
    let report: Report = serde_json::from_str(&stdout).unwrap();
    for rel in ["qa1 [Y_1, W_3]", "qa1 [X_3, W_3]", "qa2 [Z_2, C_2]", "qa3 [Y_2, C_2]"] {
        let e = report.suites.iter().find(|s| s.name == rel).unwrap_or_else(|| panic!("{rel} missing"));
        assert_eq!(e.verdict, Verdict::Pass, "{rel}");
        assert!(e.variant.is_some(), "{rel} has no variant tag");
        assert!(!e.forms.is_empty());
    }
    fn named(e: &superint_cli::report::SuiteEntry) -> bool {
        !e.formula.is_empty() && e.forms.iter().all(named)
    }
    assert!(report.suites.iter().all(named), "every entry names its formula");
}

#[test]
fn spectrum_of_hydrogen() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "h.json", r#"{"partition":[3],"eta":1.0,"alpha":[],"spectrum":{"max_denominator":6}}"#);
    let (code, stdout, _) = run("spectrum", &cfg, &[]);
    assert_eq!(code, 0);
    let report: Report = serde_json::from_str(&stdout).unwrap();
    let got: Vec<(f64, u64)> = report.spectrum.iter().map(|l| (l.energy, l.multiplicity)).collect();
    assert_eq!(got, vec![(-0.25, 1), (-1.0 / 16.0, 4), (-1.0 / 36.0, 9)]);
}

#[test]
fn oracle_on_two_singletons() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "o.json", r#"{"partition":[1,1],"eta":2.0,"alpha":[0.75]}"#);
    let (code, stdout, _) = run("oracle", &cfg, &[]);
    assert_eq!(code, 0);
    let report: Report = serde_json::from_str(&stdout).unwrap();
    let ground = &report.oracles[0];
    assert_eq!(ground.quantity, "energy");
    assert!((ground.closed_form + 1.0 / 9.0).abs() < 1e-15);
    assert!((ground.finite_difference - ground.closed_form).abs() < 1e-3);
}

#[test]
fn hydrogen_mode_skips_coupling_suites() {
    let cfg = RunConfig::from_json(r#"{"partition":[3],"eta":1.0,"alpha":[],"verification":{"samples":4,"falsifiability":false}}"#).unwrap();
    let outcome = execute(superint_cli::Command::Verify, &cfg).unwrap();
    assert_eq!(outcome.exit_code, 0);
    let skipped: Vec<&str> = outcome
        .report
        .suites
        .iter()
        .filter(|s| s.verdict == Verdict::Skipped)
        .filter_map(|s| s.forms.first().unwrap_or(s).reason.as_deref())
        .collect();
    for code in ["hydrogen_mode_no_couplings", "requires_two_blocks", "requires_three_blocks"] {
        assert!(skipped.iter().any(|r| r.starts_with(code)), "{code} not in {skipped:?}");
    }
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", r#"{"partition":[2,3,1],"eta":1.0,"alpha":[0.5]}"#);
    let (code, _, stderr) = run("verify", &cfg, &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("`alpha`"), "{stderr}");
    let (code, _, stderr) = run("verify", &dir.path().join("missing.json"), &[]);
    assert_eq!(code, 2, "{stderr}");
    let cfg = write_config(&dir, "ok.json", r#"{"partition":[2],"eta":1.0}"#);
    let (code, _, stderr) = run("wavefunction", &cfg, &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("`wavefunction`"), "{stderr}");
    let (code, _, stderr) = run("verify", &cfg, &["--tolerance=-1"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("verification.tolerance"), "{stderr}");
}

#[test]
fn failures_exit_one_with_term_breakdown_and_still_write() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "f.json",
        r#"{"partition":[2,1],"eta":1.0,"alpha":[0.6],"verification":{"falsifiability":false}}"#,
    );
    let out = dir.path().join("report.json");
    let (code, stdout, _) = run("verify", &cfg, &["--samples", "6", "--tolerance", "1e-300", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.is_empty());
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.summary.failed > 0);
    let failing = report.suites.iter().find(|s| s.suite == "conservation" && s.verdict == Verdict::Fail).unwrap();
    assert!(!failing.terms.is_empty());
}

#[test]
fn wavefunction_values() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "w.json",
        r#"{"partition":[3],"eta":1.0,"wavefunction":{"points":[[0.0,0.0,2.0],[0.0,0.0,0.0]]}}"#,
    );
    let (code, stdout, _) = run("wavefunction", &cfg, &[]);
    assert_eq!(code, 0);
    let report: Report = serde_json::from_str(&stdout).unwrap();
    let ratio = report.wavefunction[0].value.unwrap() / (-1.0f64).exp();
    assert!(ratio.is_finite() && ratio > 0.0);
    assert!(report.wavefunction[1].value.is_none());
    assert!(report.wavefunction[1].error.as_deref().unwrap().contains("singular"));
}

#[test]
fn report_is_byte_stable_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "r.json",
        r#"{"partition":[2,1,1],"eta":0.7,"alpha":[0.3,1.1],"verification":{"samples":6,"seed":99}}"#,
    );
    let (a_code, a, _) = run("report", &cfg, &[]);
    let (_, b, _) = run("report", &cfg, &[]);
    assert_eq!(a_code, 0);
    assert_eq!(a, b);
    let parsed: Report = serde_json::from_str(&a).unwrap();
    assert_eq!(json::to_string(&parsed).unwrap(), a);
    let (_, c, _) = run("report", &cfg, &["--seed", "100"]);
    assert_ne!(a, c);
}
