//! End-to-end tests of the `eulab` binary: exit codes, artifact schemas,
//! hash embedding, determinism under thread-count variation.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_eulab")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .args(["--out", out.to_str().unwrap()])
        .env_remove("EULAB_OUT")
        .output()
        .unwrap()
}

const SMALL_PERTURBED: &str = r#"{
  "schema_version": 1,
  "space": "s3",
  "profile": { "kind": "closed-form", "f1": "1 + rho", "f2": "0" },
  "annulus": [0.05, 0.95],
  "resonance": { "p": -2, "q": 5 },
  "eps": 0.001,
  "bump_radius": 0.1,
  "seeds": 3,
  "iters": 12,
  "grid": { "n_theta": 20, "n_rho": 20, "orbit_iters": 1200, "jitter": true },
  "rng_seed": 0
}"#;

const SMALL_INTEGRABLE: &str = r#"{
  "schema_version": 1,
  "space": "s3",
  "profile": { "kind": "closed-form", "f1": "1 + rho", "f2": "0" },
  "annulus": [0.05, 0.95],
  "eps": 0.0,
  "grid": { "n_theta": 16, "n_rho": 16, "orbit_iters": 1200, "jitter": true },
  "rng_seed": 0
}"#;

#[test]
fn rejects_noncoprime_resonance_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.json",
        r#"{
          "schema_version": 1,
          "space": "s3",
          "profile": { "kind": "closed-form", "f1": "1 + rho", "f2": "0" },
          "resonance": { "p": -2, "q": 4 }
        }"#,
    );
    let out = run(&["flow", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let v: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(v["error"]["code"], "config/resonance");
}

#[test]
fn rejects_unknown_fields_and_bad_space() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "unknown.json",
        r#"{ "space": "s3", "profile": {"kind":"closed-form","f1":"1","f2":"0"}, "bogus": 1 }"#,
    );
    let out = run(&["flow", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    let cfg = write_config(
        tmp.path(),
        "badspace.json",
        r#"{ "space": "s4", "profile": {"kind":"closed-form","f1":"1","f2":"0"} }"#,
    );
    let out = run(&["flow", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flow_report_has_certificate_and_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_INTEGRABLE);
    let out = run(&["flow", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("flow.json")).unwrap())
            .unwrap();
    assert_eq!(report["nondegeneracy"]["verdict"], "nondegenerate");
    assert!((report["nondegeneracy"]["twist_min"].as_f64().unwrap() - 8.0).abs() < 1e-9);
    assert!(report["config_hash"].as_str().unwrap().len() == 64);
    assert!(report["bernoulli_identity_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn resonance_locates_one_third() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_PERTURBED);
    let out = run(&["resonance", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("resonance.json")).unwrap())
            .unwrap();
    let roots = report["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn table_commands_emit_fixed_csv_schemas() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_INTEGRABLE);
    let out = run(&["poincare", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("poincare.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(
        lines.next().unwrap(),
        "seed_id,iter,theta1_unreduced,rho,transit_time"
    );
    assert!(lines.next().unwrap().starts_with("0,0,"));

    let out = run(&["rotnum", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("rotnum.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "rho,rotation_number,confidence");
}

#[test]
fn kappa_deterministic_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_INTEGRABLE);
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let run1 = Command::new(bin())
        .args(["kappa", "--config", cfg.to_str().unwrap(), "--threads", "1"])
        .args(["--out", out_a.to_str().unwrap()])
        .env_remove("EULAB_OUT")
        .output()
        .unwrap();
    assert_eq!(run1.status.code(), Some(0), "{}", String::from_utf8_lossy(&run1.stderr));
    let run2 = Command::new(bin())
        .args(["kappa", "--config", cfg.to_str().unwrap(), "--threads", "2"])
        .args(["--out", out_b.to_str().unwrap()])
        .env_remove("EULAB_OUT")
        .output()
        .unwrap();
    assert_eq!(run2.status.code(), Some(0));
    let a = std::fs::read(out_a.join("kappa.json")).unwrap();
    let b = std::fs::read(out_b.join("kappa.json")).unwrap();
    assert_eq!(a, b, "kappa artifacts must be byte-identical across thread counts");
    // and the integrable run classifies the (covered) annulus as unknotted
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["classes"][0]["tag"], "unknot");
    let frac = v["classes"][0]["fraction"].as_f64().unwrap();
    assert!((frac - 0.9).abs() < 0.03, "fraction {frac}");
}

#[test]
fn eulab_out_env_overrides_out_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_INTEGRABLE);
    let env_dir = tmp.path().join("from-env");
    let out = Command::new(bin())
        .args(["flow", "--config", cfg.to_str().unwrap()])
        .args(["--out", tmp.path().join("ignored").to_str().unwrap()])
        .env("EULAB_OUT", env_dir.to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join("flow.json").is_file());
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn verify_rejects_mismatched_artifact_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_INTEGRABLE);
    let out_dir = tmp.path().join("out");
    let out = run(&["flow", "--config", cfg.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(0));
    // artifact from a *different* configuration
    let cfg2 = write_config(tmp.path(), "c2.json", SMALL_PERTURBED);
    let out = run(&["resonance", "--config", cfg2.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--config", cfg.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let v: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(v["error"]["code"], "verify/hash-mismatch");
}

#[test]
fn nonmixing_pipeline_small() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_PERTURBED);
    let out = run(&["nonmixing", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("nonmixing.json")).unwrap(),
    )
    .unwrap();
    assert!((report["resonance"]["c"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-10);
    let verdict = report["elliptic"]["verdict"].as_str().unwrap();
    assert!(verdict.starts_with("elliptic"), "verdict {verdict}");
    assert!(report["lambda"].as_f64().unwrap() > 0.0);
    assert_eq!(report["kappa0_bound"]["holds"], true);
    assert_eq!(report["stability"]["verdict"], "kam-stable-evidence");
    assert!(report["suspension"]["sup_residual"].as_f64().unwrap() < 5e-6);
}
