use std::path::Path;
use std::process::{Command, Output};

use effparam::io::Table;
use serde_json::Value;

const TOY: &str = include_str!("../examples/toy.json");

fn effparam(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_effparam"))
        .args(args)
        .env_remove("EFFPARAM_OUT")
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn toy_analysis_writes_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TOY);
    let out = tmp.path().join("run");
    let o = effparam(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["dataset.csv", "embedding.csv", "verdicts.json", "manifest.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["stages"].as_array().unwrap().len(), 3);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let verdicts: Value = serde_json::from_str(&std::fs::read_to_string(out.join("verdicts.json")).unwrap()).unwrap();
    let dep = verdicts.as_array().unwrap().iter().find(|v| v["kind"] == "dependence").unwrap();
    // ψ₁ of the toy good set is a monotone function of f₁.
    assert!(dep["score"].as_f64().unwrap() > 0.99);
}

#[test]
fn unknown_model_is_rejected_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &TOY.replace("\"toy\"", "\"no-such-model\""));
    let out = tmp.path().join("run");
    let o = effparam(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn missing_config_and_bad_schema_are_validation_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    assert_eq!(effparam(&["generate", "--out", out.to_str().unwrap()], tmp.path()).status.code(), Some(2));
    let cfg = write_config(tmp.path(), &TOY.replace("\"schema_version\": 1", "\"schema_version\": 9"));
    assert_eq!(
        effparam(&["generate", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path()).status.code(),
        Some(2)
    );
    assert!(!out.exists());
}

#[test]
fn same_seed_gives_identical_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TOY);
    let read = |d: &str, seed: &str| {
        let out = tmp.path().join(d);
        let o = effparam(&["generate", "--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap()], tmp.path());
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out.join("dataset.csv")).unwrap()
    };
    let a = read("a", "11");
    assert_eq!(a, read("b", "11"));
    assert_ne!(a, read("c", "12"));
}

#[test]
fn seed_flag_overrides_config_and_changes_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TOY);
    let hash = |d: &str, seed: &str| {
        let out = tmp.path().join(d);
        effparam(&["generate", "--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap()], tmp.path());
        let m = manifest(&out);
        assert_eq!(m["config"]["seed"].as_u64().unwrap().to_string(), seed);
        m["config_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(hash("a", "5"), hash("b", "5"));
    assert_ne!(hash("a", "5"), hash("c", "6"));
}

#[test]
fn output_root_falls_back_to_config_then_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let from_cfg = tmp.path().join("from-config");
    let text = TOY.replacen('{', &format!("{{\n  \"out\": {:?},", from_cfg.to_str().unwrap()), 1);
    let cfg = write_config(tmp.path(), &text);
    assert_eq!(effparam(&["generate", "--config", &cfg], tmp.path()).status.code(), Some(0));
    assert!(from_cfg.join("dataset.csv").is_file());

    let cfg = write_config(tmp.path(), TOY);
    let from_env = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_effparam"))
        .args(["generate", "--config", &cfg])
        .env("EFFPARAM_OUT", &from_env)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(from_env.join("dataset.csv").is_file());
}

#[test]
fn stage_failure_still_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // A good set this tight keeps no samples, so the embedding stage fails.
    let cfg = write_config(tmp.path(), &TOY.replace("\"delta\": 0.3", "\"delta\": 1e-12"));
    let out = tmp.path().join("run");
    let o = effparam(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(out.join("dataset.csv").is_file());
    assert!(!out.join("verdicts.json").exists());
    let m = manifest(&out);
    assert_eq!(m["status"], "failed");
    let stages = m["stages"].as_array().unwrap();
    assert_eq!(stages[0]["ok"], true);
    assert_eq!(stages[1]["name"], "embed");
    assert_eq!(stages[1]["ok"], false);
}

#[test]
fn csv_headers_are_exact_and_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TOY);
    let out = tmp.path().join("run");
    assert_eq!(
        effparam(&["embed", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path()).status.code(),
        Some(0)
    );
    let header = |f: &str| std::fs::read_to_string(out.join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header("dataset.csv"), "id,p_1,p_2,f_1,f_2,f_3");
    assert_eq!(header("embedding.csv"), "id,psi_0,psi_1,psi_2,psi_3,psi_4,psi_5,psi_6");
    assert!(!out.join("verdicts.json").exists());

    let bytes = std::fs::read(out.join("embedding.csv")).unwrap();
    let t = Table::read_csv(bytes.as_slice()).unwrap();
    let mut again = Vec::new();
    t.write_csv(&mut again).unwrap();
    assert_eq!(bytes, again);
}

#[test]
fn unknown_figure_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = effparam(&["figure", "fig99", "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn rect_figure_emits_plot_data() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rect");
    let o = effparam(&["figure", "rect", "--seed", "1", "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    let artifacts = m["artifacts"].as_array().unwrap();
    assert!(artifacts.iter().any(|a| a.as_str().unwrap().ends_with(".csv")));
    for a in artifacts {
        assert!(out.join(a.as_str().unwrap()).is_file());
    }
}

#[test]
fn pellet_writes_the_response_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"{ "schema_version": 1, "seed": 0,
        "pellet": { "beta": 0.2, "gamma": 20.0, "phi_min": 0.9, "phi_max": 10.0, "points": 60 } }"#;
    let cfg = write_config(tmp.path(), text);
    let out = tmp.path().join("pellet");
    let o = effparam(&["pellet", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = Table::read_csv(std::fs::File::open(out.join("pellet_curve.csv")).unwrap()).unwrap();
    let eta = t.column("eta").unwrap();
    assert!(eta.len() >= 60);
    assert!(eta.iter().all(|&e| e > 0.0));
    // The response is non-monotone: its peak lies strictly inside the sweep.
    let peak = eta.iter().copied().fold(0.0, f64::max);
    assert!(peak > eta[0] && peak > eta[eta.len() - 1]);
}
