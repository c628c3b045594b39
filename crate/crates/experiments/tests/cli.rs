//! End-to-end CLI behavior: exit codes, machine-readable errors, strict
//! config handling, deterministic artifacts, and the Ito subcommands.

use std::path::Path;
use std::process::{Command, Output};

fn qflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qflab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn list_is_deterministic_and_complete() {
    let a = qflab(&["list"]);
    let b = qflab(&["list"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() >= 12);
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted, "listing must be alphabetized");
    for name in [
        "qubit-decay-filter",
        "zakai-martingale",
        "innovations-whiteness",
        "ce-axioms",
        "covariance-lemma",
        "takesaki-pos-neg",
        "gaussian-conditioning",
        "dmz-vs-kushner",
        "kalman-crosscheck",
        "vn-pointer-gaussian",
        "nondemolition-truncated",
        "ito-goldens",
    ] {
        assert!(text.contains(name), "listing missing {name}");
    }
    for line in lines {
        assert!(line.contains("criteri"), "entry must name its criterion: {line}");
    }
}

#[test]
fn ito_subcommands() {
    let out = qflab(&["ito", "table"]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        table,
        "x    | dt  dB  dB*  dL\n-----+----------------\ndt   | 0   0   0    0\ndB   | 0   0   dt   dB\ndB*  | 0   0   0    0\ndL   | 0   0   dB*  dL\n"
    );

    let out = qflab(&["ito", "simplify", "dQ.dQ"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "dt");

    let out = qflab(&["ito", "simplify", "dB.dB"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0");

    // syntax error: exit 2 with a JSON error naming the position
    let out = qflab(&["ito", "simplify", "dB . ."]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("syntax error"));
}

#[test]
fn config_errors_exit_2_with_json() {
    let dir = tempfile::tempdir().unwrap();

    // malformed JSON: parse error carries line/column
    let path = write_config(dir.path(), "bad.json", "{\n  \"experiment\": \n}");
    let out = qflab(&["run", &path]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains("line"));

    // unknown key rejected loudly
    let path = write_config(
        dir.path(),
        "unknown.json",
        r#"{"experiment": "ito-goldens", "params": {"bogus": 1}}"#,
    );
    let out = qflab(&["run", &path]);
    assert_eq!(out.status.code(), Some(2));

    // unknown experiment
    let path = write_config(
        dir.path(),
        "unknown_exp.json",
        r#"{"experiment": "not-a-thing"}"#,
    );
    let out = qflab(&["run", &path]);
    assert_eq!(out.status.code(), Some(2));

    // nonpositive numeric parameter
    let path = write_config(
        dir.path(),
        "nonpositive.json",
        r#"{"experiment": "qubit-decay-filter", "params": {"dt": -0.001}}"#,
    );
    let out = qflab(&["run", &path]);
    assert_eq!(out.status.code(), Some(2));

    // missing file: i/o failure
    let out = qflab(&["run", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_produces_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "experiment": "qubit-decay-filter",
        "params": {"seed": 11, "t_final": 0.25, "n_trajectories": 40, "trajectory_dumps": 2}
    }"#;
    let path = write_config(dir.path(), "decay.json", config);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let run_a = qflab(&["run", &path, "--output-dir", out_a.to_str().unwrap()]);
    assert!(run_a.status.success(), "{run_a:?}");
    let run_b = qflab(&["run", &path, "--output-dir", out_b.to_str().unwrap()]);
    assert!(run_b.status.success());

    let mut names: Vec<String> = std::fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert!(names.contains(&"ensemble_summary.csv".to_string()));
    assert!(names.contains(&"master_equation.csv".to_string()));
    assert!(names.contains(&"trajectory_0.csv".to_string()));
    assert!(names.contains(&"manifest.json".to_string()));
    for name in &names {
        if name.ends_with(".csv") {
            let a = std::fs::read(out_a.join(name)).unwrap();
            let b = std::fs::read(out_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }
    // manifests agree on every checksum (wall clock may differ)
    let ma: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("manifest.json")).unwrap())
            .unwrap();
    let mb: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_b.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(ma["files"], mb["files"]);
    assert_eq!(ma["config_sha256"], mb["config_sha256"]);
}

#[test]
fn output_dir_resolution_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let from_config = dir.path().join("from-config");
    let config = format!(
        r#"{{"experiment": "ito-goldens", "output_dir": "{}"}}"#,
        from_config.display()
    );
    let path = write_config(dir.path(), "goldens.json", &config);

    // config field used when nothing overrides it
    let out = qflab(&["run", &path]);
    assert!(out.status.success());
    assert!(from_config.join("ito_table.txt").exists());

    // environment override wins over the config field
    let from_env = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_qflab"))
        .args(["run", &path])
        .env("QFLAB_OUTPUT_DIR", from_env.to_str().unwrap())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(from_env.join("ito_table.txt").exists());

    // CLI flag wins over everything
    let from_cli = dir.path().join("from-cli");
    let out = Command::new(env!("CARGO_BIN_EXE_qflab"))
        .args(["run", &path, "--output-dir", from_cli.to_str().unwrap()])
        .env("QFLAB_OUTPUT_DIR", from_env.to_str().unwrap())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(from_cli.join("ito_table.txt").exists());
}

#[test]
fn acceptance_single_criterion_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = qflab(&[
        "acceptance",
        "--only",
        "04-ito-table-goldens",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("PASS  04-ito-table-goldens"));
    assert!(dir.path().join("verdicts.json").exists());
}
