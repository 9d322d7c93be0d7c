//! End-to-end tests of the `rebit` binary: file formats, subcommands and
//! exit codes.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rebit"))
}

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rebit-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &std::path::Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn operator_json_identity_plus_k() -> String {
    // I + K on one qubit: A = I, B = I.
    serde_json::json!({
        "n": 1,
        "A": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
        "B": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
    })
    .to_string()
}

fn operator_json_k() -> String {
    serde_json::json!({
        "n": 1,
        "A": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        "B": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
    })
    .to_string()
}

#[test]
fn simulate_worked_single_qubit_example() {
    let dir = workdir();
    let circ = write(&dir, "ck.circ", "qubits 1\nCK 1\n");
    let state = write(
        &dir,
        "state.json",
        r#"{"n":1,"amps":[[0.1,0.2],[0.3,0.4]]}"#,
    );
    let out = bin()
        .args(["simulate", "--state"])
        .arg(&state)
        .arg(&circ)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let discrepancy = doc["max_dual_path_discrepancy"].as_f64().unwrap();
    assert!(discrepancy < 1e-12);
    let final_state = doc["final_state"].as_array().unwrap();
    // (a+ib)|0> + (c-id)|1>
    assert!((final_state[1][0].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert!((final_state[1][1].as_f64().unwrap() + 0.4).abs() < 1e-12);
    assert!(doc["version"].is_string());
    assert!(doc["seed"].is_u64());
    assert!(doc["tolerance"].is_f64());
}

#[test]
fn check_reports_false_with_success_exit() {
    let dir = workdir();
    let op = write(&dir, "ipk.json", &operator_json_identity_plus_k());
    let out = bin()
        .args(["check", "--what", "r-unitary"])
        .arg(&op)
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["r_unitary"], serde_json::Value::Bool(false));
}

#[test]
fn check_full_report_on_k() {
    let dir = workdir();
    let op = write(&dir, "k.json", &operator_json_k());
    let out = bin().args(["check"]).arg(&op).output().unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["r_unitary"], serde_json::Value::Bool(true));
    assert_eq!(doc["partial_antiunitary"], serde_json::Value::Bool(true));
    assert_eq!(doc["r_pauli"], serde_json::Value::Bool(true));
    assert_eq!(doc["r_clifford"], serde_json::Value::Bool(true));
    assert_eq!(doc["level"], serde_json::json!(1));
}

#[test]
fn encode_circuit_to_rebit_circuit() {
    let dir = workdir();
    let circ = write(&dir, "t.circ", "qubits 2\nT 1\nK\n");
    let out = bin().arg("encode").arg(&circ).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("qubits 3"));
    assert!(text.contains("CZ 1 3"));
    assert!(text.contains("CH 1 3"));
    assert!(text.contains("Z 3"));
}

#[test]
fn compile_rclifford_operator() {
    let dir = workdir();
    let op = write(&dir, "k.json", &operator_json_k());
    let out = bin()
        .args(["compile", "--mode", "rclifford"])
        .arg(&op)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("qubits 2"));
    assert!(text.contains("Z 2"));
}

#[test]
fn compile_expand_and_kl_modes() {
    let dir = workdir();
    let circ = write(&dir, "ht.circ", "qubits 2\nH 1\nT 2\nCX 1 2\n");
    let out = bin()
        .args(["compile", "--mode", "expand"])
        .arg(&circ)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("qubits 3"));

    let decider = write(&dir, "decider.circ", "qubits 3\nCCX 1 2 3\n");
    let out = bin()
        .args([
            "compile",
            "--mode",
            "kl-circuit",
            "--language-qubits",
            "2",
            "--result-wire",
            "3",
        ])
        .arg(&decider)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("CK").count(), 1, "exactly one CK: {text}");
}

#[test]
fn factor_k_gives_single_conjugation() {
    let dir = workdir();
    let op = write(&dir, "k.json", &operator_json_k());
    let out = bin().arg("factor").arg(&op).output().unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["conjugation_count"], serde_json::json!(1));
    assert_eq!(doc["factors"][0]["type"], serde_json::json!("KL"));
    assert_eq!(doc["factors"][0]["mask"], serde_json::json!("3"));
}

#[test]
fn sample_engine_mismatch_is_a_validation_error() {
    let dir = workdir();
    let circ = write(&dir, "t.circ", "qubits 1\nT 1\n");
    let out = bin()
        .args(["sample", "--engine", "stabilizer", "--seed", "3"])
        .arg(&circ)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Auto falls back to the dense engine.
    let out = bin()
        .args(["sample", "--engine", "auto", "--seed", "3", "--shots", "16"])
        .arg(&circ)
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["engine"], serde_json::json!("dense"));
}

#[test]
fn malformed_circuit_reports_line_number() {
    let dir = workdir();
    let circ = write(&dir, "bad.circ", "qubits 2\nH 1\nFROB 2\n");
    let out = bin().arg("simulate").arg(&circ).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "stderr: {err}");
}

#[test]
fn tomo_reports_counts_and_overlap() {
    let dir = workdir();
    let state = write(&dir, "st.json", r#"{"n":1,"amps":[[0.6,0.0],[0.0,0.8]]}"#);
    let out = bin().arg("tomo").arg(&state).output().unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["m"], serde_json::json!(2));
    assert_eq!(doc["num_observables"], serde_json::json!(10));
    assert!(doc["reconstruction_overlap"].as_f64().unwrap() > 1.0 - 1e-9);
}

#[test]
fn stabilizer_and_dense_sampling_distributions_match() {
    let dir = workdir();
    let circ = write(
        &dir,
        "mix.circ",
        "qubits 3\nH 1\nS 2\nCK 1\nCX 1 3\nK\nH 2\n",
    );
    let run = |engine: &str| -> serde_json::Value {
        let out = bin()
            .args([
                "sample", "--engine", engine, "--seed", "5", "--shots", "4000",
            ])
            .arg(&circ)
            .output()
            .unwrap();
        assert!(out.status.success());
        serde_json::from_slice(&out.stdout).unwrap()
    };
    let stab = run("stabilizer");
    let dense = run("dense");
    let sp = stab["probs"].as_object().unwrap();
    let dp = dense["probs"].as_object().unwrap();
    for (key, val) in dp {
        let d = val.as_f64().unwrap();
        let s = sp.get(key).map(|v| v.as_f64().unwrap()).unwrap_or(0.0);
        assert!((d - s).abs() < 1e-10, "{key}: dense {d} vs stabilizer {s}");
    }
}
