use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use spacetime_core::Error;
use stlab::{parse_circuit, parse_lambda_grid, CliError, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC};

fn stlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("STLAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn summary(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn verify_n2_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = stlab(dir.path(), &["verify", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&dir.path().join("verify"));
    assert_eq!(s["schema_version"], 1);
    assert_eq!(s["pass"], true);
}

#[test]
fn gap_scan_rows_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = stlab(dir.path(), &["gap-scan", "--n", "2", "--lambdas", "0:1:0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("gap-scan/gap_scan.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| &r[4] == "true"));
}

#[test]
fn limit_shape_writes_svg_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let out = stlab(dir.path(), &["limit-shape", "--m", "1600", "--samples", "200", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let base = dir.path().join("limit-shape");
    let svg = std::fs::read_to_string(base.join("limit_shape.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    let s = summary(&base);
    assert!(s["results"]["fraction"].as_f64().unwrap() >= 0.95);
}

#[test]
fn failed_check_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = stlab(dir.path(), &["limit-shape", "--m", "400", "--samples", "20", "--threshold", "0.001"]);
    assert_eq!(out.status.code(), Some(EXIT_CHECK));
    assert_eq!(summary(&dir.path().join("limit-shape"))["pass"], false);
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["verify", "--n", "9"],
        vec!["gap-scan", "--n", "2", "--lambdas", "0:2:0.1"],
        vec!["torus-check", "--n", "3"],
        vec!["young-walk", "--t", "3", "--m-max", "12"],
        vec!["janzing-run", "--n", "3", "--k", "5"],
        vec!["verify"],
    ] {
        let out = stlab(dir.path(), &args);
        assert_eq!(out.status.code(), Some(EXIT_CONFIG), "{args:?}");
    }
    let out = stlab(dir.path(), &["torus-check", "--n", "3"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));
}

#[test]
fn numeric_errors_map_to_4() {
    assert_eq!(CliError::from(Error::NoConvergence { best_residual: 1.0 }).code, EXIT_NUMERIC);
    assert_eq!(CliError::from(Error::StepUnderflow { time: 0.0, estimate: 1.0 }).code, EXIT_NUMERIC);
    assert_eq!(CliError::from(Error::InvalidParameter("x".into())).code, EXIT_CONFIG);
}

#[test]
fn outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for args in [
        vec!["plancherel-sample", "--m", "8", "--samples", "3000", "--seed", "5"],
        vec!["adiabatic-run", "--T", "20", "--steps", "200", "--shots", "30"],
        vec!["janzing-run", "--n", "2", "--T", "inf"],
    ] {
        assert_eq!(stlab(a.path(), &args).status.code(), Some(0), "{args:?}");
        assert_eq!(stlab(b.path(), &args).status.code(), Some(0), "{args:?}");
    }
    for sub in ["plancherel-sample", "adiabatic-run", "janzing-run"] {
        for entry in std::fs::read_dir(a.path().join(sub)).unwrap() {
            let name = entry.unwrap().file_name();
            let x = std::fs::read(a.path().join(sub).join(&name)).unwrap();
            let y = std::fs::read(b.path().join(sub).join(&name)).unwrap();
            assert_eq!(x, y, "{sub}/{name:?}");
        }
    }
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_stlab"))
        .args(["edge-probs", "--n", "3"])
        .env("STLAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("edge-probs/edges.csv").exists());
}

fn write_circuit(dir: &Path, gates: &str) -> std::path::PathBuf {
    let path = dir.join("circuit.json");
    let text = format!(r#"{{"n": 2, "region": {{"kind": "adiabatic_center", "size": 1}}, "gates": [{gates}]}}"#);
    std::fs::write(&path, text).unwrap();
    path
}

fn matrix_json(m: [[f64; 4]; 4]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|v| format!("[{v}, 0.0]")).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

const SWAP: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

#[test]
fn circuit_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = parse_circuit(&write_circuit(dir.path(), "")).unwrap();
    assert_eq!(empty.gates().count(), 0);

    let swap = format!(r#"{{"plaquette": [0, 1], "unitary": {}}}"#, matrix_json(SWAP));
    let c = parse_circuit(&write_circuit(dir.path(), &swap)).unwrap();
    assert_eq!(c.gates().count(), 1);

    let mut scaled = SWAP;
    scaled[0][0] = 1.1;
    let bad = format!(r#"{{"plaquette": [0, 1], "unitary": {}}}"#, matrix_json(scaled));
    let err = parse_circuit(&write_circuit(dir.path(), &bad)).unwrap_err();
    assert_eq!(err.code, EXIT_CONFIG);
    assert!(err.message.contains("deviation"), "{}", err.message);

    let outside = format!(r#"{{"plaquette": [1, 0], "unitary": {}}}"#, matrix_json(SWAP));
    let err = parse_circuit(&write_circuit(dir.path(), &outside)).unwrap_err();
    assert!(err.message.contains("outside"), "{}", err.message);

    std::fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    assert_eq!(parse_circuit(&dir.path().join("broken.json")).unwrap_err().code, EXIT_CONFIG);
    assert!(parse_circuit(&dir.path().join("missing.json")).is_err());
}

#[test]
fn circuit_file_drives_run() {
    let dir = tempfile::tempdir().unwrap();
    let swap = format!(r#"{{"plaquette": [0, 1], "unitary": {}}}"#, matrix_json(SWAP));
    let path = write_circuit(dir.path(), &swap);
    let out = stlab(dir.path(), &["gap-scan", "--n", "2", "--lambdas", "0:1:0.5", "--circuit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn lambda_grids() {
    let g = parse_lambda_grid("0:1:0.1").unwrap();
    assert_eq!(g.len(), 11);
    assert_eq!(g[10], 1.0);
    assert_eq!(parse_lambda_grid("0.5:0.5:0.1").unwrap(), vec![0.5]);
    for bad in ["0:1", "1:0:0.1", "0:1:0", "a:b:c", "0:1.5:0.1"] {
        assert!(parse_lambda_grid(bad).is_err(), "{bad}");
    }
}
