//! End-to-end runs of the `mcf` binary: exit codes, JSON reports, artifact
//! determinism and plotting.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcf")).args(args).env_remove("MCF_THREADS").output().expect("spawn mcf")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn constants_n4_k4() {
    let out = mcf(&["constants", "--n", "4", "--k", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["params"]["alpha"], -2.0);
    assert_eq!(v["params"]["lambda_k"], 2.5);
    assert!((v["params"]["sigma_k"].as_f64().unwrap() - 0.8333).abs() < 1e-4);
    assert_eq!(v["params"]["mu"], 0.5);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&mcf(&["--no-such-flag"])), 64);
    assert_eq!(code(&mcf(&["constants", "--n", "4"])), 64);
    assert_eq!(code(&mcf(&[])), 64);
    assert_eq!(code(&mcf(&["--help"])), 0);
    assert_eq!(code(&mcf(&["--version"])), 0);
    assert_eq!(code(&mcf(&["evolve", "--help"])), 0);
    // Rejected parameters and failed hypotheses.
    assert_eq!(code(&mcf(&["constants", "--n", "3", "--k", "2"])), 2);
    assert_eq!(code(&mcf(&["constants", "--n", "4", "--k", "2", "--a", "2.1"])), 2);
    assert_eq!(code(&mcf(&["constants", "--n", "4", "--k", "4", "--a", "2.1"])), 0);
    assert_eq!(code(&mcf(&["barriers", "--n", "4", "--k", "4", "--gamma", "1", "--c-bar", "0.9"])), 2);
}

#[test]
fn thread_cap_is_validated() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_mcf")).args(["constants", "--n", "5", "--k", "3"]).env("MCF_THREADS", v).output().unwrap()
    };
    assert_eq!(code(&run("0")), 64);
    assert_eq!(code(&run("many")), 64);
    assert_eq!(code(&run("2")), 0);
}

#[test]
fn verify_all_quick_passes() {
    let out = mcf(&["verify-all", "--quick"]);
    let v = json(&out);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(v["criteria"].as_array().unwrap().len(), 8);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().filter(|l| l.contains("PASS")).count(), 8);
    assert_eq!(code(&mcf(&["verify-all", "--quick", "--only", "9"])), 2);
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |d: &str| {
        vec![
            "--out".to_string(),
            tmp.path().join(d).to_string_lossy().into_owned(),
            "evolve".into(),
            "--initial".into(),
            "sphere".into(),
            "--nodes".into(),
            "200".into(),
            "--horizon".into(),
            "0.9".into(),
            "--outputs".into(),
            "0.5".into(),
            "--plot".into(),
        ]
    };
    for d in ["a", "b"] {
        let a = args(d);
        let out = mcf(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = read_dir_sorted(&tmp.path().join("a"));
    let b = read_dir_sorted(&tmp.path().join("b"));
    let names: Vec<&str> = a.iter().map(|x| x.0.as_str()).collect();
    assert_eq!(names, ["diagnostics.csv", "manifest.json", "rate.svg", "report.json", "snapshots.csv"]);
    assert_eq!(a, b);
    let manifest: Value = serde_json::from_slice(&a[1].1).unwrap();
    assert_eq!(manifest["command"], "evolve");
    assert_eq!(manifest["config"]["nodes"], 200);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    let text = String::from_utf8_lossy(&a[1].1).to_lowercase();
    assert!(!text.contains("time\":") && !text.contains("date"));
}

#[test]
fn seeded_sampling_is_reproducible() {
    let run = |seed: &str| json(&mcf(&["barriers", "--n", "5", "--k", "3", "--samples", "500", "--seed", seed]));
    let (a, b, c) = (run("11"), run("11"), run("12"));
    assert_eq!(a, b);
    assert_ne!(a["residual"]["at"], c["residual"]["at"]);
    assert!(a["residual"]["min_normalized"].as_f64().unwrap() >= -1e-12);
}

#[test]
fn plot_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("decay.csv");
    let body: String = std::iter::once("t,sup_ratio\n".to_string())
        .chain((0..9).map(|i| {
            let t = 10f64.powf(i as f64 / 4.0);
            format!("{t},{}\n", 0.56 * t.powf(-0.5))
        }))
        .collect();
    fs::write(&csv, body).unwrap();
    let svg = tmp.path().join("decay.svg");
    let args = ["plot", "--input", csv.to_str().unwrap(), "--output", svg.to_str().unwrap(), "--x", "t", "--y", "sup_ratio", "--axes", "loglog", "--slope"];
    let out = mcf(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!((json(&out)["slope"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    let first = fs::read(&svg).unwrap();
    assert!(String::from_utf8_lossy(&first).contains("fitted slope -0.5000"));
    assert_eq!(code(&mcf(&args)), 0);
    assert_eq!(first, fs::read(&svg).unwrap());

    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = mcf(&["plot", "--input", empty.to_str().unwrap(), "--output", svg.to_str().unwrap(), "--x", "t", "--y", "v"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
    let out = mcf(&["plot", "--input", csv.to_str().unwrap(), "--output", svg.to_str().unwrap(), "--x", "t", "--y", "nope"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn subcommand_reports() {
    let v = json(&mcf(&["curvature", "--n", "7", "--shape", "cylinder", "--radius", "2"]));
    assert!(v["max_relative_error"].as_f64().unwrap() <= 1e-10);
    let out = mcf(&["minimal-surface", "--n", "4", "--b", "0.5"]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["alpha_fit"].as_f64().unwrap() + 2.0).abs() < 0.1);
    let out = mcf(&["heat-kernel", "--n", "5", "--delta", "2"]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["decay"]["fit"]["exponent"].as_f64().unwrap() + 1.0).abs() < 0.15);
    let out = mcf(&["jacobi", "--nodes", "1000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["top_eigenvalue"].as_f64().unwrap() <= 1e-3);
}
