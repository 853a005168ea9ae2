use std::path::Path;
use std::process::{Command, Output};

use qsklab::config::ExperimentFile;
use qsklab::ensemble::run_ensemble;

fn qsklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsklab"))
        .args(args)
        .output()
        .expect("spawn qsklab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn experiment(dir: &Path, extra_model: &str, grid: &str) -> String {
    format!(
        "seed = 11\n\n[model]\nn = 4\nlaw = \"gaussian\"\n{extra_model}\n[ensemble]\nsamples = 20\n\n\
         [grid]\n{grid}\n\n[output]\ncsv = \"{}\"\n",
        dir.join("out.csv").display()
    )
}

#[test]
fn exit_codes() {
    assert_eq!(code(&qsklab(&["sample", "--n", "1"])), 2);
    assert_eq!(code(&qsklab(&["sample", "--beta", "0"])), 2);
    assert_eq!(code(&qsklab(&["sample", "--n", "20"])), 3);
    assert_eq!(code(&qsklab(&["sample", "--law", "cauchy"])), 2);
    assert_eq!(code(&qsklab(&["verify", "nonsense"])), 2);
    assert_eq!(code(&qsklab(&["frobnicate"])), 2);
    assert_eq!(code(&qsklab(&["--help"])), 0);
    assert_eq!(code(&qsklab(&["verify", "algebra"])), 0);
}

#[test]
fn malformed_file_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exp.toml");
    let text = experiment(dir.path(), "colour = \"red\"", "beta = [1.0]\nh = [0.5]");
    std::fs::write(&file, text).unwrap();
    let out = qsklab(&["sweep", file.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour") && err.contains("line"), "{err}");
    assert!(!dir.path().join("out.csv").exists());

    let text = experiment(dir.path(), "", "beta = [1.0]\nh = [0.5]").replace("n = 4", "n = 30");
    std::fs::write(&file, text).unwrap();
    assert_eq!(code(&qsklab(&["sweep", file.to_str().unwrap()])), 3);
    assert!(!dir.path().join("out.csv").exists());
}

#[test]
fn single_point_sweep_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exp.toml");
    std::fs::write(&file, experiment(dir.path(), "", "beta = [2.0]\nh = [0.3]")).unwrap();
    let out = qsklab(&["sweep", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2, "{csv}");
    let header: Vec<&str> = rows[0].split(',').collect();
    let row: Vec<&str> = rows[1].split(',').collect();
    let col = header
        .iter()
        .position(|&c| c == "overlap_sq_mean")
        .expect("overlap column");

    let experiment = ExperimentFile::parse(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let config = experiment.configs().unwrap().remove(0);
    let stats = run_ensemble(&config).unwrap();
    let from_csv: f64 = row[col].parse().unwrap();
    assert_eq!(from_csv, stats.overlap_sq.mean);
}

#[test]
fn ensemble_emits_json_lines() {
    let out = qsklab(&["ensemble", "--n", "3", "--samples", "5", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0]["kind"], "config");
    assert_eq!(lines[6]["kind"], "stats");
    for key in [
        "n",
        "beta",
        "h",
        "j",
        "overlap_sq",
        "exchange_energy",
        "m1",
        "m2",
        "m4",
        "duhamel_aa",
        "fb_lower",
        "seed",
        "sample_hash",
    ] {
        assert!(lines[1].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn couplings_round_trip() {
    let out = qsklab(&[
        "couplings",
        "--n",
        "5",
        "--seed",
        "9",
        "--law",
        "rademacher",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("N=5 kind=rademacher seed=9\n"), "{text}");
    let (sample, _, _) = qsklab::model::CouplingSample::parse_canonical_text(&text).unwrap();
    assert!(sample.gamma().iter().all(|g| g.abs() == 1.0));
}
