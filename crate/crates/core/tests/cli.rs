use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use famasel::harness::dataset::read_jsonl;
use famasel::harness::{DatasetRecord, GoldenRecord};

fn famasel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_famasel")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_writes_one_row_per_value_and_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let args = [
        "sweep", "--param", "snr_db", "--values", "5,15,25", "--algs", "gfwd,gfwds", "--trials", "10", "--out",
        path_arg(&out), "--seed", "7",
    ];
    let o = famasel(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read(&out).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("swept_param,value,algorithm,mean_se,std_se,trials,mean_runtime_us,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.starts_with("snr_db,") && r.ends_with(",10,0,7")));
    assert!(stdout(&o).contains("gfwds"));

    assert_eq!(famasel(&args).status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap(), first);
}

#[test]
fn sweep_to_stdout_with_timing() {
    let o = famasel(&[
        "sweep", "--param", "R", "--values", "0,1", "--algs", "gfwds", "--trials", "5", "--ports", "20", "--rf-chains", "3",
        "--timing",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    let runtime: f64 = text.lines().nth(1).unwrap().split(',').nth(6).unwrap().parse().unwrap();
    assert!(runtime > 0.0);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["sweep", "--param", "snr_db", "--values", "5", "--algs", "nope"][..],
        &["sweep", "--param", "bogus", "--values", "5"],
        &["sweep", "--param", "L", "--values", "2.5"],
        &["sweep", "--param", "snr_db", "--values", "5", "--rf-chains", "200"],
        &["dataset", "--n", "0", "--out", "x.jsonl"],
        &["bench", "--trials", "3"],
        &["frobnicate"],
        &[],
    ] {
        let o = famasel(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn missing_config_file_is_a_runtime_error() {
    let o = famasel(&["sweep", "--param", "snr_db", "--values", "5", "--config", "/nonexistent/cfg.json"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"P": 24, "L": 2, "K": 3, "seed": 11}"#).unwrap();
    let o = famasel(&[
        "sweep", "--config", path_arg(&cfg), "--seed", "12", "--param", "snr_db", "--values", "10", "--algs",
        "sfama", "--trials", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",12"));
}

#[test]
fn dataset_line_count_and_snr_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.jsonl");
    let o = famasel(&["dataset", "--n", "10", "--snrs", "5,25", "--ports", "20", "--rf-chains", "3", "--users", "4", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 10);
    let records: Vec<DatasetRecord> = read_jsonl(&out).unwrap();
    let snrs: Vec<f64> = records.iter().map(|r| r.snr_db).collect();
    assert_eq!(snrs, [5.0, 25.0].repeat(5));
    assert!(records.iter().all(|r| r.oracle_ports.len() == 3 && r.h_re.len() == 20 && r.h_re[0].len() == 4));
}

#[test]
fn dataset_default_snrs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.jsonl");
    let o = famasel(&["dataset", "--n", "5", "--ports", "16", "--rf-chains", "2", "--users", "3", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let records: Vec<DatasetRecord> = read_jsonl(&out).unwrap();
    let snrs: Vec<f64> = records.iter().map(|r| r.snr_db).collect();
    assert_eq!(snrs, [5.0, 10.0, 15.0, 20.0, 25.0]);
}

#[test]
fn golden_file_has_only_channel_and_features() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.jsonl");
    let o = famasel(&["dataset", "--golden", "--n", "3", "--ports", "16", "--rf-chains", "2", "--users", "3", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["H_im", "H_re", "features", "snr_db"]);
    }
    let golden: Vec<GoldenRecord> = read_jsonl(&out).unwrap();
    assert_eq!(golden.len(), 3);
}

#[test]
fn verify_prints_counts() {
    let o = famasel(&["verify", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("monotonicity: 100/100 ok"), "{text}");
    assert!(text.contains("gev-consistency: 10/10 ok"));
    assert!(text.contains("ordering: 10/10 ok"));
}

#[test]
fn bench_prints_a_table() {
    let o = famasel(&["bench", "--ports", "30", "--rf-chains", "3", "--algs", "sfama,gfwd,gfwds", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for needle in ["method", "complexity", "time (ms)", "sfama", "gfwd", "gfwds"] {
        assert!(text.contains(needle), "{needle} missing from\n{text}");
    }
}
