mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use wbp_active::active::{RunReport, TrainRunConfig};
use wbp_active::channel::snr_to_sigma;
use wbp_active::cli::manifest::RunManifest;
use wbp_active::shells::{ShellPartition, ThetaProfile};

fn wbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wbp-active")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = wbp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn smoke_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/repetition_smoke.toml")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn info_summarizes_fixture() {
    let out = ok(&["info", "hamming_7_4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n=7 k=4 rate=0.571 d_min=3 E=12");
}

#[test]
fn missing_code_file_fails() {
    let out = wbp(&["info", "/nonexistent/code.alist"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_error_exits_2() {
    assert_eq!(wbp(&["eval", "--code", "hamming_7_4"]).status.code(), Some(2));
}

#[test]
fn eval_grid_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        ok(&[
            "eval",
            "--code",
            "hamming_7_4",
            "--unit-weights",
            "--min-errors",
            "20",
            "--max-blocks",
            "5000",
            "--seed",
            "3",
            "--out",
            s(&path),
        ]);
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a.lines().count(), 10, "header plus 0..8 dB");
    assert_eq!(a, run("b.csv"));
}

#[test]
fn weights_for_another_code_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&["train", s(&smoke_config()), "--out", s(&out)]);
    let res =
        wbp(&["eval", "--code", "hamming_7_4", "--weights", s(&out.join("best_weights.bin")), "--snr", "3"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn bad_config_key_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(smoke_config()).unwrap() + "\n[optimizer]\nlearning_rte = 0.1\n";
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = wbp(&["train", s(&cfg), "--out", s(&dir.path().join("run"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("optimizer.learning_rte"));
}

#[test]
fn smoke_train_resume_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let start = Instant::now();
    ok(&["train", s(&smoke_config()), "--out", s(&full)]);
    assert!(start.elapsed().as_secs() < 60);
    assert!(full.join("iter_001/weights.bin").exists());
    assert!(full.join("report.json").exists());

    let part = dir.path().join("part");
    ok(&["train", s(&smoke_config()), "--out", s(&part), "--resume", s(&full.join("iter_001"))]);
    for it in ["iter_002", "iter_003"] {
        if full.join(it).exists() {
            assert_eq!(common::snapshot(&full.join(it), &[]), common::snapshot(&part.join(it), &[]), "{it}");
        }
    }

    let manifest = RunManifest::read(&full.join("manifest.json")).unwrap();
    let written =
        TrainRunConfig::from_toml(&std::fs::read_to_string(full.join("config.toml")).unwrap()).unwrap();
    let original = TrainRunConfig::from_toml(&std::fs::read_to_string(smoke_config()).unwrap()).unwrap();
    assert_eq!(manifest.config, original);
    assert_eq!(written, original);
    assert!(manifest.finished_unix.is_some());
}

#[test]
fn freeze_theta_keeps_full_support() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("frozen");
    ok(&["train", s(&smoke_config()), "--out", s(&out), "--freeze-theta"]);
    let report: RunReport =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for rec in &report.iterations {
        assert_eq!(rec.snrs[0].next_support.len(), 100);
    }
}

#[test]
fn theta_filled_is_fill_of_raw() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "theta",
        "--code",
        "hamming_7_4",
        "--unit-weights",
        "--snr",
        "2",
        "--shells",
        "60",
        "--samples",
        "20000",
        "--gamma",
        "0.5",
        "--out-dir",
        s(dir.path()),
    ]);
    let raw_text = std::fs::read_to_string(dir.path().join("theta_raw.csv")).unwrap();
    let filled_text = std::fs::read_to_string(dir.path().join("theta_filled.csv")).unwrap();
    let (raw, _) = ThetaProfile::parse_csv(&raw_text, 0.5).unwrap();
    let p = ShellPartition::build(7, snr_to_sigma(2.0, 4.0 / 7.0).unwrap(), 60, 1e-6).unwrap();
    assert_eq!(raw.filled(&p, 5).to_csv(&p), filled_text);
}

#[test]
fn sample_hist_follows_theta() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = snr_to_sigma(2.0, 4.0 / 7.0).unwrap();
    let p = ShellPartition::build(7, sigma, 20, 1e-6).unwrap();
    let mut one = ThetaProfile::ones(20, 1.0);
    one.theta = (0..20).map(|l| if l == 7 { 0.3 } else { 0.0 }).collect();
    let theta = dir.path().join("theta.csv");
    one.write_csv(&p, &theta).unwrap();
    let hist = dir.path().join("hist.csv");
    ok(&[
        "sample-hist",
        "--code",
        "hamming_7_4",
        "--snr",
        "2",
        "--shells",
        "20",
        "--theta",
        s(&theta),
        "--samples",
        "5000",
        "--out",
        s(&hist),
    ]);
    let text = std::fs::read_to_string(hist).unwrap();
    let rows: Vec<Vec<String>> =
        text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 20);
    let total: f64 = rows.iter().map(|r| r[5].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(rows[7][4], "5000");

    let res =
        wbp(&["sample-hist", "--code", "hamming_7_4", "--snr", "2", "--shells", "21", "--theta", s(&theta)]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn compare_flags_uniformly_worse_decoder() {
    let dir = tempfile::tempdir().unwrap();
    let header = wbp_active::eval::STATS_CSV_HEADER;
    let good = dir.path().join("good.csv");
    let bad = dir.path().join("bad.csv");
    std::fs::write(&good, format!("{header}\n1,1000,100,150,0.1,0.02,true\n2,1000,100,120,0.05,0.01,true\n"))
        .unwrap();
    std::fs::write(&bad, format!("{header}\n1,1000,100,150,0.2,0.04,true\n2,1000,100,120,0.08,0.02,true\n"))
        .unwrap();
    assert_eq!(wbp(&["compare", s(&good), s(&bad)]).status.code(), Some(0));
    assert_eq!(wbp(&["compare", s(&bad), s(&good)]).status.code(), Some(1));
}
