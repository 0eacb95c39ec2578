//! End-to-end tests of the command-line interface: exit codes, config
//! validation, and agreement with the library harness.

use std::path::Path;
use std::process::Command;

use specsense::{DetectorSpec, ExperimentConfig, SignalSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specsense"))
}

/// Small, fast experiment: d=4 frames over a 60-sample single tone.
fn small_config_json(detector: &str, extra: &str) -> String {
    format!(
        r#"{{
  "version": 1,
  "detector": {detector},
  "signal": {{ "kind": "sinusoid", "freqs": [0.1], "phases": [0.0] }},
  "frame_dim": 4,
  "stride": 1,
  "length": 60,
  "snr_grid_db": [-5.0, 5.0],
  "trials": 60,
  "target_pf": 0.1,
  "base_seed": 7{extra}
}}"#
    )
}

fn write_config(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn sweep_writes_one_row_per_snr() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.json",
        &small_config_json(r#"{ "kind": "ec" }"#, ""),
    );
    let out = dir.path().join("sweep.csv");
    let status = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "snr_db,threshold,pd,pf");
    assert_eq!(lines.len(), 3); // header + 2 SNR points
}

#[test]
fn sweep_matches_library_harness() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.json",
        &small_config_json(r#"{ "kind": "mme" }"#, ""),
    );
    let out = dir.path().join("sweep.csv");
    assert!(bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());

    let experiment = ExperimentConfig {
        detector: DetectorSpec::Mme,
        signal: SignalSpec::SinusoidMix {
            freqs: vec![0.1],
            phases: vec![0.0],
        },
        frame_dim: 4,
        stride: 1,
        length: 60,
        snr_grid_db: vec![-5.0, 5.0],
        trials: 60,
        target_pf: 0.1,
        base_seed: 7,
    };
    let report = specsense::run_sweep(&experiment, 0).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), report.to_csv());
}

#[test]
fn unknown_top_level_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let bad = small_config_json(r#"{ "kind": "ec" }"#, ",\n  \"sigma\": 2.0");
    let config = write_config(dir.path(), "c.json", &bad);
    let output = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("sigma"), "stderr: {stderr}");
}

#[test]
fn unknown_kernel_parameter_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let detector = r#"{ "kind": "kpca", "kernel": { "kind": "polynomial", "c": 1.0, "degree": 2, "width": 3.0 } }"#;
    let config = write_config(dir.path(), "c.json", &small_config_json(detector, ""));
    let output = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("width"), "stderr: {stderr}");
}

#[test]
fn wrong_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = small_config_json(r#"{ "kind": "ec" }"#, "").replace("\"version\": 1", "\"version\": 2");
    let config = write_config(dir.path(), "c.json", &bad);
    let output = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn missing_output_path_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.json",
        &small_config_json(r#"{ "kind": "ec" }"#, ""),
    );
    let output = bin().args(["sweep", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn output_field_in_config_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_config.csv");
    let extra = format!(",\n  \"output\": {}", serde_json::to_string(&out).unwrap());
    let config = write_config(
        dir.path(),
        "c.json",
        &small_config_json(r#"{ "kind": "ec" }"#, &extra),
    );
    assert!(bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .status()
        .unwrap()
        .success());
    assert!(out.exists());
}

#[test]
fn roc_high_snr_reaches_perfect_corner() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.json",
        &small_config_json(r#"{ "kind": "ec" }"#, ""),
    );
    let out = dir.path().join("roc.csv");
    assert!(bin()
        .args(["roc", "--config"])
        .arg(&config)
        .args(["--snr", "30"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "pf,pd");
    assert!(lines.contains(&"0,1"), "curve should hit (0, 1): {text}");

    // Thin-shell check: the library harness produces the identical curve.
    let experiment = ExperimentConfig {
        detector: DetectorSpec::Ec,
        signal: SignalSpec::SinusoidMix {
            freqs: vec![0.1],
            phases: vec![0.0],
        },
        frame_dim: 4,
        stride: 1,
        length: 60,
        snr_grid_db: vec![-5.0, 5.0],
        trials: 60,
        target_pf: 0.1,
        base_seed: 7,
    };
    let curve = specsense::roc_curve(&experiment, 30.0, 0).unwrap();
    assert_eq!(text, curve.to_csv());
    assert_eq!(lines.len(), curve.points.len() + 1);
}

#[test]
fn roc_rejects_malformed_snr() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.json",
        &small_config_json(r#"{ "kind": "ec" }"#, ""),
    );
    let output = bin()
        .args(["roc", "--config"])
        .arg(&config)
        .args(["--snr", "abc"])
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn similarity_of_repeated_segments_is_one() {
    let dir = tempfile::tempdir().unwrap();
    // A stream of four identical segments, loaded from CSV.
    let base = specsense::generate_sinusoid_mix(&[0.13, 0.29], &[0.2, 0.9], 60).unwrap();
    let mut samples = Vec::new();
    for _ in 0..4 {
        samples.extend_from_slice(base.samples());
    }
    let stream = specsense::SampleStream::new(samples).unwrap();
    let stream_path = dir.path().join("stream.csv");
    specsense::save_samples(&stream_path, specsense::SampleFormat::Csv, &stream).unwrap();

    let config_text = format!(
        r#"{{
  "version": 1,
  "detector": {{ "kind": "pca" }},
  "signal": {{ "kind": "file", "path": {path}, "format": "csv" }},
  "frame_dim": 4,
  "stride": 1,
  "length": 240,
  "snr_grid_db": [0.0],
  "trials": 60,
  "target_pf": 0.1,
  "base_seed": 7,
  "segment_len": 60
}}"#,
        path = serde_json::to_string(&stream_path).unwrap()
    );
    let config = write_config(dir.path(), "c.json", &config_text);
    let out = dir.path().join("sims.csv");
    assert!(bin()
        .args(["similarity", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let sims: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(sims.len(), 3);
    for s in sims {
        assert!((s - 1.0).abs() <= 1e-6, "similarity {s}");
    }
}

#[test]
fn similarity_rejects_stream_shorter_than_two_segments() {
    let dir = tempfile::tempdir().unwrap();
    let stream = specsense::generate_gaussian_noise(80, 1.0, 3).unwrap();
    let stream_path = dir.path().join("short.csv");
    specsense::save_samples(&stream_path, specsense::SampleFormat::Csv, &stream).unwrap();
    let config_text = format!(
        r#"{{
  "version": 1,
  "detector": {{ "kind": "pca" }},
  "signal": {{ "kind": "file", "path": {path}, "format": "csv" }},
  "frame_dim": 4,
  "stride": 1,
  "length": 80,
  "snr_grid_db": [0.0],
  "trials": 60,
  "target_pf": 0.1,
  "base_seed": 7,
  "segment_len": 60
}}"#,
        path = serde_json::to_string(&stream_path).unwrap()
    );
    let config = write_config(dir.path(), "c.json", &config_text);
    let output = bin()
        .args(["similarity", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn similarity_values_stay_in_range_for_ar1_source() {
    let dir = tempfile::tempdir().unwrap();
    let config_text = r#"{
  "version": 1,
  "detector": { "kind": "kpca", "kernel": { "kind": "polynomial", "c": 1.0, "degree": 2 } },
  "signal": { "kind": "ar1", "coeff": 0.95 },
  "frame_dim": 8,
  "stride": 1,
  "length": 400,
  "snr_grid_db": [0.0],
  "trials": 60,
  "target_pf": 0.1,
  "base_seed": 11,
  "segment_len": 100
}"#;
    let config = write_config(dir.path(), "c.json", config_text);
    let out = dir.path().join("sims.csv");
    assert!(bin()
        .args(["similarity", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&out).unwrap();
    for line in text.lines() {
        let s: f64 = line.parse().unwrap();
        assert!((0.0..=1.0 + 1e-6).contains(&s), "similarity {s}");
    }
}

#[test]
fn missing_signal_file_fails_at_parse_time() {
    let dir = tempfile::tempdir().unwrap();
    let config_text = r#"{
  "version": 1,
  "detector": { "kind": "pca" },
  "signal": { "kind": "file", "path": "/nonexistent/stream.csv", "format": "csv" },
  "frame_dim": 4,
  "stride": 1,
  "length": 60,
  "snr_grid_db": [0.0],
  "trials": 60,
  "target_pf": 0.1,
  "base_seed": 7
}"#;
    let config = write_config(dir.path(), "c.json", config_text);
    let output = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("does not exist"), "stderr: {stderr}");
}

#[test]
fn calibrate_prints_threshold_matching_harness() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.json",
        &small_config_json(r#"{ "kind": "mme" }"#, ""),
    );
    let output = bin()
        .args(["calibrate", "--config"])
        .arg(&config)
        .args(["--snr", "-3"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let printed: f64 = String::from_utf8_lossy(&output.stdout).trim().parse().unwrap();

    let experiment = ExperimentConfig {
        detector: DetectorSpec::Mme,
        signal: SignalSpec::SinusoidMix {
            freqs: vec![0.1],
            phases: vec![0.0],
        },
        frame_dim: 4,
        stride: 1,
        length: 60,
        snr_grid_db: vec![-5.0, 5.0],
        trials: 60,
        target_pf: 0.1,
        base_seed: 7,
    };
    let expected = specsense::calibrate_threshold(&experiment, -3.0, 0).unwrap();
    assert_eq!(printed.to_bits(), expected.to_bits());
}

#[test]
fn sweep_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let detector =
        r#"{ "kind": "kglrt", "kernel": { "kind": "gaussian_rbf", "sigma": 1.5 } }"#;
    let config = write_config(dir.path(), "c.json", &small_config_json(detector, ""));
    let out1 = dir.path().join("t1.csv");
    let out2 = dir.path().join("t2.csv");
    for (out, threads) in [(&out1, "1"), (&out2, "3")] {
        assert!(bin()
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .args(["--threads", threads])
            .status()
            .unwrap()
            .success());
    }
    assert_eq!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out2).unwrap()
    );
}

#[test]
fn experiment_scale_kpca_config_runs_to_completion() {
    // The d = 128, L = 500, stride 1, polynomial(1, 2), pf = 10% setup at a
    // reduced trial budget; one SNR keeps this test quick.
    let dir = tempfile::tempdir().unwrap();
    let config_text = r#"{
  "version": 1,
  "detector": { "kind": "kpca", "kernel": { "kind": "polynomial", "c": 1.0, "degree": 2 } },
  "signal": { "kind": "sinusoid" },
  "frame_dim": 128,
  "stride": 1,
  "length": 500,
  "snr_grid_db": [-10.0],
  "trials": 50,
  "target_pf": 0.1,
  "base_seed": 1
}"#;
    let config = write_config(dir.path(), "c.json", config_text);
    let out = dir.path().join("sweep.csv");
    assert!(bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("snr_db,threshold,pd,pf"));
    let row = lines.next().unwrap();
    let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields.len(), 4);
    assert_eq!(fields[0], -10.0);
}

#[test]
fn help_exits_zero() {
    let output = bin().arg("--help").output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    for sub in ["sweep", "roc", "similarity", "calibrate"] {
        assert!(stdout.contains(sub), "help missing {sub}");
    }
}
