//! End-to-end checks of the command-line interface: each subcommand runs on
//! small inputs, writes its documented artifacts plus a manifest, and fails
//! with a nonzero exit code on bad input.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uwb-ranging"))
}

fn small_scene_toml() -> String {
    r#"
name = "mini"
seed = 5

[geometry]
radios = [[0.5, 0.5], [5.5, 0.5], [5.5, 4.5], [0.5, 4.5]]
links = [[0, 1], [1, 2], [2, 3]]
person_points = [[3.0, 2.5], [2.1, 1.8]]
room = [0.0, 0.0, 6.0, 5.0]
bin_width_ns = 1.0
n_bins = 24

[clutter]
path_count = 40
decay_constant = 1.8e-8
path_amplitude_scale = 1.0
noise_std = 0.2
person_path_gain = 0.6
person_tail_perturbation = 0.35
integration_factor = 1
guard_bins = 6
"#
    .to_string()
}

fn assert_success(cmd: &mut Command) -> String {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_outputs(dir: &Path, names: &[&str]) {
    for name in names {
        assert!(
            dir.join(name).exists(),
            "{name} missing in {}",
            dir.display()
        );
    }
    assert!(dir.join("manifest.json").exists(), "manifest missing");
}

#[test]
fn simulate_writes_trace_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("mini.toml");
    std::fs::write(&scene, small_scene_toml()).unwrap();
    let out = tmp.path().join("sim");
    assert_success(bin().args([
        "simulate",
        "--scene",
        scene.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--static-count",
        "3",
        "--person-count",
        "3",
    ]));
    assert_outputs(
        &out,
        &["static.csv", "person_point_0.csv", "person_point_1.csv"],
    );
    let header = std::fs::read_to_string(out.join("static.csv")).unwrap();
    assert!(header.starts_with("link,realization,bin,energy"));
}

#[test]
fn observe_train_estimate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("mini.toml");
    std::fs::write(&scene, small_scene_toml()).unwrap();
    let obs_dir = tmp.path().join("obs");
    assert_success(bin().args([
        "observe",
        "--scene",
        scene.to_str().unwrap(),
        "--out",
        obs_dir.to_str().unwrap(),
        "--calibration",
        "6",
        "--test",
        "6",
    ]));
    assert_outputs(&obs_dir, &["observations.csv", "truth.csv"]);
    let header = std::fs::read_to_string(obs_dir.join("observations.csv")).unwrap();
    assert!(header.starts_with("point,link,bin,value"));

    let train_dir = tmp.path().join("train");
    assert_success(bin().args([
        "train",
        "--scene",
        scene.to_str().unwrap(),
        "--out",
        train_dir.to_str().unwrap(),
        "--calibration",
        "6",
        "--test",
        "6",
    ]));
    assert_outputs(&train_dir, &["params.toml"]);

    let est_dir = tmp.path().join("est");
    assert_success(bin().args([
        "estimate",
        "--params",
        train_dir.join("params.toml").to_str().unwrap(),
        "--obs",
        obs_dir.join("observations.csv").to_str().unwrap(),
        "--out",
        est_dir.to_str().unwrap(),
    ]));
    assert_outputs(&est_dir, &["estimates.csv", "posteriors.csv"]);
    // Six observation vectors (2 points x 3 links) -> six estimate rows.
    let estimates = std::fs::read_to_string(est_dir.join("estimates.csv")).unwrap();
    assert_eq!(estimates.lines().count(), 1 + 6);
}

#[test]
fn report_runs_presets_and_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("report");
    let stdout = assert_success(bin().args([
        "report",
        "--train",
        "room-a",
        "--test",
        "room-b",
        "--method",
        "hmm",
        "--calibration",
        "5",
        "--test-count",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(stdout.contains("hmm"), "stdout: {stdout}");
    assert_outputs(
        &out,
        &[
            "outcomes.csv",
            "bw_trajectory.csv",
            "params_init.toml",
            "params_refined.toml",
            "summary.json",
        ],
    );
}

#[test]
fn sweep_writes_both_room_sweeps() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("mini.toml");
    std::fs::write(&scene, small_scene_toml()).unwrap();
    let out = tmp.path().join("sweep");
    assert_success(bin().args([
        "sweep",
        "--train",
        scene.to_str().unwrap(),
        "--test",
        "room-a",
        "--calibration",
        "5",
        "--test-count",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_outputs(&out, &["sweep_train.csv", "sweep_test.csv", "outcomes.csv"]);
    let sweep = std::fs::read_to_string(out.join("sweep_train.csv")).unwrap();
    assert!(sweep.starts_with("gamma,rmse,fn_count"));
}

#[test]
fn fp_trials_reports_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("mini.toml");
    std::fs::write(&scene, small_scene_toml()).unwrap();
    let out = tmp.path().join("fp");
    let stdout = assert_success(bin().args([
        "fp-trials",
        "--scene",
        scene.to_str().unwrap(),
        "--trials",
        "50",
        "--pool",
        "12",
        "--calibration",
        "5",
        "--test",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(stdout.contains("fp_rate"), "stdout: {stdout}");
    assert_outputs(&out, &["fp_trials.json"]);
}

#[test]
fn localize_writes_tables_and_images() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("mini.toml");
    std::fs::write(&scene, small_scene_toml()).unwrap();
    let out = tmp.path().join("loc");
    assert_success(bin().args([
        "localize",
        "--scene",
        scene.to_str().unwrap(),
        "--calibration",
        "5",
        "--test",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_outputs(
        &out,
        &[
            "localization.csv",
            "localization_summary.json",
            "image_point_0_raw.csv",
            "image_point_0_normalized.csv",
        ],
    );
    // Normalized image values stay in [0, 1].
    let img = std::fs::read_to_string(out.join("image_point_0_normalized.csv")).unwrap();
    for value in img.split([',', '\n']).filter(|s| !s.is_empty()) {
        let v: f64 = value.parse().unwrap();
        assert!(
            (0.0..=1.0).contains(&v),
            "normalized value {v} out of range"
        );
    }
}

#[test]
fn windows_study_runs_on_small_blocks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("win");
    let stdout = assert_success(bin().args([
        "windows",
        "--scene",
        "through-wall",
        "--train",
        "room-a",
        "--subset-size",
        "10",
        "--block-len",
        "12",
        "--blocks",
        "2",
        "--test",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(stdout.contains("windows"), "stdout: {stdout}");
    assert_outputs(&out, &["window_rmse_cdf.csv"]);
}

#[test]
fn bad_inputs_exit_nonzero() {
    let out = bin()
        .args([
            "report",
            "--train",
            "no-such-scene",
            "--test",
            "room-a",
            "--out",
            "/tmp/x",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = bin()
        .args([
            "report", "--train", "room-a", "--test", "room-b", "--method", "bogus", "--out",
            "/tmp/x",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());

    // Sample counts below two are rejected.
    let out = bin()
        .args([
            "report",
            "--train",
            "room-a",
            "--test",
            "room-b",
            "--calibration",
            "1",
            "--out",
            "/tmp/x",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
