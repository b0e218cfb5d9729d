//! End-to-end tests of the swan binary: exit codes, files on disk,
//! deterministic reruns, and manifests that can rebuild their command.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anyhow::{bail, Context, Result};
use serde_json::Value;
use tempfile::TempDir;

fn swan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swan"))
        .args(args)
        .env_remove("SWAN_WORKERS")
        .output()
        .expect("failed to spawn swan")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_exit(output: &Output, code: i32, what: &str) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "{what}: expected exit {code}, got {:?}\nstderr: {}",
        output.status.code(),
        stderr_of(output)
    );
}

fn repo_path(relative: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(relative)
}

fn spec_arg() -> String {
    repo_path("data/waveguide_sweep.spec").to_str().unwrap().to_string()
}

/// Synthesizes a small on-bin dataset and returns its directory.
fn synth_dataset(grid: &str, frames: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let output = swan(&[
        "synth",
        "--grid",
        grid,
        "--cell",
        "1.5e-9,1.5e-9,10e-9",
        "--frames",
        frames,
        "--dt",
        "1e-11",
        "--wave",
        "1.0,1.25e10,2.618e8,0.1,y",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "synth");
    dir
}

#[test]
fn version_flag_reports_the_tool() {
    let output = swan(&["--version"]);
    assert_exit(&output, 0, "--version");
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.starts_with("swan "), "unexpected version line: {text}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = swan(&["fft", "--no-such-flag"]);
    assert_exit(&output, 2, "unknown flag");
}

#[test]
fn missing_component_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = swan(&["fft", "--dir", dir.path().to_str().unwrap()]);
    assert_exit(&output, 2, "missing --component");
    assert!(stderr_of(&output).contains("--component"));
}

#[test]
fn dry_run_prints_the_sweep_without_writing() {
    let output = swan(&["generate", "--spec", &spec_arg(), "--dry-run"]);
    assert_exit(&output, 0, "dry run");
    let stdout = String::from_utf8_lossy(&output.stdout);
    let names: Vec<&str> = stdout.lines().collect();
    assert_eq!(names.len(), 90, "expected 90 filenames");
    assert!(names.contains(&"e_1000_20_1_1.0e+00_1.0e+11.txt"));
    let unique: std::collections::BTreeSet<&str> = names.iter().copied().collect();
    assert_eq!(unique.len(), 90, "filenames collide");
}

#[test]
fn generate_refuses_overwrites_and_force_reproduces_bytes() -> Result<()> {
    let out = tempfile::tempdir()?;
    let out_arg = out.path().to_str().unwrap();

    let first = swan(&["generate", "--spec", &spec_arg(), "--out", out_arg]);
    assert_exit(&first, 0, "first generate");
    assert_eq!(fs::read_dir(out.path())?.count(), 90);
    let golden_name = "e_1000_20_1_1.0e+00_1.0e+11.txt";
    let golden = fs::read(repo_path("data/golden").join(golden_name))?;
    assert_eq!(fs::read(out.path().join(golden_name))?, golden);

    let probe = out.path().join(golden_name);
    let before = fs::metadata(&probe)?.modified()?;
    let refused = swan(&["generate", "--spec", &spec_arg(), "--out", out_arg]);
    assert_exit(&refused, 1, "overwrite refusal");
    assert!(
        stderr_of(&refused).contains("already exists"),
        "stderr: {}",
        stderr_of(&refused)
    );
    assert_eq!(fs::metadata(&probe)?.modified()?, before, "refusal still wrote");

    let forced = swan(&["generate", "--spec", &spec_arg(), "--out", out_arg, "--force"]);
    assert_exit(&forced, 0, "forced generate");
    assert_eq!(fs::read(out.path().join(golden_name))?, golden);
    Ok(())
}

#[test]
fn fft_writes_csv_and_manifest() -> Result<()> {
    let data = synth_dataset("64,1,1", "32");
    let out = tempfile::tempdir()?;
    let prefix = out.path().join("run");
    let output = swan(&[
        "fft",
        "--dir",
        data.path().to_str().unwrap(),
        "--component",
        "y",
        "--out-prefix",
        prefix.to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "fft");

    let csv = fs::read_to_string(prefix.with_extension("csv"))?;
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("freq_hz,amplitude"));
    assert_eq!(lines.count(), 17, "one-sided bins of 32 snapshots");

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(prefix.with_extension("meta.json"))?)?;
    assert_eq!(manifest["command"], "fft");
    assert_eq!(manifest["component"], "y");
    assert_eq!(manifest["files"], 32);
    assert_eq!(manifest["rows"], 64);
    assert_eq!(manifest["cols"], 32);
    assert_eq!(manifest["dt_seconds"], 1e-11);
    Ok(())
}

#[test]
fn pattern_narrows_the_snapshot_set() -> Result<()> {
    let data = synth_dataset("8,1,1", "32");
    let out = tempfile::tempdir()?;
    let prefix = out.path().join("subset");
    let output = swan(&[
        "fft",
        "--dir",
        data.path().to_str().unwrap(),
        "--pattern",
        "m00000*.ovf",
        "--component",
        "y",
        "--out-prefix",
        prefix.to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "fft with pattern");
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(prefix.with_extension("meta.json"))?)?;
    assert_eq!(manifest["files"], 10, "m000000..m000009");
    assert_eq!(manifest["cols"], 10);
    Ok(())
}

#[test]
fn roi_nm_converts_positions_to_cell_indices() -> Result<()> {
    let data = synth_dataset("8,1,1", "8");
    let out = tempfile::tempdir()?;
    let prefix = out.path().join("roi");
    // Cells are 1.5 nm wide with centers at 0.75, 2.25, 3.75, ... nm, so
    // 3:9 nm covers the cells whose origins floor to indices 1 through 4.
    let output = swan(&[
        "fft",
        "--dir",
        data.path().to_str().unwrap(),
        "--component",
        "y",
        "--roi-nm",
        "3:9",
        "--out-prefix",
        prefix.to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "fft with --roi-nm");
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(prefix.with_extension("meta.json"))?)?;
    assert_eq!(manifest["rows"], 4, "nm window should keep 4 cells");
    Ok(())
}

#[test]
fn roi_and_roi_nm_on_the_same_axis_conflict() {
    let data = synth_dataset("8,1,1", "4");
    let output = swan(&[
        "fft",
        "--dir",
        data.path().to_str().unwrap(),
        "--component",
        "y",
        "--roi",
        ",0:4",
        "--roi-nm",
        "3:9",
    ]);
    assert_exit(&output, 2, "conflicting ROI flags");
    assert!(
        stderr_of(&output).contains("x axis"),
        "stderr: {}",
        stderr_of(&output)
    );
}

#[test]
fn dispersion_needs_at_least_two_columns() {
    let data = synth_dataset("1,4,1", "8");
    let output = swan(&[
        "dispersion",
        "--dir",
        data.path().to_str().unwrap(),
        "--component",
        "y",
    ]);
    assert_exit(&output, 1, "single-column dispersion");
    assert!(
        stderr_of(&output).contains("DegenerateSpace"),
        "stderr: {}",
        stderr_of(&output)
    );
}

#[test]
fn dispersion_outputs_are_deterministic() -> Result<()> {
    let data = synth_dataset("16,2,1", "16");
    let out = tempfile::tempdir()?;
    let mut artifacts: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    for run in 0..2 {
        let prefix = out.path().join(format!("run{run}"));
        let output = swan(&[
            "dispersion",
            "--dir",
            data.path().to_str().unwrap(),
            "--component",
            "y",
            "--window",
            "chebyshev",
            "--attenuation",
            "90",
            "--detrend",
            "mean",
            "--image",
            "--scale",
            "log",
            "--out-prefix",
            prefix.to_str().unwrap(),
        ]);
        assert_exit(&output, 0, "dispersion");
        artifacts.push((
            fs::read(prefix.with_extension("csv"))?,
            fs::read(prefix.with_extension("pgm"))?,
        ));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "CSV differs between reruns");
    assert_eq!(artifacts[0].1, artifacts[1].1, "PGM differs between reruns");

    let pgm = &artifacts[0].1;
    let header = format!("P5\n{} {}\n255\n", 16, 16 / 2 + 1);
    assert!(
        pgm.starts_with(header.as_bytes()),
        "PGM header mismatch: {:?}",
        &pgm[..header.len().min(pgm.len())]
    );
    assert_eq!(pgm.len(), header.len() + 16 * 9, "PGM payload size");
    Ok(())
}

fn push_opt(argv: &mut Vec<String>, flag: &str, value: &Value) {
    match value {
        Value::Null => {}
        Value::String(s) => {
            argv.push(flag.to_string());
            argv.push(s.clone());
        }
        Value::Number(n) => {
            argv.push(flag.to_string());
            argv.push(n.to_string());
        }
        other => panic!("{flag}: unexpected manifest value {other}"),
    }
}

/// Rebuilds the argv of a spectrum run from its manifest.
fn argv_from_manifest(manifest: &Value, prefix: &Path) -> Result<Vec<String>> {
    let command = manifest["command"]
        .as_str()
        .context("manifest lacks a command")?;
    if command != "spectrum" {
        bail!("this helper only rebuilds spectrum runs, got {command}");
    }
    let mut argv = vec![
        command.to_string(),
        "--dir".into(),
        manifest["dir"].as_str().context("dir")?.to_string(),
        "--pattern".into(),
        manifest["pattern"].as_str().context("pattern")?.to_string(),
        "--component".into(),
        manifest["component"].as_str().context("component")?.to_string(),
        "--workers".into(),
        manifest["workers"].to_string(),
        "--detrend".into(),
        manifest["detrend"].as_str().context("detrend")?.to_string(),
    ];
    push_opt(&mut argv, "--dt", &manifest["dt_flag"]);
    push_opt(&mut argv, "--roi", &manifest["roi"]);
    push_opt(&mut argv, "--roi-nm", &manifest["roi_nm"]);
    push_opt(&mut argv, "--pad-to", &manifest["pad_to"]);
    push_opt(&mut argv, "--power-scale", &manifest["power_scale"]);
    push_opt(&mut argv, "--scale", &manifest["scale"]);
    if manifest["image"].as_bool().unwrap_or(false) {
        argv.push("--image".into());
    }
    argv.push("--out-prefix".into());
    argv.push(prefix.to_str().unwrap().to_string());
    Ok(argv)
}

#[test]
fn manifest_rebuilds_an_identical_spectrum_run() -> Result<()> {
    let data = synth_dataset("12,2,1", "24");
    let out = tempfile::tempdir()?;
    let first_prefix = out.path().join("first");
    let output = swan(&[
        "spectrum",
        "--dir",
        data.path().to_str().unwrap(),
        "--component",
        "y",
        "--roi",
        "4:20,2:10",
        "--detrend",
        "mean",
        "--pad-to",
        "32",
        "--power-scale",
        "power",
        "--image",
        "--out-prefix",
        first_prefix.to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "first spectrum run");

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(first_prefix.with_extension("meta.json"))?)?;
    assert_eq!(manifest["tool"], "swan");
    assert_eq!(manifest["rows"], 8 * 2, "x range 2:10 by 2 y cells");

    let second_prefix = out.path().join("second");
    let argv = argv_from_manifest(&manifest, &second_prefix)?;
    let argv_refs: Vec<&str> = argv.iter().map(String::as_str).collect();
    let rerun = swan(&argv_refs);
    assert_exit(&rerun, 0, "rebuilt spectrum run");

    let first_csv = fs::read(first_prefix.with_extension("csv"))?;
    assert_eq!(first_csv, fs::read(second_prefix.with_extension("csv"))?);
    assert_eq!(
        fs::read(first_prefix.with_extension("pgm"))?,
        fs::read(second_prefix.with_extension("pgm"))?
    );
    let first_line = first_csv.split(|&b| b == b'\n').next().unwrap();
    assert_eq!(first_line, b"x_m,freq_hz,power");
    Ok(())
}

#[test]
fn db_power_scale_rejects_log_images() {
    let data = synth_dataset("8,1,1", "8");
    let output = swan(&[
        "spectrum",
        "--dir",
        data.path().to_str().unwrap(),
        "--component",
        "y",
        "--power-scale",
        "db",
        "--image",
        "--scale",
        "log",
    ]);
    assert_exit(&output, 2, "db + log image");
}

#[test]
fn missing_dataset_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = swan(&[
        "fft",
        "--dir",
        dir.path().to_str().unwrap(),
        "--component",
        "y",
    ]);
    assert_exit(&output, 1, "empty directory");
    let err = stderr_of(&output);
    assert!(err.contains("swan:"), "diagnostic not prefixed: {err}");
}
