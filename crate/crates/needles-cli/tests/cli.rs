//! Black-box tests of the `needles` binary: exit codes, determinism,
//! config-file handling, and manifest round-tripping.

use std::path::Path;
use std::process::{Command, Output};

fn needles() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_needles"));
    // Tests must not inherit an ambient thread setting.
    cmd.env_remove("NEEDLES_THREADS");
    cmd
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = needles().arg(flag).output().expect("spawn");
        assert_eq!(out.status.code(), Some(0), "{flag} must exit 0");
    }
    let out = needles()
        .args(["simulate", "--help"])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn same_config_and_seed_is_byte_identical() {
    let a = tempfile::tempdir().expect("tempdir");
    let b = tempfile::tempdir().expect("tempdir");
    let args = |dir: &Path| {
        vec![
            "simulate".to_string(),
            "--n".to_string(),
            "12".to_string(),
            "--t-end".to_string(),
            "0.05".to_string(),
            "--dt".to_string(),
            "1e-3".to_string(),
            "--observe-every".to_string(),
            "10".to_string(),
            "--seed".to_string(),
            "42".to_string(),
            "--out".to_string(),
            dir.to_string_lossy().into_owned(),
        ]
    };
    for dir in [a.path(), b.path()] {
        let out = needles().args(args(dir)).output().expect("spawn");
        assert_success(&out);
    }
    for name in ["observables.csv", "angular_histograms.csv"] {
        assert_eq!(
            read(a.path(), name),
            read(b.path(), name),
            "{name} must be byte-identical for identical config and seed"
        );
    }
}

#[test]
fn different_seed_changes_the_stochastic_output() {
    let a = tempfile::tempdir().expect("tempdir");
    let b = tempfile::tempdir().expect("tempdir");
    for (dir, seed) in [(a.path(), "1"), (b.path(), "2")] {
        let out = needles()
            .args([
                "simulate",
                "--n",
                "12",
                "--t-end",
                "0.05",
                "--dt",
                "1e-3",
                "--observe-every",
                "10",
                "--seed",
                seed,
                "--out",
                &dir.to_string_lossy(),
            ])
            .output()
            .expect("spawn");
        assert_success(&out);
    }
    assert_ne!(
        read(a.path(), "observables.csv"),
        read(b.path(), "observables.csv"),
        "different seeds must produce different trajectories"
    );
}

/// The manifest echoes the fully resolved configuration; feeding that
/// configuration back through a file must reproduce the run exactly.
#[test]
fn manifest_config_round_trips() {
    let first = tempfile::tempdir().expect("tempdir");
    let out = needles()
        .args([
            "mkv-evolve",
            "--m",
            "32",
            "--t-end",
            "0.5",
            "--phi",
            "5.0",
            "--record",
            "0,0.25,0.5",
            "--out",
            &first.path().to_string_lossy(),
        ])
        .output()
        .expect("spawn");
    assert_success(&out);

    let manifest: serde_json::Value =
        serde_json::from_slice(&read(first.path(), "manifest.json")).expect("manifest JSON");
    let config = manifest["config"].clone();
    let body = toml::to_string(&config).expect("config → TOML");
    let file_text = format!("[mkv-evolve]\n{body}");

    let second = tempfile::tempdir().expect("tempdir");
    let config_path = second.path().join("run.toml");
    std::fs::write(&config_path, file_text).expect("write config");
    let out = needles()
        .args([
            "mkv-evolve",
            "--config",
            &config_path.to_string_lossy(),
            "--out",
            &second.path().to_string_lossy(),
        ])
        .output()
        .expect("spawn");
    assert_success(&out);

    let manifest2: serde_json::Value =
        serde_json::from_slice(&read(second.path(), "manifest.json")).expect("manifest JSON");
    assert_eq!(
        manifest["config"], manifest2["config"],
        "resolved config must survive the manifest → file → resolve cycle"
    );
    assert_eq!(
        read(first.path(), "fig3b.csv"),
        read(second.path(), "fig3b.csv"),
        "round-tripped config must reproduce the output bytes"
    );
}

/// Same round trip for pde3d, whose manifest must carry the concrete time
/// step even when the run resolved it from the solver default.
#[test]
fn pde3d_manifest_resolves_dt_and_round_trips() {
    let first = tempfile::tempdir().expect("tempdir");
    let out = needles()
        .args([
            "pde3d",
            "--nx",
            "8",
            "--ny",
            "8",
            "--mt",
            "8",
            "--t-end",
            "0.004",
            "--records",
            "2",
            "--out",
            &first.path().to_string_lossy(),
        ])
        .output()
        .expect("spawn");
    assert_success(&out);

    let manifest: serde_json::Value =
        serde_json::from_slice(&read(first.path(), "manifest.json")).expect("manifest JSON");
    let dt = manifest["config"]["dt"]
        .as_f64()
        .expect("dt must be a concrete number");
    assert!(dt > 0.0);

    let body = toml::to_string(&manifest["config"]).expect("config → TOML");
    let second = tempfile::tempdir().expect("tempdir");
    let config_path = second.path().join("run.toml");
    std::fs::write(&config_path, format!("[pde3d]\n{body}")).expect("write config");
    let out = needles()
        .args([
            "pde3d",
            "--config",
            &config_path.to_string_lossy(),
            "--out",
            &second.path().to_string_lossy(),
        ])
        .output()
        .expect("spawn");
    assert_success(&out);

    let manifest2: serde_json::Value =
        serde_json::from_slice(&read(second.path(), "manifest.json")).expect("manifest JSON");
    assert_eq!(manifest["config"], manifest2["config"]);
    for name in ["summary.csv", "rho_final.csv", "theta_final.csv"] {
        assert_eq!(
            read(first.path(), name),
            read(second.path(), name),
            "{name}"
        );
    }
}

#[test]
fn invalid_parameter_exits_one_and_names_the_field() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = needles()
        .args([
            "mkv-evolve",
            "--phi",
            "-1",
            "--out",
            &dir.path().to_string_lossy(),
        ])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("phi"),
        "stderr must name the offending field: {stderr}"
    );
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config_path = dir.path().join("bad.toml");
    std::fs::write(&config_path, "[stability]\nn_max = 3\nbogus_knob = 7\n").expect("write");
    let out = needles()
        .args([
            "stability",
            "--config",
            &config_path.to_string_lossy(),
            "--out",
            &dir.path().to_string_lossy(),
        ])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("bogus_knob"),
        "stderr must name the unknown key: {stderr}"
    );
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    // A step four orders beyond stability limits drives the explicit
    // collision flux into negativity, which the solver reports rather than
    // silently propagating.
    let out = needles()
        .args([
            "pde3d",
            "--nx",
            "8",
            "--ny",
            "8",
            "--mt",
            "8",
            "--dt",
            "10",
            "--t-end",
            "20",
            "--out",
            &dir.path().to_string_lossy(),
        ])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("numerical failure"),
        "stderr must flag the numerical failure channel: {stderr}"
    );
}

#[test]
fn bad_thread_count_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = needles()
        .env("NEEDLES_THREADS", "zero?")
        .args(["stability", "--out", &dir.path().to_string_lossy()])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("NEEDLES_THREADS"), "stderr: {stderr}");
}

#[test]
fn manifest_reports_run_metadata() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = needles()
        .env("NEEDLES_THREADS", "2")
        .args([
            "tmatrix",
            "--points",
            "16",
            "--seed",
            "9",
            "--out",
            &dir.path().to_string_lossy(),
        ])
        .output()
        .expect("spawn");
    assert_success(&out);
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(dir.path(), "manifest.json")).expect("manifest JSON");
    assert_eq!(manifest["tool"], "needles");
    assert_eq!(manifest["subcommand"], "tmatrix");
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["threads"], 2);
    assert_eq!(manifest["config"]["points"], 16);
    assert!(manifest["wall_time_seconds"].as_f64().expect("wall time") >= 0.0);
    let outputs: Vec<&str> = manifest["outputs"]
        .as_array()
        .expect("outputs")
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(outputs, ["fig2.csv", "tmatrix.csv"]);
}
