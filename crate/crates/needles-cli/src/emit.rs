//! Output writers: deterministic CSV files and the JSON run manifest.
//!
//! CSV numerics use 17 significant digits so that files are byte-identical
//! across runs with the same configuration and seed, and round-trip to the
//! exact `f64` that produced them.

use crate::Failure;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Format a float with 17 significant digits (16 digits after the mantissa
/// point), enough to reconstruct the exact bit pattern.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write one CSV file: a header row plus data rows, every numeric cell
/// pre-formatted by the caller.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<PathBuf, Failure> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "{name}: ragged row");
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'a str,
    version: &'a str,
    subcommand: &'a str,
    seed: u64,
    threads: usize,
    wall_time_seconds: f64,
    config: &'a C,
    /// Quantities computed from the configuration (not inputs themselves);
    /// kept out of `config` so a manifest's config block is always a valid
    /// config file section.
    #[serde(skip_serializing_if = "Option::is_none")]
    derived: Option<serde_json::Value>,
    outputs: Vec<String>,
}

/// Write `manifest.json` next to the CSV outputs. `outputs` lists the file
/// names written by the run; `config` is the fully resolved configuration
/// with every default made explicit; `derived` carries run-computed echoes.
pub fn write_manifest<C: Serialize>(
    dir: &Path,
    subcommand: &str,
    seed: u64,
    threads: usize,
    started: Instant,
    config: &C,
    derived: Option<serde_json::Value>,
    outputs: &[PathBuf],
) -> Result<(), Failure> {
    let manifest = Manifest {
        tool: "needles",
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        seed,
        threads,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        config,
        derived,
        outputs: outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned()
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Failure::Validation(format!("manifest serialization: {e}")))?;
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}
