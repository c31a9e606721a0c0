//! Configuration model: clap definitions, the TOML file schema, and the
//! fully resolved per-subcommand configurations that are echoed into run
//! manifests.
//!
//! Resolution order for every parameter: command-line flag, then config
//! file, then the documented default. Unknown keys in the file are
//! rejected. The resolved structs serialize every value — including
//! defaults — so a manifest never hides a constant.

use crate::Failure;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::PathBuf;

/// Default occupied fraction for the mean-field subcommands: 10% above the
/// isotropic–nematic threshold 3π/2, inside the nematic regime.
fn default_phi() -> f64 {
    1.1 * 1.5 * PI
}

#[derive(Parser)]
#[command(
    name = "needles",
    version,
    about = "Numerical toolkit for Brownian hard needles in two dimensions"
)]
pub struct Cli {
    /// TOML configuration file; command-line flags override file values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for CSV files and the run manifest.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for every stochastic component of a run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Tabulate the pair-response matrix T(θ̃) and its conformal scale
    /// constant over a grid of relative angles.
    Tmatrix(TmatrixArgs),
    /// Run the particle-level stochastic simulation and record observables.
    Simulate(SimulateArgs),
    /// Evolve the space-homogeneous mean-field orientation density.
    MkvEvolve(MkvEvolveArgs),
    /// Solve for stationary orientation profiles (optionally a sweep in φ).
    MkvStationary(MkvStationaryArgs),
    /// Tabulate linear growth rates of orientation modes around the
    /// uniform state.
    Stability(StabilityArgs),
    /// Evolve the full position–orientation density in 2+1 dimensions.
    Pde3d(Pde3dArgs),
    /// Evolve the crowding-diffusion equation for the spatial density and
    /// compare the needle and effective-disk operators.
    Hydro(HydroArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tmatrix(_) => "tmatrix",
            Command::Simulate(_) => "simulate",
            Command::MkvEvolve(_) => "mkv-evolve",
            Command::MkvStationary(_) => "mkv-stationary",
            Command::Stability(_) => "stability",
            Command::Pde3d(_) => "pde3d",
            Command::Hydro(_) => "hydro",
        }
    }
}

// ---------------------------------------------------------------------------
// Config file schema. Every block mirrors a subcommand; all fields optional.
// ---------------------------------------------------------------------------

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub output: OutputFile,
    #[serde(default)]
    pub tmatrix: TmatrixFile,
    #[serde(default)]
    pub simulate: SimulateFile,
    #[serde(default, rename = "mkv-evolve")]
    pub mkv_evolve: MkvEvolveFile,
    #[serde(default, rename = "mkv-stationary")]
    pub mkv_stationary: MkvStationaryFile,
    #[serde(default)]
    pub stability: StabilityFile,
    #[serde(default)]
    pub pde3d: Pde3dFile,
    #[serde(default)]
    pub hydro: HydroFile,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::Validation(format!("config {}: {e}", path.display())))
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputFile {
    pub dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

// ---------------------------------------------------------------------------
// tmatrix
// ---------------------------------------------------------------------------

#[derive(Args, Default)]
#[command(allow_negative_numbers = true)]
pub struct TmatrixArgs {
    /// Number of relative angles sampled in (0, π).
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TmatrixFile {
    pub points: Option<usize>,
}

#[derive(Serialize, Clone, Debug)]
pub struct TmatrixConfig {
    pub points: usize,
}

impl TmatrixConfig {
    pub fn resolve(args: &TmatrixArgs, file: &TmatrixFile) -> Result<Self, Failure> {
        let cfg = TmatrixConfig {
            points: args.points.or(file.points).unwrap_or(200),
        };
        if cfg.points < 2 {
            return Err(Failure::Validation(format!(
                "points: need at least 2 angles, got {}",
                cfg.points
            )));
        }
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Args, Default)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    /// Number of needles.
    #[arg(long)]
    pub n: Option<usize>,
    /// Needle length.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Translational diffusion coefficient.
    #[arg(long)]
    pub d_t: Option<f64>,
    /// Rotational diffusion coefficient.
    #[arg(long)]
    pub d_r: Option<f64>,
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Box period in x.
    #[arg(long)]
    pub lx: Option<f64>,
    /// Box period in y.
    #[arg(long)]
    pub ly: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Record observables every this many steps.
    #[arg(long)]
    pub observe_every: Option<usize>,
    /// Initial sampler: "rejection" (exact admissible product measure) or
    /// "sequential" (insertion, reaches dense packings).
    #[arg(long)]
    pub init: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub d_t: Option<f64>,
    pub d_r: Option<f64>,
    pub dt: Option<f64>,
    pub lx: Option<f64>,
    pub ly: Option<f64>,
    pub t_end: Option<f64>,
    pub observe_every: Option<usize>,
    pub init: Option<String>,
}

#[derive(Serialize, Clone, Debug)]
pub struct SimulateConfig {
    pub n: usize,
    pub eps: f64,
    pub d_t: f64,
    pub d_r: f64,
    pub dt: f64,
    pub lx: f64,
    pub ly: f64,
    pub t_end: f64,
    pub observe_every: usize,
    pub init: String,
}

impl SimulateConfig {
    pub fn resolve(args: &SimulateArgs, file: &SimulateFile) -> Result<Self, Failure> {
        let cfg = SimulateConfig {
            n: args.n.or(file.n).unwrap_or(50),
            eps: args.eps.or(file.eps).unwrap_or(0.1),
            d_t: args.d_t.or(file.d_t).unwrap_or(1.0),
            d_r: args.d_r.or(file.d_r).unwrap_or(1.0),
            // Keeps the translational step √(2 D_T dt) below eps/4 at the
            // default eps and D_T, so near-contact dynamics stay resolved.
            dt: args.dt.or(file.dt).unwrap_or(1e-4),
            lx: args.lx.or(file.lx).unwrap_or(1.0),
            ly: args.ly.or(file.ly).unwrap_or(1.0),
            t_end: args.t_end.or(file.t_end).unwrap_or(10.0),
            observe_every: args.observe_every.or(file.observe_every).unwrap_or(100),
            init: args
                .init
                .clone()
                .or_else(|| file.init.clone())
                .unwrap_or_else(|| "rejection".to_string()),
        };
        if cfg.init != "rejection" && cfg.init != "sequential" {
            return Err(Failure::Validation(format!(
                "init: expected \"rejection\" or \"sequential\", got \"{}\"",
                cfg.init
            )));
        }
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// mkv-evolve
// ---------------------------------------------------------------------------

#[derive(Args, Default)]
#[command(allow_negative_numbers = true)]
pub struct MkvEvolveArgs {
    /// Angular grid size (even).
    #[arg(long)]
    pub m: Option<usize>,
    /// Occupied fraction φ.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Rotational diffusion coefficient.
    #[arg(long)]
    pub d_r: Option<f64>,
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Amplitude of the initial cosine perturbation around the uniform
    /// density (may be negative).
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Perturbed orientation mode number.
    #[arg(long)]
    pub mode: Option<u32>,
    /// Profile recording times (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub record: Option<Vec<f64>>,
    /// Output CSV file name.
    #[arg(long)]
    pub file: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MkvEvolveFile {
    pub m: Option<usize>,
    pub phi: Option<f64>,
    pub d_r: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub amplitude: Option<f64>,
    pub mode: Option<u32>,
    pub record: Option<Vec<f64>>,
    pub file: Option<String>,
}

#[derive(Serialize, Clone, Debug)]
pub struct MkvEvolveConfig {
    pub m: usize,
    pub phi: f64,
    pub d_r: f64,
    pub dt: f64,
    pub t_end: f64,
    pub amplitude: f64,
    pub mode: u32,
    pub record: Vec<f64>,
    pub file: String,
}

impl MkvEvolveConfig {
    pub fn resolve(args: &MkvEvolveArgs, file: &MkvEvolveFile) -> Result<Self, Failure> {
        Ok(MkvEvolveConfig {
            m: args.m.or(file.m).unwrap_or(256),
            phi: args.phi.or(file.phi).unwrap_or_else(default_phi),
            d_r: args.d_r.or(file.d_r).unwrap_or(1.0),
            dt: args.dt.or(file.dt).unwrap_or(1e-3),
            t_end: args.t_end.or(file.t_end).unwrap_or(20.0),
            amplitude: args.amplitude.or(file.amplitude).unwrap_or(-0.01),
            mode: args.mode.or(file.mode).unwrap_or(1),
            record: args
                .record
                .clone()
                .or_else(|| file.record.clone())
                .unwrap_or_else(|| vec![0.0, 4.0, 6.0, 8.0, 10.0, 12.0, 20.0]),
            file: args
                .file
                .clone()
                .or_else(|| file.file.clone())
                .unwrap_or_else(|| "fig3b.csv".to_string()),
        })
    }
}

// ---------------------------------------------------------------------------
// mkv-stationary
// ---------------------------------------------------------------------------

#[derive(Args, Default)]
#[command(allow_negative_numbers = true)]
pub struct MkvStationaryArgs {
    /// Angular grid size (even).
    #[arg(long)]
    pub m: Option<usize>,
    /// Occupied fraction φ (single-profile mode).
    #[arg(long)]
    pub phi: Option<f64>,
    /// Sup-norm update tolerance of the fixed-point iteration.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Amplitude of the nematic seed for the iteration.
    #[arg(long)]
    pub seed_amplitude: Option<f64>,
    /// Sweep φ = 3π/2 + k/2 for k = 0..10 instead of a single profile.
    #[arg(long)]
    pub sweep: bool,
    /// Output CSV file name.
    #[arg(long)]
    pub file: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MkvStationaryFile {
    pub m: Option<usize>,
    pub phi: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed_amplitude: Option<f64>,
    pub sweep: Option<bool>,
    pub file: Option<String>,
}

#[derive(Serialize, Clone, Debug)]
pub struct MkvStationaryConfig {
    pub m: usize,
    pub phi: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed_amplitude: f64,
    pub sweep: bool,
    pub file: String,
}

impl MkvStationaryConfig {
    pub fn resolve(args: &MkvStationaryArgs, file: &MkvStationaryFile) -> Result<Self, Failure> {
        let sweep = args.sweep || file.sweep.unwrap_or(false);
        Ok(MkvStationaryConfig {
            m: args.m.or(file.m).unwrap_or(256),
            phi: args.phi.or(file.phi).unwrap_or_else(default_phi),
            tol: args.tol.or(file.tol).unwrap_or(1e-12),
            max_iter: args.max_iter.or(file.max_iter).unwrap_or(100_000),
            seed_amplitude: args.seed_amplitude.or(file.seed_amplitude).unwrap_or(0.1),
            sweep,
            file: args
                .file
                .clone()
                .or_else(|| file.file.clone())
                .unwrap_or_else(|| {
                    if sweep {
                        "fig3a.csv".to_string()
                    } else {
                        "stationary.csv".to_string()
                    }
                }),
        })
    }

    /// φ values the run solves: either the single `phi`, or the sweep
    /// `3π/2 + k/2` for `k = 0..=10` across the ordering transition.
    pub fn phis(&self) -> Vec<f64> {
        if self.sweep {
            (0..=10).map(|k| 1.5 * PI + 0.5 * k as f64).collect()
        } else {
            vec![self.phi]
        }
    }
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

#[derive(Args, Default)]
#[command(allow_negative_numbers = true)]
pub struct StabilityArgs {
    /// Highest orientation mode tabulated.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Lower end of the φ range.
    #[arg(long)]
    pub phi_min: Option<f64>,
    /// Upper end of the φ range.
    #[arg(long)]
    pub phi_max: Option<f64>,
    /// Number of φ samples.
    #[arg(long)]
    pub points: Option<usize>,
    /// Rotational diffusion coefficient.
    #[arg(long)]
    pub d_r: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct StabilityFile {
    pub n_max: Option<u32>,
    pub phi_min: Option<f64>,
    pub phi_max: Option<f64>,
    pub points: Option<usize>,
    pub d_r: Option<f64>,
}

#[derive(Serialize, Clone, Debug)]
pub struct StabilityConfig {
    pub n_max: u32,
    pub phi_min: f64,
    pub phi_max: f64,
    pub points: usize,
    pub d_r: f64,
}

impl StabilityConfig {
    pub fn resolve(args: &StabilityArgs, file: &StabilityFile) -> Result<Self, Failure> {
        let cfg = StabilityConfig {
            n_max: args.n_max.or(file.n_max).unwrap_or(4),
            phi_min: args.phi_min.or(file.phi_min).unwrap_or(0.0),
            phi_max: args.phi_max.or(file.phi_max).unwrap_or(3.0 * PI),
            points: args.points.or(file.points).unwrap_or(101),
            d_r: args.d_r.or(file.d_r).unwrap_or(1.0),
        };
        if cfg.n_max == 0 {
            return Err(Failure::Validation(
                "n_max: need at least mode 1".to_string(),
            ));
        }
        if cfg.points < 2 {
            return Err(Failure::Validation(format!(
                "points: need at least 2 φ samples, got {}",
                cfg.points
            )));
        }
        if !(cfg.phi_max > cfg.phi_min) {
            return Err(Failure::Validation(format!(
                "phi_max: must exceed phi_min, got [{}, {}]",
                cfg.phi_min, cfg.phi_max
            )));
        }
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// pde3d
// ---------------------------------------------------------------------------

#[derive(Args, Default)]
#[command(allow_negative_numbers = true)]
pub struct Pde3dArgs {
    /// Spatial grid size in x.
    #[arg(long)]
    pub nx: Option<usize>,
    /// Spatial grid size in y.
    #[arg(long)]
    pub ny: Option<usize>,
    /// Angular grid size (even).
    #[arg(long)]
    pub mt: Option<usize>,
    /// Box period in x.
    #[arg(long)]
    pub lx: Option<f64>,
    /// Box period in y.
    #[arg(long)]
    pub ly: Option<f64>,
    /// Translational diffusion coefficient.
    #[arg(long)]
    pub d_t: Option<f64>,
    /// Rotational diffusion coefficient.
    #[arg(long)]
    pub d_r: Option<f64>,
    /// Occupied fraction φ.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Time step (defaults to the solver's stability-derived step).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Interpolation nodes for the pair-response table.
    #[arg(long)]
    pub table_size: Option<usize>,
    /// Amplitude of the initial cosine modulation in x.
    #[arg(long)]
    pub amp_x: Option<f64>,
    /// Amplitude of the initial cosine modulation in y.
    #[arg(long)]
    pub amp_y: Option<f64>,
    /// Amplitude of the initial orientation-cosine modulation.
    #[arg(long)]
    pub amp_theta: Option<f64>,
    /// Number of evenly spaced recording times (including 0 and t_end).
    #[arg(long)]
    pub records: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Pde3dFile {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub mt: Option<usize>,
    pub lx: Option<f64>,
    pub ly: Option<f64>,
    pub d_t: Option<f64>,
    pub d_r: Option<f64>,
    pub phi: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub table_size: Option<usize>,
    pub amp_x: Option<f64>,
    pub amp_y: Option<f64>,
    pub amp_theta: Option<f64>,
    pub records: Option<usize>,
}

#[derive(Serialize, Clone, Debug)]
pub struct Pde3dConfig {
    pub nx: usize,
    pub ny: usize,
    pub mt: usize,
    pub lx: f64,
    pub ly: f64,
    pub d_t: f64,
    pub d_r: f64,
    pub phi: f64,
    /// Time step. Left unset it resolves to the solver's stability-derived
    /// default once the grid exists; the run fills the concrete value in
    /// before the manifest is written, so the manifest always carries a
    /// number.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub table_size: usize,
    pub amp_x: f64,
    pub amp_y: f64,
    pub amp_theta: f64,
    pub records: usize,
}

impl Pde3dConfig {
    pub fn resolve(args: &Pde3dArgs, file: &Pde3dFile) -> Result<Self, Failure> {
        let cfg = Pde3dConfig {
            nx: args.nx.or(file.nx).unwrap_or(32),
            ny: args.ny.or(file.ny).unwrap_or(32),
            mt: args.mt.or(file.mt).unwrap_or(32),
            lx: args.lx.or(file.lx).unwrap_or(1.0),
            ly: args.ly.or(file.ly).unwrap_or(1.0),
            d_t: args.d_t.or(file.d_t).unwrap_or(1.0),
            d_r: args.d_r.or(file.d_r).unwrap_or(1.0),
            phi: args.phi.or(file.phi).unwrap_or(1.0),
            dt: args.dt.or(file.dt),
            t_end: args.t_end.or(file.t_end).unwrap_or(0.1),
            table_size: args.table_size.or(file.table_size).unwrap_or(17),
            amp_x: args.amp_x.or(file.amp_x).unwrap_or(0.2),
            amp_y: args.amp_y.or(file.amp_y).unwrap_or(0.2),
            amp_theta: args.amp_theta.or(file.amp_theta).unwrap_or(0.0),
            records: args.records.or(file.records).unwrap_or(21),
        };
        for (name, a) in [
            ("amp_x", cfg.amp_x),
            ("amp_y", cfg.amp_y),
            ("amp_theta", cfg.amp_theta),
        ] {
            if !(a.abs() < 1.0) {
                return Err(Failure::Validation(format!(
                    "{name}: modulation amplitude must satisfy |a| < 1 for positivity, got {a}"
                )));
            }
        }
        if cfg.records < 2 {
            return Err(Failure::Validation(format!(
                "records: need at least 2 (initial and final), got {}",
                cfg.records
            )));
        }
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// hydro
// ---------------------------------------------------------------------------

#[derive(Args, Default)]
#[command(allow_negative_numbers = true)]
pub struct HydroArgs {
    /// Spatial grid size in x.
    #[arg(long)]
    pub nx: Option<usize>,
    /// Spatial grid size in y.
    #[arg(long)]
    pub ny: Option<usize>,
    /// Box period in x.
    #[arg(long)]
    pub lx: Option<f64>,
    /// Box period in y.
    #[arg(long)]
    pub ly: Option<f64>,
    /// Number of needles behind the occupied fraction.
    #[arg(long)]
    pub n: Option<u64>,
    /// Needle length.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Width of the initial Gaussian density bump.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Optional step cap (the solver otherwise adapts to stability).
    #[arg(long)]
    pub max_dt: Option<f64>,
    /// Number of evenly spaced recording times (including 0 and t_end).
    #[arg(long)]
    pub records: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct HydroFile {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub lx: Option<f64>,
    pub ly: Option<f64>,
    pub n: Option<u64>,
    pub eps: Option<f64>,
    pub sigma: Option<f64>,
    pub t_end: Option<f64>,
    pub max_dt: Option<f64>,
    pub records: Option<usize>,
}

#[derive(Serialize, Clone, Debug)]
pub struct HydroConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub n: u64,
    pub eps: f64,
    pub sigma: f64,
    pub t_end: f64,
    /// Optional step cap; absent, the solver adapts to its stability limit
    /// (absence round-trips: the key is omitted from the manifest).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_dt: Option<f64>,
    pub records: usize,
}

impl HydroConfig {
    pub fn resolve(args: &HydroArgs, file: &HydroFile) -> Result<Self, Failure> {
        let n = args.n.or(file.n).unwrap_or(200);
        if n == 0 {
            return Err(Failure::Validation(
                "n: need at least one needle".to_string(),
            ));
        }
        let cfg = HydroConfig {
            nx: args.nx.or(file.nx).unwrap_or(64),
            ny: args.ny.or(file.ny).unwrap_or(64),
            lx: args.lx.or(file.lx).unwrap_or(1.0),
            ly: args.ly.or(file.ly).unwrap_or(1.0),
            n,
            eps: args.eps.or(file.eps).unwrap_or(0.1),
            sigma: args.sigma.or(file.sigma).unwrap_or(0.15),
            t_end: args.t_end.or(file.t_end).unwrap_or(0.1),
            max_dt: args.max_dt.or(file.max_dt),
            records: args.records.or(file.records).unwrap_or(11),
        };
        if cfg.records < 2 {
            return Err(Failure::Validation(format!(
                "records: need at least 2 (initial and final), got {}",
                cfg.records
            )));
        }
        Ok(cfg)
    }

    /// Occupied fraction `(N−1)ε²` — the pair-count convention under which
    /// the needle and disk crowding coefficients coincide.
    pub fn phi(&self) -> f64 {
        (self.n - 1) as f64 * self.eps * self.eps
    }
}

// ---------------------------------------------------------------------------
// Run context: output directory, seed, thread budget.
// ---------------------------------------------------------------------------

pub struct RunContext {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

impl RunContext {
    pub fn resolve(cli: &Cli, file: &FileConfig) -> Result<Self, Failure> {
        let threads = match std::env::var("NEEDLES_THREADS") {
            Ok(v) => v.parse::<usize>().ok().filter(|&t| t > 0).ok_or_else(|| {
                Failure::Validation(format!(
                    "NEEDLES_THREADS: expected a positive integer, got \"{v}\""
                ))
            })?,
            Err(_) => 1,
        };
        Ok(RunContext {
            out_dir: cli
                .out
                .clone()
                .or_else(|| file.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("needles-out")),
            seed: cli.seed.or(file.output.seed).unwrap_or(0),
            threads,
        })
    }
}
