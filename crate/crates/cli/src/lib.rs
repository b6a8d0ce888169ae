//! `hyperperc` experiment driver.
//!
//! Every subcommand reads an optional `key = value` config file, applies
//! command-line overrides, and writes CSV/SVG/text outputs atomically.
//! Exit codes: 0 success, 2 configuration error, 3 numeric or i/o failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod phase;
pub mod render;

pub use hyperperc_core as core;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::CliError;
use config::Config;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "HYPERPERC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hyperperc", version, about = "Percolation on hyperbolic tilings and Poisson-Voronoi tessellations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a {p,q} tiling ball and write its adjacency file
    GenTiling(Params),
    /// Sample a colored Poisson point set (and optionally its tessellation)
    VoronoiSample(Params),
    /// Vertex, edge and face densities of Poisson-Voronoi tessellations
    Densities(Params),
    /// Phase classification over a p grid
    PhaseSweep(Params),
    /// Critical point estimates, p_c(lambda) curve for tessellations
    PcEstimate(Params),
    /// Uniqueness threshold estimates
    PuEstimate(Params),
    /// Bond percolation reach curves on a tiling ball
    GraphPerc(Params),
    /// Two-point connectivity decay below criticality
    Decay(Params),
    /// SVG rendering of a tessellation, a tiling or a phase table
    Render(Params),
}

#[derive(Debug, Args)]
struct Params {
    /// `key = value` config file; flags override its entries
    #[arg(long, allow_hyphen_values = true)]
    config: Option<PathBuf>,
    /// Intensity or intensity grid
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Probability or p grid (`start:stop:step` or comma list)
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Sampling radius, or window ladder for sweeps
    #[arg(long = "R", allow_hyphen_values = true)]
    r: Option<String>,
    /// Statistics window radius
    #[arg(long = "Rw", allow_hyphen_values = true)]
    rw: Option<String>,
    /// Tiling type `p,q`
    #[arg(long, allow_hyphen_values = true)]
    pq: Option<String>,
    /// Layer count or ladder
    #[arg(long = "L", allow_hyphen_values = true)]
    l: Option<String>,
    /// Distances for decay
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    replicas: Option<String>,
    /// Master seed
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// Main output path (stdout when absent)
    #[arg(long, allow_hyphen_values = true)]
    out: Option<String>,
    /// JSON run summary path
    #[arg(long, allow_hyphen_values = true)]
    json: Option<String>,
    /// Worker threads (overridden by HYPERPERC_THREADS)
    #[arg(long, allow_hyphen_values = true)]
    threads: Option<String>,
    #[arg(long = "r_core", allow_hyphen_values = true)]
    r_core: Option<String>,
    /// Sampling margin beyond the largest window
    #[arg(long, allow_hyphen_values = true)]
    margin: Option<String>,
    #[arg(long = "unique_threshold", allow_hyphen_values = true)]
    unique_threshold: Option<String>,
    #[arg(long = "many_reach", allow_hyphen_values = true)]
    many_reach: Option<String>,
    #[arg(long = "many_k", allow_hyphen_values = true)]
    many_k: Option<String>,
    /// Per-window sweep CSV path
    #[arg(long = "sweep_out", allow_hyphen_values = true)]
    sweep_out: Option<String>,
    /// Tessellation text output path
    #[arg(long = "complex_out", allow_hyphen_values = true)]
    complex_out: Option<String>,
    /// Shift the window ladder by ln(1/lambda)
    #[arg(long = "scale_R", allow_hyphen_values = true)]
    scale_r: Option<String>,
    /// Tolerance on the p_c upper bound check
    #[arg(long, allow_hyphen_values = true)]
    slack: Option<String>,
    /// Render target: voronoi, tiling or phase
    #[arg(long, allow_hyphen_values = true)]
    what: Option<String>,
    /// Input file (point set or phase table)
    #[arg(long, allow_hyphen_values = true)]
    input: Option<String>,
}

impl Params {
    fn overrides(self) -> (Option<PathBuf>, Vec<(&'static str, Option<String>)>) {
        let kv = vec![
            ("lambda", self.lambda),
            ("p", self.p),
            ("R", self.r),
            ("Rw", self.rw),
            ("pq", self.pq),
            ("L", self.l),
            ("d", self.d),
            ("replicas", self.replicas),
            ("seed", self.seed),
            ("out", self.out),
            ("json", self.json),
            ("threads", self.threads),
            ("r_core", self.r_core),
            ("margin", self.margin),
            ("unique_threshold", self.unique_threshold),
            ("many_reach", self.many_reach),
            ("many_k", self.many_k),
            ("sweep_out", self.sweep_out),
            ("complex_out", self.complex_out),
            ("scale_R", self.scale_r),
            ("slack", self.slack),
            ("what", self.what),
            ("input", self.input),
        ];
        (self.config, kv)
    }
}

impl Command {
    fn split(self) -> (&'static str, Params) {
        match self {
            Command::GenTiling(p) => ("gen-tiling", p),
            Command::VoronoiSample(p) => ("voronoi-sample", p),
            Command::Densities(p) => ("densities", p),
            Command::PhaseSweep(p) => ("phase-sweep", p),
            Command::PcEstimate(p) => ("pc-estimate", p),
            Command::PuEstimate(p) => ("pu-estimate", p),
            Command::GraphPerc(p) => ("graph-perc", p),
            Command::Decay(p) => ("decay", p),
            Command::Render(p) => ("render", p),
        }
    }
}

fn load_config(params: Params) -> Result<Config, CliError> {
    let (path, overrides) = params.overrides();
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            Config::parse(&text)?
        }
        None => Config::new(),
    };
    for (k, v) in overrides {
        if let Some(v) = v {
            cfg.set(k, v);
        }
    }
    Ok(cfg)
}

/// Worker count from the environment, then the config, else rayon's default.
fn configure_threads(cfg: &Config) -> Result<(), CliError> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| CliError::Config(format!("{THREADS_ENV} must be an integer")))?),
        Err(_) => cfg.get("threads").map(|_| cfg.usize_or("threads", 0)).transpose()?,
    };
    if let Some(n) = n {
        // a pool built earlier in the process stays in place
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs one subcommand and returns its summary JSON.
pub fn execute(command: &str, cfg: &Config) -> Result<serde_json::Value, CliError> {
    let start = Instant::now();
    let results = commands::run(command, cfg)?;
    if let Some(path) = cfg.get("json") {
        let text = output::summary_json(command, cfg, start.elapsed().as_secs_f64(), results.clone());
        output::write_atomic(std::path::Path::new(path), text.as_bytes())
            .map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    }
    Ok(results)
}

/// Parses arguments, runs the subcommand, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (command, params) = cli.command.split();
    let result = load_config(params).and_then(|cfg| {
        configure_threads(&cfg)?;
        execute(command, &cfg)
    });
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("hyperperc {command}: {e}");
            e.exit_code()
        }
    }
}
