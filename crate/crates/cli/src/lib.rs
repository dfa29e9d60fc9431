//! `dul`: command-line front end for `dul-core`.
//!
//! Every subcommand writes a JSON summary (also printed to stdout) and, where
//! it produces tables, plot-ready CSV into `--out`. Exit codes: 0 success,
//! 2 precondition violation, 3 numeric failure or stall, 64 usage error.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod descriptor;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use config::ExperimentConfig;
use error::{CliError, CliResult, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "dul",
    version,
    about = "Dirichlet series numerics: evaluation, abscissae, rearrangements and translate scans",
    after_help = "Any subcommand also accepts --config FILE (key = value with [sections]); \
                  flags given on the command line override the file.",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
pub enum Command {
    /// Estimate σ_c, σ_a or σ_2 from partial sums
    Abscissa(AbscissaArgs),
    /// Evaluate the series at one point
    Eval(EvalArgs),
    /// Window-density condition check on a grid of x
    DensityCheck(DensityArgs),
    /// Scalar Riemann rearrangement or greedy steering toward a target
    Rearrange(RearrangeArgs),
    /// Scan vertical translates against a target on a compact
    TranslateScan(ScanArgs),
    /// Sample the random-phase model
    McSample(McArgs),
    /// Check the Montgomery–Vaughan inequality on random instances
    MvCheck(MvArgs),
    /// Mean square of |D(σ+it)| over [0, T]
    MeanSquare(MeanSquareArgs),
    /// Running sums of |a(n) L_μ(λ(n))|
    DivergenceOracle(DivergenceArgs),
}

impl Command {
    pub fn id(&self) -> &'static str {
        match self {
            Command::Abscissa(_) => "abscissa",
            Command::Eval(_) => "eval",
            Command::DensityCheck(_) => "density-check",
            Command::Rearrange(_) => "rearrange",
            Command::TranslateScan(_) => "translate-scan",
            Command::McSample(_) => "mc-sample",
            Command::MvCheck(_) => "mv-check",
            Command::MeanSquare(_) => "mean-square",
            Command::DivergenceOracle(_) => "divergence-oracle",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Abscissa(a) => &a.common,
            Command::Eval(a) => &a.common,
            Command::DensityCheck(a) => &a.common,
            Command::Rearrange(a) => &a.common,
            Command::TranslateScan(a) => &a.common,
            Command::McSample(a) => &a.common,
            Command::MvCheck(a) => &a.common,
            Command::MeanSquare(a) => &a.common,
            Command::DivergenceOracle(a) => &a.common,
        }
    }

    /// The fully resolved configuration of this run.
    pub fn config(&self) -> ExperimentConfig {
        let v = serde_json::to_value(self).expect("arguments serialize");
        let inner = v.as_object().and_then(|m| m.values().next()).cloned().unwrap_or_default();
        ExperimentConfig::from_args(self.id(), &inner)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AbscissaArgs {
    #[arg(long)]
    pub series: String,
    /// c, a, 2 or all
    #[arg(long, default_value = "all")]
    pub kind: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub nmax: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub series: String,
    /// Point as re,im
    #[arg(long)]
    pub s: String,
    /// auto, partial, vdc or mobius
    #[arg(long, default_value = "auto")]
    pub method: String,
    /// Number of terms for a plain partial sum
    #[arg(long)]
    pub n: Option<u64>,
    /// Möbius truncation for the prime series
    #[arg(long, default_value_t = 30)]
    pub k: u64,
    /// Largest cutoff summed directly by the tail evaluator
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long, default_value_t = 20.0)]
    pub calibration: f64,
    #[arg(long, default_value_t = 1000)]
    pub min_cutoff: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long)]
    pub series: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    pub beta: f64,
    #[arg(long, default_value_t = 5.0)]
    pub x_lo: f64,
    #[arg(long, default_value_t = 15.0)]
    pub x_hi: f64,
    #[arg(long, default_value_t = 0.5)]
    pub x_step: f64,
    #[arg(long, default_value_t = dul_core::functionals::WINDOW_INDEX_BUDGET)]
    pub budget: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RearrangeArgs {
    #[arg(long)]
    pub series: String,
    /// scalar or steer
    #[arg(long, default_value = "scalar")]
    pub mode: String,
    /// Scalar mode: real target value. Steer mode: const:re[,im] or file:path.csv
    #[arg(long)]
    pub target: String,
    /// Scalar mode: real point at which the terms are taken
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    /// Scalar mode: largest index searched for a term of the needed sign
    #[arg(long, default_value_t = 1_000_000_000)]
    pub index_budget: u64,
    /// Steer mode: stage CSV with header re0,re1,im0,im1,grid,tolerance,budget
    #[arg(long)]
    pub stages: Option<PathBuf>,
    /// Steer mode without --stages: compact re0,re1,im0,im1[,density]
    #[arg(long)]
    pub compact: Option<String>,
    /// Steer mode without --stages: tolerances separated by `;`
    #[arg(long, default_value = "0.1;0.05;0.02")]
    pub tolerances: String,
    /// Steer mode without --stages: step budgets separated by `;`
    #[arg(long, default_value = "10000;20000;40000")]
    pub budgets: String,
    #[arg(long, default_value_t = 64)]
    pub window: usize,
    #[arg(long, default_value_t = 1000)]
    pub checkpoint_every: u64,
    /// Write every k-th row of the step table
    #[arg(long, default_value_t = 1)]
    pub thin: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub series: String,
    /// const:re[,im] or file:path.csv
    #[arg(long)]
    pub target: String,
    /// re0,re1,im0,im1[,density]
    #[arg(long)]
    pub compact: String,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long)]
    pub eps: f64,
    /// Checkpoint sidecar; continued when it exists, created otherwise
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Stop after this many grid cells (the checkpoint allows resuming)
    #[arg(long)]
    pub max_cells: Option<u64>,
    /// Write every k-th grid sample
    #[arg(long, default_value_t = 1)]
    pub thin: u64,
    #[arg(long, default_value_t = 1000)]
    pub min_cutoff: u64,
    #[arg(long, default_value_t = 100_000)]
    pub partial_budget: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct McArgs {
    #[arg(long)]
    pub series: String,
    /// Point as re,im
    #[arg(long)]
    pub s: String,
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Truncation; chosen automatically from the tail mass when absent
    #[arg(long)]
    pub n_terms: Option<u64>,
    /// Also compare against translates on [0, T] (Kolmogorov–Smirnov)
    #[arg(long = "compare-T")]
    #[serde(rename = "compare-T")]
    pub compare_t: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// re, im or abs
    #[arg(long, default_value = "re")]
    pub projection: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MvArgs {
    /// Number of random instances
    #[arg(long, default_value_t = 10)]
    pub random: u64,
    #[arg(long, default_value_t = 50)]
    pub nmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeanSquareArgs {
    #[arg(long)]
    pub series: String,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub min_cutoff: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DivergenceArgs {
    #[arg(long)]
    pub series: String,
    /// Atoms as re,im[,weight_re[,weight_im]], separated by `;`
    #[arg(long)]
    pub atoms: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub nmax: u64,
    /// Thresholds separated by `;`
    #[arg(long)]
    pub thresholds: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// Expands `--config FILE` into flags placed before the command-line ones.
fn expand_config(argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let pos = argv.iter().position(|a| a == "--config");
    let Some(pos) = pos else { return Ok(argv) };
    let path = argv.get(pos + 1).ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
    let path = PathBuf::from(path);
    let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
    let cfg = ExperimentConfig::parse(&text)?;
    let mut rest: Vec<OsString> = argv[1..pos].iter().chain(&argv[pos + 2..]).cloned().collect();
    if let Some(first) = rest.first() {
        if !first.to_string_lossy().starts_with('-') {
            if *first != *cfg.command {
                return Err(CliError::Usage(format!(
                    "config is for `{}` but the command line asks for `{}`",
                    cfg.command,
                    first.to_string_lossy()
                )));
            }
            rest.remove(0);
        }
    }
    let mut out = vec![argv[0].clone(), cfg.command.clone().into()];
    out.extend(cfg.to_args().into_iter().map(OsString::from));
    out.extend(rest);
    Ok(out)
}

fn configure_threads() {
    if let Some(n) = std::env::var("DUL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn diagnostics(cmd: Option<&Command>, err: &CliError) -> serde_json::Value {
    json!({
        "status": "error",
        "command": cmd.map(|c| c.id()),
        "kind": err.kind(),
        "exit_code": err.exit_code(),
        "message": err.to_string(),
    })
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            println!("{}", diagnostics(None, &e));
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    EXIT_OK
                }
                _ => {
                    let _ = e.print();
                    EXIT_USAGE
                }
            };
        }
    };
    configure_threads();
    match commands::execute(&cli.command) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("JSON values serialize"));
            EXIT_OK
        }
        Err(e) => {
            let diag = diagnostics(Some(&cli.command), &e);
            if let Ok(dir) = output::OutDir::new(&cli.command.common().out) {
                let _ = dir.write_json(&format!("{}.json", cli.command.id()), &diag);
            }
            eprintln!("error: {e}");
            println!("{diag}");
            e.exit_code()
        }
    }
}
