//! Command-line front end: single runs, seeded repeat campaigns, exact-diagonalization
//! checks, synthetic instances and backend benchmarks.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use bpde_core::{Backend, BpdeConfig, SampleMode, TrotterRule};

pub mod bench;
pub mod campaign;
pub mod commands;
pub mod error;
pub mod oracle;
pub mod problem;
pub mod report;
pub mod units;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "bpde", version, about = "Bayesian phase difference estimation of energy gaps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate one gap and write the result document.
    Run(RunArgs),
    /// Repeat runs with consecutive seeds and tabulate mean and standard deviation.
    Campaign(CampaignArgs),
    /// Exact gap by dense diagonalization, optionally compared with a result document.
    Oracle(OracleArgs),
    /// Time a fixed single-iteration workload across backends and worker counts.
    Bench(BenchArgs),
    /// Write a seeded synthetic integrals file.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Sampled,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    Gate,
    Fused,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Gate => Backend::Gate,
            BackendArg::Fused => Backend::Fused,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Literal,
    Inverted,
}

/// Estimator settings; unset fields keep their defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Shots per scan point.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Scan points per iteration (odd, at least 5).
    #[arg(long)]
    pub scan: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Worker threads for the state-vector kernels.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub trotter_rule: Option<RuleArg>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

impl ConfigArgs {
    /// Fields set in `self` win over `fallback`.
    pub fn or(&self, fallback: &ConfigArgs) -> ConfigArgs {
        ConfigArgs {
            shots: self.shots.or(fallback.shots),
            scan: self.scan.or(fallback.scan),
            mode: self.mode.or(fallback.mode),
            seed: self.seed.or(fallback.seed),
            backend: self.backend.or(fallback.backend),
            workers: self.workers.or(fallback.workers),
            trotter_rule: self.trotter_rule.or(fallback.trotter_rule),
            max_iterations: self.max_iterations.or(fallback.max_iterations),
        }
    }

    pub fn to_config(&self, h00: f64) -> BpdeConfig {
        let mut cfg = BpdeConfig {
            h00: Some(h00),
            ..Default::default()
        };
        if let Some(v) = self.shots {
            cfg.shots = v;
        }
        if let Some(v) = self.scan {
            cfg.n_scan = v;
        }
        if let Some(v) = self.mode {
            cfg.mode = match v {
                ModeArg::Sampled => SampleMode::Sampled,
                ModeArg::Exact => SampleMode::ExactProb,
            };
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.backend {
            cfg.backend = v.into();
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.trotter_rule {
            cfg.trotter.rule = match v {
                RuleArg::Literal => TrotterRule::Literal,
                RuleArg::Inverted => TrotterRule::Inverted,
            };
        }
        if let Some(v) = self.max_iterations {
            cfg.max_iterations = v;
        }
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Integrals file.
    #[arg(long)]
    pub ints: PathBuf,
    /// Reference determinant for the lower state, one character per active orbital.
    #[arg(long)]
    pub d0: String,
    /// Reference determinant for the upper state.
    #[arg(long)]
    pub d1: String,
    /// Comma-separated orbitals to freeze (occupied) before the active-space mapping.
    #[arg(long, value_delimiter = ',')]
    pub freeze: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Result document path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CampaignArgs {
    /// TOML file with one `[[run]]` table per system.
    #[arg(long, conflicts_with = "ints")]
    pub manifest: Option<PathBuf>,
    /// Single-system campaign: integrals file (needs --d0 and --d1).
    #[arg(long, requires_all = ["d0", "d1"])]
    pub ints: Option<PathBuf>,
    #[arg(long)]
    pub d0: Option<String>,
    #[arg(long)]
    pub d1: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub freeze: Vec<usize>,
    /// Repeats per system; manifest entries may override.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Summary JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Result document to compare against the exact gap.
    #[arg(long)]
    pub result: Option<PathBuf>,
    /// Report JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// System sizes in qubits (one more is simulated for the ancilla).
    #[arg(long, value_delimiter = ',', default_values_t = [8, 10, 12, 14])]
    pub sizes: Vec<usize>,
    /// Backends to time; the single-worker gate baseline always runs.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [BackendArg::Gate, BackendArg::Fused])]
    pub backends: Vec<BackendArg>,
    /// Worker counts; default 1 and the machine's parallelism (at least 2).
    #[arg(long, value_delimiter = ',')]
    pub workers: Vec<usize>,
    /// Timing repetitions per row (at least 3).
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Trotter slices in the workload.
    #[arg(long, default_value_t = 1)]
    pub slices: usize,
    /// Scan points in the workload.
    #[arg(long, default_value_t = 5)]
    pub scan: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_orb: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Diagonal-to-coupling scale ratio; 0 disables couplings.
    #[arg(long, default_value_t = 10.0)]
    pub diag_dominance: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(a) => commands::cmd_run(&a),
        Command::Campaign(a) => campaign::cmd_campaign(&a),
        Command::Oracle(a) => oracle::cmd_oracle(&a),
        Command::Bench(a) => bench::cmd_bench(&a),
        Command::Synth(a) => commands::cmd_synth(&a),
    }
}
