//! Flag definitions. Workload arguments accept a built-in name (a pure
//! mix like `read` or a preset like `ycsb-a`) or a path to a workload
//! TOML file; config arguments use `<kind>:<axis>=<value>[,...]` with
//! omitted axes at their defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "idxsel",
    version,
    about = "Index structure selection: benchmark, train, select"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Benchmark one configuration under one workload
    Bench(BenchArgs),
    /// Score configurations across workloads as a throughput matrix
    Compare(CompareArgs),
    /// Train a selection policy and write a checkpoint
    Train(TrainArgs),
    /// Pick the best configuration with a trained policy
    Select(SelectArgs),
    /// Benchmark one workload shape across operation counts
    OpcountSweep(SweepArgs),
    /// List the built-in workload presets or write them as files
    Presets(PresetsArgs),
    /// Compare measured against simulated throughput on this machine
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// Directory for emitted files, created if missing
    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    /// Benchmark mode: simulated (sim) or measured (meas)
    #[arg(long, default_value = "simulated")]
    pub mode: String,

    /// Seed override; beats IDXSEL_SEED and any built-in default
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Workload name or TOML file
    #[arg(long)]
    pub workload: String,

    /// Configuration to score, e.g. btree:fanout=64
    #[arg(long)]
    pub config: String,

    /// Override the workload's operation count
    #[arg(long)]
    pub op_count: Option<u64>,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Comma-separated workloads, or "pure" for the five single-kind mixes,
    /// or "presets" for the six built-ins
    #[arg(long, default_value = "pure")]
    pub workloads: String,

    /// Comma-separated configurations, or "defaults" for one per
    /// structure, or "all" for the full parameter grid
    #[arg(long, default_value = "defaults")]
    pub configs: String,

    /// Worker threads for independent bench runs
    #[arg(long)]
    pub jobs: Option<usize>,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Train on a single workload instead of the two-phase curriculum
    #[arg(long, conflicts_with = "curriculum")]
    pub workload: Option<String>,

    /// Two-phase curriculum: the five pure workloads, then random mixes
    #[arg(long)]
    pub curriculum: bool,

    /// Episode schedule: desk (fast) or paper (full)
    #[arg(long, default_value = "desk")]
    pub scale: String,

    /// Episode count for single-workload training
    #[arg(long, default_value_t = 300)]
    pub episodes: usize,

    /// Checkpoint path; defaults to <out>/checkpoint.qnet
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct SelectArgs {
    /// Trained checkpoint to drive the policy
    #[arg(long)]
    pub checkpoint: PathBuf,

    /// Workload name or TOML file
    #[arg(long, required_unless_present = "presets", conflicts_with = "presets")]
    pub workload: Option<String>,

    /// Run selection over every built-in preset and compare against the
    /// random-choice mean
    #[arg(long)]
    pub presets: bool,

    /// Selection episodes; default covers the config space several times
    #[arg(long)]
    pub episodes: Option<usize>,

    /// Accumulate rollout returns without discounting
    #[arg(long)]
    pub undiscounted: bool,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Operation counts to bench, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,5000,10000")]
    pub op_counts: Vec<u64>,

    /// Workload name or TOML file
    #[arg(long, default_value = "insert")]
    pub workload: String,

    /// Configuration to score; defaults to the LSM default
    #[arg(long)]
    pub config: Option<String>,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct PresetsArgs {
    /// Write each preset as <dir>/<name>.toml instead of listing them
    #[arg(long)]
    pub write: Option<PathBuf>,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// Operation count per run
    #[arg(long, default_value_t = 2_000)]
    pub op_count: u64,

    #[command(flatten)]
    pub common: CommonArgs,
}
