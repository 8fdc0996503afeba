use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "equimap", version, about = "Schrödinger map experiments near the harmonic-map soliton")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigen-table management.
    Table {
        #[command(subcommand)]
        action: TableAction,
    },
    /// Run an experiment and write trajectory.csv and summary.json.
    Run {
        kind: RunKind,
        #[command(flatten)]
        opts: SpecArgs,
    },
    /// X and LX norms of a field file.
    Norms {
        /// CSV with columns r,re,im on the table grid, or a snapshot file (.eqs).
        field: PathBuf,
        /// Interpret the samples on the primary grid (H frame) instead of the field grid.
        #[arg(long)]
        primary: bool,
        #[command(flatten)]
        opts: SpecArgs,
    },
    /// Write the initial reduced field of an experiment as CSV.
    Field {
        kind: RunKind,
        /// Output CSV path.
        out: PathBuf,
        #[command(flatten)]
        opts: SpecArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum TableAction {
    /// Build the eigen-table for the configured grid and write it.
    Build {
        #[command(flatten)]
        opts: SpecArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RunKind {
    Stability,
    Instability,
    LinearDecay,
}

/// Config file plus overrides; flags win over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// TOML experiment description.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub bumps: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub monitor_every: Option<f64>,
    #[arg(long)]
    pub refresh_every: Option<usize>,
    #[arg(long)]
    pub snapshot_every: Option<f64>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub xi_max: Option<f64>,
    /// Eigen-table file (default: the cache path for the grid).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Build the table if the file is missing.
    #[arg(long)]
    pub build_table: bool,
    /// Output directory (run) or table path (table build).
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}
