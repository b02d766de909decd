//! `frameot`: optimal-transport analysis of tracking data from the command
//! line.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage or config
//! errors.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: msg.into(),
        }
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: msg.into(),
        }
    }
}

impl From<frameot::Error> for CliError {
    fn from(e: frameot::Error) -> Self {
        Self {
            code: if e.is_usage() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "frameot",
    version,
    about = "Optimal-transport analysis of player tracking data"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config file ("pipeline" and per-command sections).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Master seed; overrides `pipeline.rng_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Omit wall-clock timings and timestamps so outputs are byte-stable.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

/// Options for commands that read a tracking CSV.
#[derive(Debug, Clone, Args)]
pub struct Input {
    /// Tracking CSV (game_id,frame_id,timestamp_ms,period,team_id,x,y,possession_team_id).
    pub tracking_csv: PathBuf,
    /// Fail on the first malformed row instead of counting and skipping it.
    #[arg(long)]
    pub strict: bool,
    /// Infer attack directions per game and rotate frames so every team
    /// attacks towards +x. Needs both teams of each game in the file.
    #[arg(long)]
    pub orient: bool,
    /// Keep one frame in `stride` per game; overrides `pipeline.subsample_stride`.
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic league from the config's "synth" section.
    Synth,
    /// Parse, group and filter a tracking CSV; writes the exclusion report.
    Ingest {
        #[command(flatten)]
        input: Input,
    },
    /// Write the sorted-projection embedding of one team's frames.
    Embed {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        team: String,
        /// Center each frame on its mean position first.
        #[arg(long)]
        centered: bool,
    },
    /// Quantize one team's frames and summarize the clusters.
    Cluster {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        team: String,
        /// Number of clusters; overrides `pipeline.k_quant`.
        #[arg(long = "k", short = 'k')]
        k: Option<usize>,
        #[arg(long)]
        centered: bool,
    },
    /// Team similarity matrix, heatmap and sum of distances.
    Similarity {
        #[command(flatten)]
        input: Input,
        /// Quantizer size; overrides `pipeline.k_quant`.
        #[arg(long = "k", short = 'k')]
        k: Option<usize>,
        #[arg(long)]
        centered: bool,
        /// CSV `team_id,value`; rows and columns are sorted by value ascending.
        #[arg(long, conflicts_with = "sort_by_frame_share")]
        sort_by: Option<PathBuf>,
        /// Sort by the share of in-possession frames.
        #[arg(long)]
        sort_by_frame_share: bool,
        /// Also compute each team's in- vs out-of-possession distance.
        #[arg(long)]
        phases: bool,
    },
    /// Team identification with per-team Gaussian mixtures and k-fold CV.
    Identity {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Mixture components; overrides `pipeline.k_gmm`.
        #[arg(long = "gmm-k")]
        gmm_k: Option<usize>,
        /// Comma-separated sample sizes for the accuracy curve.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 10, 30, 100, 300])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        repeats: usize,
    },
    /// Possession prediction accuracy for each frame representation.
    Possession {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// L2 penalty of the logistic regression.
        #[arg(long, default_value_t = 1e-3)]
        l2: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::runtime(e.to_string()))?;
    }
    let file = config::load(cli.common.config.as_deref())?;
    let mut cfg = config::pipeline(&file)?;
    if let Some(s) = cli.common.seed {
        cfg.rng_seed = s;
    }
    let c = &cli.common;
    match cli.command {
        Command::Synth => commands::synth(c, &file, cfg),
        Command::Ingest { input } => commands::ingest(c, &input, cfg),
        Command::Embed {
            input,
            team,
            centered,
        } => commands::embed(c, &input, cfg, &team, centered),
        Command::Cluster {
            input,
            team,
            k,
            centered,
        } => commands::cluster(c, &input, cfg, &team, k, centered),
        Command::Similarity {
            input,
            k,
            centered,
            sort_by,
            sort_by_frame_share,
            phases,
        } => commands::similarity(
            c,
            &input,
            cfg,
            commands::SimilarityOptions {
                k,
                centered,
                sort_by,
                sort_by_frame_share,
                phases,
            },
        ),
        Command::Identity {
            input,
            folds,
            gmm_k,
            sizes,
            repeats,
        } => commands::identity(c, &input, cfg, folds, gmm_k, &sizes, repeats),
        Command::Possession { input, folds, l2 } => commands::possession(c, &input, cfg, folds, l2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
