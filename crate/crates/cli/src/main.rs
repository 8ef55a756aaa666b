//! Pipeline driver. Subcommands mirror the stages: scan documents into daily
//! counts, build series, fit decay models, extract features, cluster, run the
//! regressions, or do all of it in one `analyze` pass. `synth` generates
//! corpora and series with known ground truth for end-to-end checks.
//!
//! Exit codes: 0 success, 2 input error, 3 analysis-stage failure.

mod commands;
mod config;
mod formats;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{apply_overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "memdecay",
    version,
    about = "Post-mortem media attention pipeline: mention scanning, decay-model fitting, curve clustering, and biographic regression"
)]
struct Cli {
    /// Plain key=value config file; command-line --set overrides win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. --set seed=7 --set k_max=12.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a JSONL document stream into daily mention counts.
    Scan {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build raw and smoothed mention series from counts.
    Series {
        /// Directory holding mention_counts.csv and total_counts.csv.
        #[arg(long)]
        counts_dir: PathBuf,
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the decay-model catalog to the mean log series.
    Fit {
        /// series.csv produced by the series stage.
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the four curve features per person and medium.
    Features {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster feature vectors and analyze cross-media agreement.
    Cluster {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regress boosts on biographic factors.
    Regress {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run series, fit, features, cluster, and regress from counts.
    Analyze {
        #[arg(long)]
        counts_dir: PathBuf,
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus or series set with ground truth.
    Synth(commands::synth::SynthArgs),
}

/// Failure carrying the process exit code.
pub enum Failure {
    /// Bad or missing inputs: exit 2.
    Input(anyhow::Error),
    /// A pipeline stage failed on valid inputs: exit 3.
    Analysis {
        stage: &'static str,
        source: anyhow::Error,
    },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Analysis { .. } => 3,
        }
    }
}

pub fn input_error(err: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(err.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        if let Err(err) = config.apply_file(path) {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    }
    if let Err(err) = apply_overrides(&mut config, &cli.sets) {
        eprintln!("error: {err:#}");
        return ExitCode::from(2);
    }

    let result = match cli.command {
        Command::Scan { docs, registry, out } => commands::scan::run(&docs, &registry, &out, &config),
        Command::Series {
            counts_dir,
            registry,
            out,
        } => commands::series::run(&counts_dir, &registry, &out, &config).map(|_| ()),
        Command::Fit { series, out } => commands::fit::run(&series, &out, &config).map(|_| ()),
        Command::Features { series, out } => {
            commands::features::run(&series, &out, &config).map(|_| ())
        }
        Command::Cluster { features, out } => {
            commands::cluster::run(&features, &out, &config).map(|_| ())
        }
        Command::Regress {
            features,
            registry,
            out,
        } => commands::regress::run(&features, &registry, &out, &config).map(|_| ()),
        Command::Analyze {
            counts_dir,
            registry,
            out,
        } => commands::analyze::run(&counts_dir, &registry, &out, &config),
        Command::Synth(args) => commands::synth::run(&args, &config),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Input(err) => eprintln!("error: {err:#}"),
                Failure::Analysis { stage, source } => {
                    eprintln!("error in stage '{stage}': {source:#}")
                }
            }
            ExitCode::from(failure.code())
        }
    }
}
