//! `shac`: run optimizers on the synthetic benchmarks and report on the runs.

mod analyze;
mod compare;
mod config;
mod run;

use std::path::PathBuf;

use anyhow::Result;
use clap::{ArgGroup, Parser, Subcommand};

use crate::analyze::Analysis;
use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "shac", version, about = "Batch black-box optimization with a classifier cascade")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured seed and write logs, summaries and an aggregate.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replace the configured seed list.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        seed_override: Option<Vec<u64>>,
        /// Replace the configured output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print a table comparing finished runs on the same objective.
    Compare {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
    /// Write per-seed CSVs for a finished run.
    #[command(group(ArgGroup::new("analysis").required(true).args(["hamming", "medians"])))]
    Analyze {
        dir: PathBuf,
        /// Pairwise Hamming distance histogram (discrete spaces only).
        #[arg(long)]
        hamming: bool,
        /// Median objective value per batch.
        #[arg(long)]
        medians: bool,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            seed_override,
            output_dir,
        } => {
            let mut config = RunConfig::load(&config)?;
            if let Some(seeds) = seed_override {
                config.seeds = seeds;
            }
            if let Some(dir) = output_dir {
                config.output_dir = dir;
            }
            let agg = run::run(&config)?;
            println!(
                "{} on {}: best {:.4} ± {:.4} over {} seeds, written to {}",
                agg.algorithm.name(),
                agg.objective,
                agg.best.mean,
                agg.best.stderr,
                agg.seeds.len(),
                config.output_dir.display()
            );
        }
        Command::Compare { dirs } => print!("{}", compare::compare(&dirs)?),
        Command::Analyze { dir, hamming, .. } => {
            let what = if hamming { Analysis::Hamming } else { Analysis::Medians };
            for path in analyze::analyze(&dir, what)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}
