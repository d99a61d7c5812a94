use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use shac_core::analysis::{MeanStderr, RunSummary};
use shac_core::harness::run_optimizer_with;
use shac_core::objective::benchmark;
use shac_core::trial::LogEntry;
use shac_core::{BatchOptimizer, RandomSearch, Shac, TrialLog};

use crate::config::{Algorithm, RunConfig};

pub const CONFIG_COPY: &str = "config.toml";
pub const AGGREGATE: &str = "aggregate.json";

pub fn trials_file(seed: u64) -> String {
    format!("trials_{seed}.jsonl")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub objective: String,
    #[serde(flatten)]
    pub summary: RunSummary,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Aggregate {
    pub algorithm: Algorithm,
    pub objective: String,
    pub budget: usize,
    pub workers: usize,
    pub seeds: Vec<u64>,
    pub best: MeanStderr,
    pub top5_mean: MeanStderr,
}

pub fn run(config: &RunConfig) -> Result<Aggregate> {
    config.validate()?;
    let objective = benchmark(&config.objective)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    fs::write(dir.join(CONFIG_COPY), config.to_toml())?;

    let mut bests = Vec::new();
    let mut tops = Vec::new();
    for &seed in &config.seeds {
        let space = objective.space().clone();
        let budget = config.budget_config()?;
        let mut optimizer: Box<dyn BatchOptimizer> = match config.algorithm {
            Algorithm::Shac => Box::new(Shac::new(space, config.shac_config(seed)?)?),
            Algorithm::Rs => Box::new(RandomSearch::new(space, budget, seed)?),
            Algorithm::Rs2x => Box::new(RandomSearch::doubled(space, budget, seed)?),
        };

        let path = dir.join(trials_file(seed));
        let mut out = BufWriter::new(
            File::create(&path).with_context(|| format!("cannot create {}", path.display()))?,
        );
        let mut log = TrialLog::new();
        let mut write_entry = |entry: &LogEntry| -> shac_core::Result<()> {
            writeln!(out, "{}", entry.to_json_line())?;
            log.push(entry.clone())
        };
        run_optimizer_with(optimizer.as_mut(), objective.as_ref(), &mut write_entry)
            .with_context(|| format!("seed {seed} failed"))?;
        out.flush()?;

        let summary = RunSummary::from_log(&log, objective.direction())?;
        bests.push(summary.best_value);
        tops.push(summary.top5_mean);
        let per_seed = SeedSummary {
            seed,
            algorithm: config.algorithm,
            objective: config.objective.clone(),
            summary,
        };
        write_json(&dir.join(format!("summary_{seed}.json")), &per_seed)?;
    }

    let aggregate = Aggregate {
        algorithm: config.algorithm,
        objective: config.objective.clone(),
        budget: config.budget,
        workers: config.workers,
        seeds: config.seeds.clone(),
        best: MeanStderr::of(&bests)?,
        top5_mean: MeanStderr::of(&tops)?,
    };
    write_json(&dir.join(AGGREGATE), &aggregate)?;
    Ok(aggregate)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
