use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use shac_core::analysis::{hamming_histogram, per_batch_median};
use shac_core::objective::benchmark;
use shac_core::{Point, TrialLog};

use crate::config::RunConfig;
use crate::run::{trials_file, CONFIG_COPY};

#[derive(Clone, Copy, Debug)]
pub enum Analysis {
    Medians,
    Hamming,
}

/// Writes one CSV per seed into `dir` and returns their paths.
pub fn analyze(dir: &Path, what: Analysis) -> Result<Vec<PathBuf>> {
    let config = RunConfig::load(&dir.join(CONFIG_COPY))?;
    let space = benchmark(&config.objective)?.space().clone();
    let mut written = Vec::new();
    for &seed in &config.seeds {
        let path = dir.join(trials_file(seed));
        let file = File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
        let log = TrialLog::read_jsonl(BufReader::new(file))
            .with_context(|| format!("cannot parse {}", path.display()))?;

        let (name, csv) = match what {
            Analysis::Medians => {
                let mut csv = String::from("batch_index,median\n");
                for (i, m) in per_batch_median(&log)?.iter().enumerate() {
                    csv.push_str(&format!("{i},{m}\n"));
                }
                (format!("medians_{seed}.csv"), csv)
            }
            Analysis::Hamming => {
                let points: Vec<Point> = log.trials().map(|t| t.point.clone()).collect();
                let hist = hamming_histogram(&space, &points)
                    .with_context(|| format!("objective {}", config.objective))?;
                let mut csv = String::from("distance,count\n");
                for (d, c) in hist {
                    csv.push_str(&format!("{d},{c}\n"));
                }
                (format!("hamming_{seed}.csv"), csv)
            }
        };
        let out = dir.join(name);
        fs::write(&out, csv).with_context(|| format!("cannot write {}", out.display()))?;
        written.push(out);
    }
    Ok(written)
}
