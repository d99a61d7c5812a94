use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::run::{Aggregate, AGGREGATE};

pub fn load(dir: &Path) -> Result<Aggregate> {
    let path = dir.join(AGGREGATE);
    let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))
}

/// Table of mean ± stderr of the best value and top-5 mean, one row per run.
pub fn compare(dirs: &[PathBuf]) -> Result<String> {
    if dirs.is_empty() {
        bail!("compare needs at least one run directory");
    }
    let rows = dirs
        .iter()
        .map(|d| load(d).map(|a| (d, a)))
        .collect::<Result<Vec<_>>>()?;
    let first = &rows[0].1;
    for (dir, a) in &rows[1..] {
        if a.objective != first.objective {
            bail!(
                "{} ran {} but {} ran {}",
                dir.display(),
                a.objective,
                rows[0].0.display(),
                first.objective
            );
        }
        if (a.budget, a.workers) != (first.budget, first.workers) {
            bail!(
                "{} used budget {}x{} but {} used {}x{}",
                dir.display(),
                a.budget,
                a.workers,
                rows[0].0.display(),
                first.budget,
                first.workers
            );
        }
    }

    let mut out = String::new();
    writeln!(
        out,
        "objective {}  budget {}  workers {}",
        first.objective, first.budget, first.workers
    )?;
    writeln!(
        out,
        "{:<10} {:>6} {:>22} {:>22}  dir",
        "algorithm", "seeds", "best", "top-5 mean"
    )?;
    for (dir, a) in &rows {
        writeln!(
            out,
            "{:<10} {:>6} {:>22} {:>22}  {}",
            a.algorithm.name(),
            a.seeds.len(),
            format!("{:.4} ± {:.4}", a.best.mean, a.best.stderr),
            format!("{:.4} ± {:.4}", a.top5_mean.mean, a.top5_mean.stderr),
            dir.display()
        )?;
    }
    Ok(out)
}
