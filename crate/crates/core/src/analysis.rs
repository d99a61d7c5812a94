//! Post-run statistics over trial logs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::objective::Direction;
use crate::shac::median;
use crate::space::{Point, SearchSpace};
use crate::trial::TrialLog;

/// Values sorted best first; stable, so equal values keep trial order.
fn ranked(log: &TrialLog, direction: Direction) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = log.trials().map(|t| (t.trial, t.value)).collect();
    v.sort_by(|a, b| match direction {
        Direction::Maximize => b.1.total_cmp(&a.1),
        Direction::Minimize => a.1.total_cmp(&b.1),
    });
    v
}

pub fn best_value(log: &TrialLog, direction: Direction) -> Result<f64> {
    top_k_mean(log, 1, direction)
}

/// Mean of the `k` best values.
pub fn top_k_mean(log: &TrialLog, k: usize, direction: Direction) -> Result<f64> {
    if k == 0 || k > log.n_trials() {
        return Err(Error::Statistic(format!(
            "top-{k} mean needs 1 <= k <= {} trials",
            log.n_trials()
        )));
    }
    let r = ranked(log, direction);
    Ok(r[..k].iter().map(|(_, y)| y).sum::<f64>() / k as f64)
}

/// Median objective value of each batch, in batch order. Every batch must
/// have the size of the first.
pub fn per_batch_median(log: &TrialLog) -> Result<Vec<f64>> {
    let mut batches: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for t in log.trials() {
        batches.entry(t.batch).or_default().push(t.value);
    }
    let Some(width) = batches.values().next().map(Vec::len) else {
        return Ok(Vec::new());
    };
    for (expected, (b, values)) in batches.iter().enumerate() {
        if *b != expected {
            return Err(Error::Statistic(format!("batch {expected} is missing from the log")));
        }
        if values.len() != width {
            return Err(Error::Statistic(format!(
                "batch {b} has {} trials, expected {width}",
                values.len()
            )));
        }
    }
    Ok(batches
        .values()
        .map(|v| median(v).expect("batches are non-empty"))
        .collect())
}

/// The `size` best trials' points, best first; ties go to the earlier trial.
pub fn select_shortlist(log: &TrialLog, size: usize, direction: Direction) -> Result<Vec<Point>> {
    if size > log.n_trials() {
        return Err(Error::Statistic(format!(
            "shortlist of {size} from {} trials",
            log.n_trials()
        )));
    }
    let points: BTreeMap<usize, &Point> = log.trials().map(|t| (t.trial, &t.point)).collect();
    Ok(ranked(log, direction)[..size]
        .iter()
        .map(|(i, _)| points[i].clone())
        .collect())
}

/// Histogram of pairwise Hamming distances over all unordered pairs.
pub fn hamming_histogram(space: &SearchSpace, points: &[Point]) -> Result<BTreeMap<usize, u64>> {
    if !space.is_discrete() {
        return Err(Error::UnsupportedSpace(
            "hamming distances need a fully discrete space".into(),
        ));
    }
    for p in points {
        space.validate_point(p)?;
    }
    let mut hist = BTreeMap::new();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = a
                .coords()
                .iter()
                .zip(b.coords())
                .filter(|(x, y)| x != y)
                .count();
            *hist.entry(d).or_insert(0) += 1;
        }
    }
    Ok(hist)
}

pub fn histogram_mean(hist: &BTreeMap<usize, u64>) -> f64 {
    let total: u64 = hist.values().sum();
    let weighted: f64 = hist.iter().map(|(d, c)| *d as f64 * *c as f64).sum();
    weighted / total as f64
}

/// Ordinary least-squares line through `(i, series[i])`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub n: usize,
}

impl Trend {
    pub fn fit(series: &[f64]) -> Result<Trend> {
        let n = series.len();
        if n < 3 {
            return Err(Error::Statistic(format!("trend needs at least 3 points, got {n}")));
        }
        let nf = n as f64;
        let x_mean = (nf - 1.0) / 2.0;
        let y_mean = series.iter().sum::<f64>() / nf;
        let sxx: f64 = (0..n).map(|i| (i as f64 - x_mean).powi(2)).sum();
        let sxy: f64 = series
            .iter()
            .enumerate()
            .map(|(i, y)| (i as f64 - x_mean) * (y - y_mean))
            .sum();
        let slope = sxy / sxx;
        let intercept = y_mean - slope * x_mean;
        let sse: f64 = series
            .iter()
            .enumerate()
            .map(|(i, y)| (y - intercept - slope * i as f64).powi(2))
            .sum();
        let slope_stderr = (sse / (nf - 2.0) / sxx).sqrt();
        Ok(Trend {
            slope,
            intercept,
            slope_stderr,
            n,
        })
    }

    pub fn t_statistic(&self) -> f64 {
        if self.slope_stderr == 0.0 {
            return if self.slope == 0.0 { 0.0 } else { self.slope.signum() * f64::INFINITY };
        }
        self.slope / self.slope_stderr
    }

    /// Two-sided test of zero slope at level `alpha`.
    pub fn is_significant(&self, alpha: f64) -> bool {
        let dist = StudentsT::new(0.0, 1.0, (self.n - 2) as f64).expect("n >= 3");
        let critical = dist.inverse_cdf(1.0 - alpha / 2.0);
        self.t_statistic().abs() > critical
    }
}

/// Per-seed figures reported for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_trials: usize,
    pub best_value: f64,
    pub top5_mean: f64,
    pub per_batch_median: Vec<f64>,
}

impl RunSummary {
    pub fn from_log(log: &TrialLog, direction: Direction) -> Result<Self> {
        Ok(RunSummary {
            n_trials: log.n_trials(),
            best_value: best_value(log, direction)?,
            top5_mean: top_k_mean(log, 5.min(log.n_trials()), direction)?,
            per_batch_median: per_batch_median(log)?,
        })
    }
}

/// Mean and standard error (sample sd over sqrt(n)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanStderr {
    pub fn of(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Statistic("mean of no values".into()));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(MeanStderr { mean, stderr, n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{child_rng, Purpose};
    use crate::space::ParamDomain;
    use crate::trial::TrialRecord;
    use proptest::prelude::*;

    fn log_of(batches: &[&[f64]]) -> TrialLog {
        let mut log = TrialLog::new();
        let mut trial = 0;
        for (b, values) in batches.iter().enumerate() {
            for &v in values.iter() {
                log.push_trial(TrialRecord {
                    trial,
                    batch: b,
                    point: Point::reals(&[trial as f64]),
                    value: v,
                    attempts: 1,
                    cascade_size: 0,
                })
                .unwrap();
                trial += 1;
            }
        }
        log
    }

    #[test]
    fn top_k_examples() {
        let log = log_of(&[&[1.0, 2.0, 3.0, 4.0, 5.0]]);
        assert_eq!(top_k_mean(&log, 5, Direction::Maximize).unwrap(), 3.0);
        assert_eq!(top_k_mean(&log, 2, Direction::Minimize).unwrap(), 1.5);
        assert_eq!(best_value(&log, Direction::Maximize).unwrap(), 5.0);
        assert!(top_k_mean(&log, 6, Direction::Maximize).is_err());
    }

    #[test]
    fn batch_median_examples() {
        assert_eq!(per_batch_median(&log_of(&[&[1.0, 2.0, 3.0]])).unwrap(), vec![2.0]);
        assert_eq!(
            per_batch_median(&log_of(&[&[1.0, 3.0], &[5.0, 7.0]])).unwrap(),
            vec![2.0, 6.0]
        );
        assert!(per_batch_median(&log_of(&[&[1.0, 3.0], &[5.0]])).is_err());
    }

    #[test]
    fn shortlist_examples() {
        let log = log_of(&[&[3.0, 1.0, 3.0, 2.0]]);
        let all = select_shortlist(&log, 4, Direction::Maximize).unwrap();
        assert_eq!(all.len(), 4);
        // Tie between trials 0 and 2 resolved by trial order.
        assert_eq!(all[0], Point::reals(&[0.0]));
        assert_eq!(all[1], Point::reals(&[2.0]));
        assert_eq!(
            select_shortlist(&log, 1, Direction::Minimize).unwrap(),
            vec![Point::reals(&[1.0])]
        );
        assert!(select_shortlist(&log, 5, Direction::Maximize).is_err());
    }

    #[test]
    fn hamming_examples() {
        let space = SearchSpace::new(vec![ParamDomain::categorical(2); 2]).unwrap();
        let same = [Point::indices(&[1, 0]), Point::indices(&[1, 0])];
        assert_eq!(hamming_histogram(&space, &same).unwrap(), BTreeMap::from([(0, 1)]));
        let three = [
            Point::indices(&[0, 0]),
            Point::indices(&[0, 1]),
            Point::indices(&[1, 1]),
        ];
        assert_eq!(
            hamming_histogram(&space, &three).unwrap(),
            BTreeMap::from([(1, 2), (2, 1)])
        );
        let continuous = SearchSpace::unit_cube(2).unwrap();
        assert!(matches!(
            hamming_histogram(&continuous, &[]),
            Err(Error::UnsupportedSpace(_))
        ));
    }

    #[test]
    fn trend_of_a_line() {
        let series: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let t = Trend::fit(&series).unwrap();
        assert!((t.slope - 2.0).abs() < 1e-12);
        assert!((t.intercept - 1.0).abs() < 1e-12);
        assert!(t.is_significant(0.05));
        let flat = Trend::fit(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]).unwrap();
        assert!(!flat.is_significant(0.05));
    }

    #[test]
    fn mean_stderr() {
        let m = MeanStderr::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        // sd = sqrt(5/3), stderr = sd / 2
        assert!((m.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(MeanStderr::of(&[7.0]).unwrap().stderr, 0.0);
    }

    proptest! {
        #[test]
        fn histogram_mass_is_pair_count(seed in any::<u64>(), n in 0usize..30, d in 1usize..6) {
            let space = SearchSpace::new(vec![ParamDomain::categorical(3); d]).unwrap();
            let mut rng = child_rng(seed, Purpose::Sampling, 0);
            let points: Vec<Point> = (0..n).map(|_| space.sample_prior(&mut rng)).collect();
            let hist = hamming_histogram(&space, &points).unwrap();
            prop_assert_eq!(hist.values().sum::<u64>(), (n * n.saturating_sub(1) / 2) as u64);
            prop_assert!(hist.keys().all(|&k| k <= d));
        }

        #[test]
        fn top_k_non_increasing_in_k(values in prop::collection::vec(-100.0f64..100.0, 1..30)) {
            let log = log_of(&[&values]);
            let means: Vec<f64> = (1..=values.len())
                .map(|k| top_k_mean(&log, k, Direction::Maximize).unwrap())
                .collect();
            for w in means.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }

        #[test]
        fn shortlist_dominates_the_rest(values in prop::collection::vec(-100.0f64..100.0, 1..30), frac in 0.0f64..1.0) {
            let log = log_of(&[&values]);
            let size = ((values.len() as f64) * frac) as usize;
            let short = select_shortlist(&log, size, Direction::Maximize).unwrap();
            let chosen: Vec<f64> = short.iter().map(|p| values[p.coords()[0].as_real().unwrap() as usize]).collect();
            let worst_chosen = chosen.iter().copied().fold(f64::INFINITY, f64::min);
            let mut rest = values.clone();
            for p in &short {
                rest[p.coords()[0].as_real().unwrap() as usize] = f64::NEG_INFINITY;
            }
            if size > 0 {
                prop_assert!(rest.iter().all(|&v| v <= worst_chosen));
            }
        }
    }
}
