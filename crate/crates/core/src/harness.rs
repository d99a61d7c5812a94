//! Synchronous batch evaluation loop shared by every optimizer.

use std::panic::{self, AssertUnwindSafe};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objective::{BudgetConfig, Objective};
use crate::shac::TrainingOutcome;
use crate::space::{Point, SearchSpace};
use crate::trial::{AdoptionRecord, LogEntry, TrialLog, TrialRecord};

/// One batch of candidates handed out by `ask`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProposedBatch {
    pub batch: usize,
    pub first_trial: usize,
    pub points: Vec<Point>,
    /// Prior draws consumed per point.
    pub attempts: Vec<u64>,
    /// Number of classifiers each point was checked against.
    pub cascade_sizes: Vec<usize>,
}

impl ProposedBatch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TellReport {
    pub batch: usize,
    /// Buffer size when the training decision was made.
    pub buffer_len: usize,
    pub training: TrainingOutcome,
}

/// Ask/tell protocol over synchronous batches. Values passed to `tell` are on
/// the maximization scale.
pub trait BatchOptimizer {
    fn space(&self) -> &SearchSpace;

    fn budget(&self) -> BudgetConfig;

    /// The next batch, or `None` once the budget is spent.
    fn ask(&mut self) -> Result<Option<ProposedBatch>>;

    /// Results for the outstanding batch, in the order `ask` returned them.
    fn tell(&mut self, results: &[(Point, f64)]) -> Result<TellReport>;
}

/// Check that `results` answer `outstanding` exactly.
pub(crate) fn check_results(outstanding: &ProposedBatch, results: &[(Point, f64)]) -> Result<()> {
    if results.len() != outstanding.len() {
        return Err(Error::Protocol(format!(
            "batch {} has {} points, got {} results",
            outstanding.batch,
            outstanding.len(),
            results.len()
        )));
    }
    for (i, ((p, y), q)) in results.iter().zip(&outstanding.points).enumerate() {
        if p != q {
            return Err(Error::Protocol(format!(
                "result {i} of batch {} is for a point that was not proposed there",
                outstanding.batch
            )));
        }
        if y.is_nan() {
            return Err(Error::Protocol(format!(
                "result {i} of batch {} is NaN",
                outstanding.batch
            )));
        }
    }
    Ok(())
}

/// Drive `optimizer` against `objective` until the budget is spent.
pub fn run_optimizer<O>(optimizer: &mut O, objective: &dyn Objective) -> Result<TrialLog>
where
    O: BatchOptimizer + ?Sized,
{
    let mut log = TrialLog::new();
    run_optimizer_with(optimizer, objective, |entry| log.push(entry.clone()))?;
    Ok(log)
}

/// Like [`run_optimizer`], handing each log entry to `sink` as it is
/// produced. Each batch is evaluated on a pool of at most `W` threads and
/// results are reassembled in proposal order before `tell`.
pub fn run_optimizer_with<O, F>(optimizer: &mut O, objective: &dyn Objective, mut sink: F) -> Result<()>
where
    O: BatchOptimizer + ?Sized,
    F: FnMut(&LogEntry) -> Result<()>,
{
    if optimizer.space() != objective.space() {
        return Err(Error::Config(format!(
            "optimizer space does not match objective {}",
            objective.name()
        )));
    }
    let workers = optimizer.budget().workers;
    let threads = workers.min(rayon::current_num_threads().max(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let direction = objective.direction();

    loop {
        let Some(batch) = optimizer.ask()? else {
            return Ok(());
        };
        let values = pool.install(|| evaluate_batch(objective, &batch))?;

        for (i, (point, &value)) in batch.points.iter().zip(&values).enumerate() {
            sink(&LogEntry::Trial(TrialRecord {
                trial: batch.first_trial + i,
                batch: batch.batch,
                point: point.clone(),
                value,
                attempts: batch.attempts[i],
                cascade_size: batch.cascade_sizes[i],
            }))?;
        }

        let results: Vec<(Point, f64)> = batch
            .points
            .into_iter()
            .zip(values.iter().map(|&y| direction.to_max(y)))
            .collect();
        let report = optimizer.tell(&results)?;
        if let TrainingOutcome::Adopted {
            cascade_size,
            cv_accuracy,
        } = report.training
        {
            sink(
                &AdoptionRecord {
                    batch: report.batch,
                    cascade_size,
                    cv_accuracy,
                }
                .into(),
            )?;
        }
    }
}

fn evaluate_batch(objective: &dyn Objective, batch: &ProposedBatch) -> Result<Vec<f64>> {
    let outcomes: Vec<Result<f64>> = batch
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let trial = batch.first_trial + i;
            let y = panic::catch_unwind(AssertUnwindSafe(|| objective.evaluate(p)))
                .map_err(|payload| Error::EvaluationPanicked {
                    trial,
                    message: panic_message(payload.as_ref()),
                })??;
            if !y.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "objective returned non-finite value {y} at trial {trial}"
                )));
            }
            Ok(y)
        })
        .collect();
    // First failure in proposal order.
    outcomes.into_iter().collect()
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".into()
    }
}
