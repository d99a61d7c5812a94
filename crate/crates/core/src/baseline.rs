//! Random search. Draws from the same per-trial prior streams as SHAC, so
//! under one seed the two agree on every point proposed before SHAC adopts
//! its first classifier.

use crate::error::{Error, Result};
use crate::harness::{check_results, BatchOptimizer, ProposedBatch, TellReport};
use crate::objective::BudgetConfig;
use crate::rng::{child_rng, Purpose};
use crate::shac::TrainingOutcome;
use crate::space::{Point, SearchSpace};

#[derive(Clone, Debug)]
pub struct RandomSearch {
    space: SearchSpace,
    budget: BudgetConfig,
    seed: u64,
    trials_issued: usize,
    batches_completed: usize,
    outstanding: Option<ProposedBatch>,
}

impl RandomSearch {
    pub fn new(space: SearchSpace, budget: BudgetConfig, seed: u64) -> Result<Self> {
        budget.validate()?;
        Ok(RandomSearch {
            space,
            budget,
            seed,
            trials_issued: 0,
            batches_completed: 0,
            outstanding: None,
        })
    }

    /// Random search with twice the evaluations, at the same batch width.
    pub fn doubled(space: SearchSpace, budget: BudgetConfig, seed: u64) -> Result<Self> {
        let doubled = BudgetConfig::new(2 * budget.total, budget.workers)?;
        RandomSearch::new(space, doubled, seed)
    }

    pub fn trials_issued(&self) -> usize {
        self.trials_issued
    }
}

impl BatchOptimizer for RandomSearch {
    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn budget(&self) -> BudgetConfig {
        self.budget
    }

    fn ask(&mut self) -> Result<Option<ProposedBatch>> {
        if self.outstanding.is_some() {
            return Err(Error::Protocol("a batch is already outstanding".into()));
        }
        let w = self.budget.workers;
        if self.trials_issued + w > self.budget.total {
            return Ok(None);
        }
        let first = self.trials_issued;
        let points: Vec<Point> = (first..first + w)
            .map(|t| {
                let mut rng = child_rng(self.seed, Purpose::Sampling, t as u64);
                self.space.sample_prior(&mut rng)
            })
            .collect();
        let batch = ProposedBatch {
            batch: self.batches_completed,
            first_trial: first,
            points,
            attempts: vec![1; w],
            cascade_sizes: vec![0; w],
        };
        self.trials_issued += w;
        self.outstanding = Some(batch.clone());
        Ok(Some(batch))
    }

    fn tell(&mut self, results: &[(Point, f64)]) -> Result<TellReport> {
        let Some(outstanding) = self.outstanding.take() else {
            return Err(Error::Protocol("tell without an outstanding batch".into()));
        };
        if let Err(e) = check_results(&outstanding, results) {
            self.outstanding = Some(outstanding);
            return Err(e);
        }
        self.batches_completed += 1;
        Ok(TellReport {
            batch: outstanding.batch,
            buffer_len: 0,
            training: TrainingOutcome::NotDue,
        })
    }
}
