//! The SHAC optimizer: a growing cascade of classifiers, each trained to keep
//! the better half of the points that survived the ones before it.
//!
//! Batches of `W` points are drawn from the prior by rejection sampling
//! against the current cascade. Evaluated points accumulate in a buffer; once
//! it holds at least `T_c` points a classifier is trained on the
//! median-binarized buffer and, if it clears the optional cross-validation
//! gate, appended to the cascade (and the buffer is cleared). After `K`
//! adoptions the cascade is frozen and only used for sampling.
//!
//! Objective values are consumed only through comparisons with the buffer
//! median, so any strictly increasing transform of the objective yields the
//! same sequence of proposals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{Cascade, SampleOutcome};
use crate::error::{Error, Result};
use crate::gbt::{cross_val_accuracy, GbtConfig, GbtModel, Label, LabeledDataset};
use crate::harness::{check_results, BatchOptimizer, ProposedBatch, TellReport};
use crate::objective::BudgetConfig;
use crate::rng::{child_rng, Purpose};
use crate::space::{Point, SearchSpace};

pub const DEFAULT_MAX_CLASSIFIERS: usize = 18;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShacConfig {
    pub budget: BudgetConfig,
    pub max_classifiers_cap: usize,
    pub cv_folds: usize,
    pub cv_enabled: bool,
    pub cv_threshold: f64,
    pub gbt: GbtConfig,
    /// Rejection-sampling cap per point; `None` means `2^(K + 4)`.
    pub max_attempts: Option<u64>,
    pub seed: u64,
}

impl ShacConfig {
    pub fn new(budget: BudgetConfig, seed: u64) -> Self {
        ShacConfig {
            budget,
            max_classifiers_cap: DEFAULT_MAX_CLASSIFIERS,
            cv_folds: 5,
            cv_enabled: true,
            cv_threshold: 0.5,
            gbt: GbtConfig::default(),
            max_attempts: None,
            seed,
        }
    }

    /// Setting for cheap closed-form objectives: the per-classifier buffers
    /// are too small for a meaningful cross-validation estimate, so the gate
    /// is off.
    pub fn synthetic(budget: BudgetConfig, seed: u64) -> Self {
        ShacConfig {
            cv_enabled: false,
            ..ShacConfig::new(budget, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        self.gbt.validate()?;
        if self.cv_enabled && self.cv_folds < 2 {
            return Err(Error::Config(format!("cv_folds must be >= 2, got {}", self.cv_folds)));
        }
        if !(0.0..=1.0).contains(&self.cv_threshold) {
            return Err(Error::Config(format!(
                "cv_threshold must lie in [0, 1], got {}",
                self.cv_threshold
            )));
        }
        if self.max_attempts == Some(0) {
            return Err(Error::Config("max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Batch count `m`, classifier cap `K` and classifier budget `T_c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub batches: usize,
    pub max_classifiers: usize,
    pub classifier_budget: usize,
}

/// `m = N / W`, `K = min(m - 1, cap)`, `T_c = W * floor(N / (W (K + 1)))`.
pub fn derive_schedule(budget: BudgetConfig, cap: usize) -> Result<Schedule> {
    budget.validate()?;
    let n = budget.total;
    let w = budget.workers;
    let batches = n / w;
    let max_classifiers = (batches - 1).min(cap);
    let classifier_budget = w * (n / (w * (max_classifiers + 1)));
    Ok(Schedule {
        batches,
        max_classifiers,
        classifier_budget,
    })
}

/// What happened to the classifier pipeline after a `tell`.
#[derive(Clone, Debug, PartialEq)]
pub enum TrainingOutcome {
    /// Buffer below `T_c`.
    NotDue,
    Adopted {
        cascade_size: usize,
        cv_accuracy: Option<f64>,
    },
    /// Cross-validation gate failed (or had too few rows); buffer retained.
    GateRejected { cv_accuracy: Option<f64> },
    /// Every buffered point got the same label; buffer retained.
    DegenerateBuffer,
    Frozen,
}

/// Sample median: middle value, or the mean of the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Some(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        sorted[n / 2 - 1] / 2.0 + sorted[n / 2] / 2.0
    })
}

/// Label each buffered point by comparing its value with the buffer median;
/// values equal to the median are labelled positive.
pub fn binarize(space: &SearchSpace, buffer: &[(Point, f64)]) -> Result<LabeledDataset> {
    let values: Vec<f64> = buffer.iter().map(|(_, y)| *y).collect();
    let Some(med) = median(&values) else {
        return Err(Error::EmptyDataset);
    };
    let mut ds = LabeledDataset::new(space.feature_len());
    for (p, y) in buffer {
        let label = if *y >= med { Label::Positive } else { Label::Negative };
        ds.push_vector(&space.encode(p)?, label)?;
    }
    if !ds.is_trainable() {
        return Err(Error::DegenerateBuffer);
    }
    Ok(ds)
}

#[derive(Clone, Debug)]
pub struct Shac {
    config: ShacConfig,
    schedule: Schedule,
    max_attempts: u64,
    cascade: Cascade,
    buffer: Vec<(Point, f64)>,
    trials_issued: usize,
    batches_completed: usize,
    frozen: bool,
    training_attempts: u64,
    outstanding: Option<ProposedBatch>,
}

impl Shac {
    pub fn new(space: SearchSpace, config: ShacConfig) -> Result<Self> {
        config.validate()?;
        let schedule = derive_schedule(config.budget, config.max_classifiers_cap)?;
        let max_attempts = config
            .max_attempts
            .unwrap_or(1u64 << (schedule.max_classifiers + 4).min(62));
        Ok(Shac {
            frozen: schedule.max_classifiers == 0,
            config,
            schedule,
            max_attempts,
            cascade: Cascade::new(space),
            buffer: Vec::new(),
            trials_issued: 0,
            batches_completed: 0,
            training_attempts: 0,
            outstanding: None,
        })
    }

    pub fn config(&self) -> &ShacConfig {
        &self.config
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn cascade(&self) -> &Cascade {
        &self.cascade
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    pub fn trials_issued(&self) -> usize {
        self.trials_issued
    }

    pub fn batches_completed(&self) -> usize {
        self.batches_completed
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn max_attempts(&self) -> u64 {
        self.max_attempts
    }

    /// Rejection-sample the point for `trial`. If the full cascade exhausts
    /// its attempts, retry once without the most recent classifier.
    fn sample_trial(&self, trial: usize) -> Result<(SampleOutcome, usize)> {
        let mut rng = child_rng(self.config.seed, Purpose::Sampling, trial as u64);
        match self.cascade.sample_accepted(&mut rng, self.max_attempts) {
            Ok(out) => Ok((out, self.cascade.len())),
            Err(Error::SamplingExhausted { attempts }) if !self.cascade.is_empty() => {
                let relaxed = self.cascade.prefix(self.cascade.len() - 1);
                match relaxed.sample_accepted(&mut rng, self.max_attempts) {
                    Ok(mut out) => {
                        out.attempts += attempts;
                        Ok((out, relaxed.len()))
                    }
                    Err(Error::SamplingExhausted { attempts: more }) => {
                        Err(Error::SamplingExhausted {
                            attempts: attempts + more,
                        })
                    }
                    Err(e) => Err(e),
                }
            }
            Err(e) => Err(e),
        }
    }

    fn maybe_train(&mut self) -> Result<TrainingOutcome> {
        if self.frozen {
            return Ok(TrainingOutcome::Frozen);
        }
        if self.buffer.len() < self.schedule.classifier_budget {
            return Ok(TrainingOutcome::NotDue);
        }
        let dataset = match binarize(self.cascade.space(), &self.buffer) {
            Ok(ds) => ds,
            Err(Error::DegenerateBuffer) => return Ok(TrainingOutcome::DegenerateBuffer),
            Err(e) => return Err(e),
        };

        let cv_accuracy = if self.config.cv_enabled {
            let mut rng = child_rng(
                self.config.seed,
                Purpose::CrossValidation,
                self.training_attempts,
            );
            self.training_attempts += 1;
            match cross_val_accuracy(&dataset, self.config.cv_folds, &self.config.gbt, &mut rng) {
                Ok(acc) if acc >= self.config.cv_threshold => Some(acc),
                Ok(acc) => {
                    return Ok(TrainingOutcome::GateRejected {
                        cv_accuracy: Some(acc),
                    })
                }
                Err(Error::InsufficientData { .. }) => {
                    return Ok(TrainingOutcome::GateRejected { cv_accuracy: None })
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };

        let model = GbtModel::fit(&dataset, &self.config.gbt)?;
        self.cascade.push(model)?;
        self.buffer.clear();
        if self.cascade.len() >= self.schedule.max_classifiers {
            self.frozen = true;
        }
        Ok(TrainingOutcome::Adopted {
            cascade_size: self.cascade.len(),
            cv_accuracy,
        })
    }
}

impl BatchOptimizer for Shac {
    fn space(&self) -> &SearchSpace {
        self.cascade.space()
    }

    fn budget(&self) -> BudgetConfig {
        self.config.budget
    }

    fn ask(&mut self) -> Result<Option<ProposedBatch>> {
        if self.outstanding.is_some() {
            return Err(Error::Protocol("a batch is already outstanding".into()));
        }
        let w = self.config.budget.workers;
        if self.trials_issued + w > self.config.budget.total {
            return Ok(None);
        }
        let first = self.trials_issued;
        let sampled: Vec<(SampleOutcome, usize)> = (first..first + w)
            .into_par_iter()
            .map(|t| self.sample_trial(t))
            .collect::<Result<_>>()?;

        let mut batch = ProposedBatch {
            batch: self.batches_completed,
            first_trial: first,
            points: Vec::with_capacity(w),
            attempts: Vec::with_capacity(w),
            cascade_sizes: Vec::with_capacity(w),
        };
        for (out, size) in sampled {
            batch.points.push(out.point);
            batch.attempts.push(out.attempts);
            batch.cascade_sizes.push(size);
        }
        self.trials_issued += w;
        self.outstanding = Some(batch.clone());
        Ok(Some(batch))
    }

    fn tell(&mut self, results: &[(Point, f64)]) -> Result<TellReport> {
        let Some(outstanding) = self.outstanding.as_ref() else {
            return Err(Error::Protocol("tell without an outstanding batch".into()));
        };
        check_results(outstanding, results)?;
        let batch = outstanding.batch;
        self.outstanding = None;

        self.buffer.extend(results.iter().cloned());
        self.batches_completed += 1;
        let buffer_len = self.buffer.len();
        let training = self.maybe_train()?;
        Ok(TellReport {
            batch,
            buffer_len,
            training,
        })
    }
}
