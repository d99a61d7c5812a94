//! Parallel black-box optimization by successive halving and classification.
//!
//! A cascade of gradient-boosted binary classifiers is grown batch by batch;
//! each classifier is trained to separate the better half of the points that
//! survived the previous ones, and new candidates are drawn from the prior by
//! rejection sampling against the whole cascade.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`] search spaces, prior sampling and feature encoding
//! * [`objective`] the black-box objective interface and synthetic benchmarks
//! * [`gbt`] boosted regression trees for binary classification, plus k-fold CV
//! * [`cascade`] the classifier cascade and its rejection sampler
//! * [`shac`] the optimizer state machine (ask/tell)
//! * [`baseline`] random search
//! * [`trial`] the append-only trial log and its JSON-lines encoding
//! * [`harness`] the batch evaluation loop that wires an optimizer to an objective
//! * [`analysis`] post-run statistics

pub mod analysis;
pub mod baseline;
pub mod cascade;
mod error;
pub mod gbt;
pub mod harness;
pub mod objective;
pub mod rng;
pub mod shac;
pub mod space;
pub mod trial;

pub use baseline::RandomSearch;
pub use cascade::{Cascade, SampleOutcome};
pub use error::{Error, Result};
pub use gbt::{GbtConfig, GbtModel, Label, LabeledDataset};
pub use harness::{run_optimizer, BatchOptimizer, ProposedBatch, TellReport};
pub use objective::{as_maximization, BudgetConfig, Direction, Objective};
pub use shac::{derive_schedule, Schedule, Shac, ShacConfig, TrainingOutcome};
pub use space::{FeatureVector, ParamDomain, Point, SearchSpace, Value};
pub use trial::{AdoptionRecord, TrialLog, TrialRecord};
