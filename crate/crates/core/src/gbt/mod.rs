//! Binary classification with gradient boosted regression trees.
//!
//! Newton boosting on the logistic loss: each round grows one tree on the
//! per-row gradient `p - y` and hessian `p (1 - p)`, with leaf weights
//! `-G / (H + lambda)`. Splits are found by exact greedy search.

mod cv;
mod tree;

pub use cv::cross_val_accuracy;
pub use tree::RegressionTree;
use tree::FlatEnsemble;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::space::FeatureVector;
use tree::GrowContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    /// Target for the logistic loss.
    fn target(self) -> f64 {
        match self {
            Label::Negative => 0.0,
            Label::Positive => 1.0,
        }
    }

    /// Margin zero maps to `Positive`, so an empty model accepts everything.
    pub fn from_margin(margin: f64) -> Self {
        if margin >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// Feature rows with binary labels, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    feature_len: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
}

impl LabeledDataset {
    pub fn new(feature_len: usize) -> Self {
        LabeledDataset {
            feature_len,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn from_rows<I, R>(feature_len: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (R, Label)>,
        R: AsRef<[f64]>,
    {
        let mut ds = LabeledDataset::new(feature_len);
        for (x, y) in rows {
            ds.push(x.as_ref(), y)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, x: &[f64], label: Label) -> Result<()> {
        if x.len() != self.feature_len {
            return Err(Error::InvalidInput(format!(
                "row has {} features, dataset expects {}",
                x.len(),
                self.feature_len
            )));
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput("feature value is NaN".into()));
        }
        self.features.extend_from_slice(x);
        self.labels.push(label);
        Ok(())
    }

    pub fn push_vector(&mut self, x: &FeatureVector, label: Label) -> Result<()> {
        self.push(x.as_slice(), label)
    }

    pub fn feature_len(&self) -> usize {
        self.feature_len
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_len..(i + 1) * self.feature_len]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Both classes present.
    pub fn is_trainable(&self) -> bool {
        self.count(Label::Positive) > 0 && self.count(Label::Negative) > 0
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let mut out = LabeledDataset::new(self.feature_len);
        out.features.reserve(indices.len() * self.feature_len);
        for &i in indices {
            out.features.extend_from_slice(self.row(i));
            out.labels.push(self.labels[i]);
        }
        out
    }

    /// Fraction of rows the model labels correctly.
    pub fn accuracy(&self, model: &GbtModel) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let correct = (0..self.len())
            .filter(|&i| model.classify(self.row(i)) == self.labels[i])
            .count();
        correct as f64 / self.len() as f64
    }

    /// Mean logistic loss of the model's margins.
    pub fn logistic_loss(&self, model: &GbtModel) -> f64 {
        let total: f64 = (0..self.len())
            .map(|i| logistic_loss(model.margin_unchecked(self.row(i)), self.labels[i].target()))
            .sum();
        total / self.len() as f64
    }
}

/// Boosting hyperparameters. Defaults follow the usual boosted-tree library
/// defaults, with the round count fixed at 200.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l2_leaf_penalty: f64,
    pub min_child_hessian: f64,
    pub min_split_gain: f64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_rounds: 200,
            max_depth: 6,
            learning_rate: 0.3,
            l2_leaf_penalty: 1.0,
            min_child_hessian: 1.0,
            min_split_gain: 0.0,
        }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("l2_leaf_penalty", self.l2_leaf_penalty),
            ("min_child_hessian", self.min_child_hessian),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("gbt {name} must be positive, got {v}")));
            }
        }
        if self.n_rounds == 0 || self.max_depth == 0 {
            return Err(Error::Config("gbt n_rounds and max_depth must be positive".into()));
        }
        if !(self.min_split_gain.is_finite() && self.min_split_gain >= 0.0) {
            return Err(Error::Config(format!(
                "gbt min_split_gain must be >= 0, got {}",
                self.min_split_gain
            )));
        }
        Ok(())
    }
}

/// A trained boosted ensemble.
///
/// `margin(x) = base_margin + learning_rate * sum(tree(x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GbtModel {
    feature_len: usize,
    base_margin: f64,
    learning_rate: f64,
    trees: Vec<RegressionTree>,
    flat: FlatEnsemble,
    /// Entry `i` bounds `sum(tree_j(x))` over trees `j >= i`, from below.
    tail_low: Vec<f64>,
    /// ... and from above.
    tail_high: Vec<f64>,
}

impl GbtModel {
    /// Assemble a model from explicit trees.
    pub fn from_trees(
        feature_len: usize,
        base_margin: f64,
        learning_rate: f64,
        trees: Vec<RegressionTree>,
    ) -> Result<Self> {
        if let Some(f) = trees.iter().filter_map(RegressionTree::max_feature_index).max() {
            if f >= feature_len {
                return Err(Error::InvalidInput(format!(
                    "tree splits on feature {f} but inputs have {feature_len}"
                )));
            }
        }
        Ok(GbtModel {
            feature_len,
            base_margin,
            learning_rate,
            trees,
            flat: FlatEnsemble::default(),
            tail_low: Vec::new(),
            tail_high: Vec::new(),
        }
        .with_bounds())
    }

    fn with_bounds(mut self) -> Self {
        let n = self.trees.len();
        let (mut lo, mut hi) = (0.0, 0.0);
        self.tail_low = vec![0.0; n + 1];
        self.tail_high = vec![0.0; n + 1];
        for (i, t) in self.trees.iter().enumerate().rev() {
            let (a, b) = t.weight_range();
            lo += a;
            hi += b;
            self.tail_low[i] = lo;
            self.tail_high[i] = hi;
        }
        self.flat = FlatEnsemble::new(&self.trees);
        self
    }

    /// A model with no trees and the given constant margin.
    pub fn constant(feature_len: usize, margin: f64) -> Self {
        GbtModel {
            feature_len,
            base_margin: margin,
            learning_rate: 1.0,
            trees: Vec::new(),
            flat: FlatEnsemble::default(),
            tail_low: Vec::new(),
            tail_high: Vec::new(),
        }
        .with_bounds()
    }

    /// Accepts exactly the inputs with `x[feature] > threshold`.
    pub fn threshold_stub(feature_len: usize, feature: usize, threshold: f64) -> Result<Self> {
        GbtModel::from_trees(
            feature_len,
            0.0,
            1.0,
            vec![RegressionTree::stump(feature, threshold, -1.0, 1.0)],
        )
    }

    pub fn fit(dataset: &LabeledDataset, config: &GbtConfig) -> Result<Self> {
        Self::fit_with(dataset, config, |_, _| {})
    }

    /// Like [`GbtModel::fit`], calling `on_round(round, margins)` after each
    /// boosting round with the updated per-row training margins.
    pub fn fit_with<F>(dataset: &LabeledDataset, config: &GbtConfig, mut on_round: F) -> Result<Self>
    where
        F: FnMut(usize, &[f64]),
    {
        config.validate()?;
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !dataset.is_trainable() {
            return Err(Error::DegenerateDataset);
        }

        let n = dataset.len();
        let targets: Vec<f64> = dataset.labels.iter().map(|l| l.target()).collect();
        let rows: Vec<usize> = (0..n).collect();
        let mut model = GbtModel {
            feature_len: dataset.feature_len,
            base_margin: 0.0,
            learning_rate: config.learning_rate,
            trees: Vec::with_capacity(config.n_rounds),
            flat: FlatEnsemble::default(),
            tail_low: Vec::new(),
            tail_high: Vec::new(),
        };
        let mut margins = vec![model.base_margin; n];
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];

        for round in 0..config.n_rounds {
            for i in 0..n {
                let p = sigmoid(margins[i]);
                grad[i] = p - targets[i];
                hess[i] = p * (1.0 - p);
            }
            let ctx = GrowContext {
                features: &dataset.features,
                n_features: dataset.feature_len,
                grad: &grad,
                hess: &hess,
                config,
            };
            let tree = ctx.grow(&rows);
            for (i, m) in margins.iter_mut().enumerate() {
                *m += config.learning_rate * tree.predict(dataset.row(i));
            }
            model.trees.push(tree);
            on_round(round, &margins);
        }
        Ok(model.with_bounds())
    }

    pub fn feature_len(&self) -> usize {
        self.feature_len
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn base_margin(&self) -> f64 {
        self.base_margin
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// The model made of the first `rounds` trees.
    pub fn truncated(&self, rounds: usize) -> GbtModel {
        GbtModel {
            trees: self.trees[..rounds.min(self.trees.len())].to_vec(),
            ..self.clone()
        }
        .with_bounds()
    }

    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.margin_unchecked(x))
    }

    #[inline]
    pub(crate) fn margin_unchecked(&self, x: &[f64]) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.flat.n_trees() {
            sum += self.flat.predict_tree(i, x);
        }
        self.base_margin + self.learning_rate * sum
    }

    pub fn predict_label(&self, x: &FeatureVector) -> Result<Label> {
        self.check_len(x.as_slice())?;
        Ok(self.classify(x.as_slice()))
    }

    /// Same label as `Label::from_margin(margin(x))`, but stops summing once
    /// the trees left cannot change the sign. The stopping test keeps a
    /// relative slack far above the rounding error of the full sum.
    #[inline]
    pub(crate) fn classify(&self, x: &[f64]) -> Label {
        const SLACK: f64 = 1e-9;
        const CHECK_EVERY: usize = 4;
        let lr = self.learning_rate;
        let base = self.base_margin;
        let mut sum = 0.0;
        for i in 0..self.flat.n_trees() {
            if i % CHECK_EVERY == 0 {
                let (a, b) = (lr * (sum + self.tail_low[i]), lr * (sum + self.tail_high[i]));
                let (low, high) = if a <= b { (base + a, base + b) } else { (base + b, base + a) };
                let slack = SLACK
                    * (base.abs()
                        + lr.abs() * (sum.abs() + self.tail_low[i].abs() + self.tail_high[i].abs()));
                if low > slack {
                    return Label::Positive;
                }
                if high < -slack {
                    return Label::Negative;
                }
            }
            sum += self.flat.predict_tree(i, x);
        }
        Label::from_margin(base + lr * sum)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_len {
            return Err(Error::InvalidInput(format!(
                "model expects {} features, got {}",
                self.feature_len,
                x.len()
            )));
        }
        Ok(())
    }

    /// Debug dump of the ensemble as nested JSON.
    pub fn to_json(&self) -> Json {
        json!({
            "feature_len": self.feature_len,
            "base_margin": self.base_margin,
            "learning_rate": self.learning_rate,
            "trees": self.trees.iter().map(RegressionTree::to_json).collect::<Vec<_>>(),
        })
    }
}

fn sigmoid(m: f64) -> f64 {
    1.0 / (1.0 + (-m).exp())
}

/// `log(1 + e^m) - y m`, computed without overflow.
fn logistic_loss(m: f64, y: f64) -> f64 {
    let softplus = if m > 0.0 {
        m + (-m).exp().ln_1p()
    } else {
        m.exp().ln_1p()
    };
    softplus - y * m
}
