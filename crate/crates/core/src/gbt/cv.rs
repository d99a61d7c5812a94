use rand::seq::SliceRandom;
use rand::Rng;

use super::{GbtConfig, GbtModel, LabeledDataset};
use crate::error::{Error, Result};

/// Mean held-out 0/1 accuracy over `k` folds.
///
/// Rows are shuffled once with `rng` and cut into `k` contiguous folds whose
/// sizes differ by at most one. Folds are not stratified: when a training
/// split happens to hold a single class, that fold is scored with a constant
/// predictor of the class present.
pub fn cross_val_accuracy<R: Rng + ?Sized>(
    dataset: &LabeledDataset,
    k: usize,
    config: &GbtConfig,
    rng: &mut R,
) -> Result<f64> {
    if k < 2 {
        return Err(Error::Config(format!("cross-validation needs k >= 2, got {k}")));
    }
    let n = dataset.len();
    if n < k {
        return Err(Error::InsufficientData { rows: n, folds: k });
    }
    if !dataset.is_trainable() {
        return Err(Error::DegenerateDataset);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut total = 0.0;
    for fold in 0..k {
        let (start, end) = (fold * n / k, (fold + 1) * n / k);
        let held_out = dataset.subset(&order[start..end]);
        let train_idx: Vec<usize> = order[..start].iter().chain(&order[end..]).copied().collect();
        let train = dataset.subset(&train_idx);

        let model = match GbtModel::fit(&train, config) {
            Ok(m) => m,
            Err(Error::DegenerateDataset) => {
                let only = train.labels()[0];
                GbtModel::constant(dataset.feature_len(), only.sign())
            }
            Err(e) => return Err(e),
        };
        total += held_out.accuracy(&model);
    }
    Ok(total / k as f64)
}
