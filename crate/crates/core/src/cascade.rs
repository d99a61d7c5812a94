//! The classifier cascade and its rejection sampler.

use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::gbt::{GbtModel, Label};
use crate::space::{Point, SearchSpace};

/// Ordered classifiers over one search space. A point passes iff every
/// classifier labels it positive; classifiers are consulted in adoption
/// order and evaluation stops at the first rejection.
#[derive(Clone, Debug)]
pub struct Cascade {
    space: SearchSpace,
    classifiers: Vec<Arc<GbtModel>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome {
    pub point: Point,
    /// Prior draws consumed, including the accepted one.
    pub attempts: u64,
}

impl Cascade {
    pub fn new(space: SearchSpace) -> Self {
        Cascade {
            space,
            classifiers: Vec::new(),
        }
    }

    pub fn with_classifiers(space: SearchSpace, models: Vec<GbtModel>) -> Result<Self> {
        let mut cascade = Cascade::new(space);
        for m in models {
            cascade.push(m)?;
        }
        Ok(cascade)
    }

    pub fn push(&mut self, model: GbtModel) -> Result<()> {
        if model.feature_len() != self.space.feature_len() {
            return Err(Error::InvalidInput(format!(
                "classifier expects {} features, space encodes {}",
                model.feature_len(),
                self.space.feature_len()
            )));
        }
        self.classifiers.push(Arc::new(model));
        Ok(())
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.classifiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classifiers.is_empty()
    }

    pub fn classifiers(&self) -> impl Iterator<Item = &GbtModel> {
        self.classifiers.iter().map(|c| c.as_ref())
    }

    /// The cascade made of the first `n` classifiers.
    pub fn prefix(&self, n: usize) -> Cascade {
        Cascade {
            space: self.space.clone(),
            classifiers: self.classifiers[..n.min(self.len())].to_vec(),
        }
    }

    pub fn passes(&self, point: &Point) -> Result<bool> {
        let x = self.space.encode(point)?;
        Ok(self.passes_features(x.as_slice()))
    }

    fn passes_features(&self, x: &[f64]) -> bool {
        self.classifiers
            .iter()
            .all(|c| c.classify(x) == Label::Positive)
    }

    /// Draw from the prior until a point passes, giving up after
    /// `max_attempts` draws.
    pub fn sample_accepted<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
        max_attempts: u64,
    ) -> Result<SampleOutcome> {
        if max_attempts == 0 {
            return Err(Error::Config("max_attempts must be at least 1".into()));
        }
        let mut features = Vec::with_capacity(self.space.feature_len());
        for attempts in 1..=max_attempts {
            let point = self.space.sample_prior(rng);
            self.space.encode_into(&point, &mut features);
            if self.passes_features(&features) {
                return Ok(SampleOutcome { point, attempts });
            }
        }
        Err(Error::SamplingExhausted {
            attempts: max_attempts,
        })
    }

    /// Fraction of `n` fresh prior draws that pass.
    pub fn pass_rate<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> f64 {
        let mut features = Vec::with_capacity(self.space.feature_len());
        let mut passed = 0usize;
        for _ in 0..n {
            let point = self.space.sample_prior(rng);
            self.space.encode_into(&point, &mut features);
            if self.passes_features(&features) {
                passed += 1;
            }
        }
        passed as f64 / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{child_rng, Purpose};
    use proptest::prelude::*;

    /// `k` classifiers each accepting the upper half of their own axis.
    fn half_stubs(k: usize) -> Cascade {
        let space = SearchSpace::unit_cube(k).unwrap();
        let models = (0..k)
            .map(|f| GbtModel::threshold_stub(k, f, 0.5).unwrap())
            .collect();
        Cascade::with_classifiers(space, models).unwrap()
    }

    #[test]
    fn empty_cascade_accepts_first_draw() {
        let cascade = Cascade::new(SearchSpace::unit_cube(3).unwrap());
        let mut rng = child_rng(0, Purpose::Sampling, 0);
        for _ in 0..100 {
            let out = cascade.sample_accepted(&mut rng, 1).unwrap();
            assert_eq!(out.attempts, 1);
            assert!(cascade.passes(&out.point).unwrap());
        }
    }

    #[test]
    fn always_negative_classifier_blocks_everything() {
        let space = SearchSpace::unit_cube(2).unwrap();
        let cascade = Cascade::with_classifiers(space, vec![GbtModel::constant(2, -1.0)]).unwrap();
        let mut rng = child_rng(0, Purpose::Sampling, 0);
        assert_eq!(cascade.pass_rate(&mut rng, 1000), 0.0);
        assert!(matches!(
            cascade.sample_accepted(&mut rng, 50),
            Err(Error::SamplingExhausted { attempts: 50 })
        ));
    }

    #[test]
    fn independent_halves_pass_at_two_to_minus_k() {
        let n = 100_000;
        for k in 1..=4 {
            let cascade = half_stubs(k);
            let p = 0.5f64.powi(k as i32);
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            let rate = cascade.pass_rate(&mut child_rng(k as u64, Purpose::Sampling, 0), n);
            // 3 sigma per check, Bonferroni-widened for the four values of k.
            assert!((rate - p).abs() <= 3.4 * sigma, "k={k} rate={rate} p={p}");
        }
    }

    #[test]
    fn half_rejecting_cascade_costs_two_draws() {
        let cascade = half_stubs(1);
        let mut rng = child_rng(2, Purpose::Sampling, 0);
        let calls = 10_000;
        let total: u64 = (0..calls)
            .map(|_| cascade.sample_accepted(&mut rng, 1 << 20).unwrap().attempts)
            .sum();
        let mean = total as f64 / calls as f64;
        assert!((mean - 2.0).abs() < 0.1, "mean attempts {mean}");
    }

    #[test]
    fn eighteen_stubs_cost_two_to_the_eighteen() {
        let cascade = half_stubs(18);
        let mut rng = child_rng(3, Purpose::Sampling, 0);
        let calls = 100;
        let total: u64 = (0..calls)
            .map(|_| cascade.sample_accepted(&mut rng, 1 << 26).unwrap().attempts)
            .sum();
        let mean = total as f64 / calls as f64;
        let expected = (1u64 << 18) as f64;
        // One geometric draw has sd ~ mean; 100 calls leave ~10% relative sd.
        assert!((mean / expected - 1.0).abs() < 0.35, "mean attempts {mean}");
    }

    #[test]
    fn classifier_width_must_match_space() {
        let mut cascade = Cascade::new(SearchSpace::unit_cube(2).unwrap());
        assert!(cascade.push(GbtModel::constant(3, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn longer_cascade_passes_a_subset(seed in any::<u64>(), k in 1usize..6) {
            let full = half_stubs(k);
            let shorter = full.prefix(k - 1);
            let mut rng = child_rng(seed, Purpose::Sampling, 0);
            for _ in 0..200 {
                let p = full.space().sample_prior(&mut rng);
                if full.passes(&p).unwrap() {
                    prop_assert!(shorter.passes(&p).unwrap());
                }
            }
        }
    }
}
