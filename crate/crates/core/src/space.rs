//! Search spaces with a uniform prior, sampled points and their feature
//! encoding.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The domain of one search dimension. Every domain carries a uniform prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamDomain {
    Continuous { low: f64, high: f64 },
    /// An ordered grid of numeric values; points hold an index into it.
    Ordinal { values: Vec<f64> },
    Categorical { n_choices: usize },
}

impl ParamDomain {
    pub fn continuous(low: f64, high: f64) -> Self {
        ParamDomain::Continuous { low, high }
    }

    pub fn ordinal(values: impl Into<Vec<f64>>) -> Self {
        ParamDomain::Ordinal {
            values: values.into(),
        }
    }

    pub fn categorical(n_choices: usize) -> Self {
        ParamDomain::Categorical { n_choices }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ParamDomain::Continuous { low, high } => {
                if !low.is_finite() || !high.is_finite() {
                    return Err(Error::InvalidSpace(format!(
                        "continuous bounds must be finite, got [{low}, {high}]"
                    )));
                }
                if low >= high {
                    return Err(Error::InvalidSpace(format!(
                        "continuous bounds require low < high, got [{low}, {high}]"
                    )));
                }
            }
            ParamDomain::Ordinal { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidSpace("ordinal grid is empty".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSpace("ordinal grid has a non-finite value".into()));
                }
                if values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidSpace(
                        "ordinal grid must be strictly increasing".into(),
                    ));
                }
            }
            ParamDomain::Categorical { n_choices } => {
                if *n_choices < 2 {
                    return Err(Error::InvalidSpace(format!(
                        "categorical needs at least 2 choices, got {n_choices}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of features this dimension contributes to an encoding.
    pub fn encoded_len(&self) -> usize {
        match self {
            ParamDomain::Continuous { .. } | ParamDomain::Ordinal { .. } => 1,
            ParamDomain::Categorical { n_choices } => *n_choices,
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, ParamDomain::Continuous { .. })
    }

    fn contains(&self, value: &Value) -> bool {
        match (self, value) {
            (ParamDomain::Continuous { low, high }, Value::Real(x)) => *low <= *x && *x <= *high,
            (ParamDomain::Ordinal { values }, Value::Index(i)) => *i < values.len(),
            (ParamDomain::Categorical { n_choices }, Value::Index(i)) => i < n_choices,
            _ => false,
        }
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Value {
        // Exactly one u64 per dimension, whatever the domain.
        let bits = rng.next_u64();
        match self {
            ParamDomain::Continuous { low, high } => {
                let u = unit_interval(bits);
                // Rounding can land a hair above `high` when the interval is wide.
                Value::Real((low + u * (high - low)).min(*high))
            }
            ParamDomain::Ordinal { values } => Value::Index(bounded_index(bits, values.len())),
            ParamDomain::Categorical { n_choices } => Value::Index(bounded_index(bits, *n_choices)),
        }
    }
}

/// Uniform draw in [0, 1) from the top 53 bits.
fn unit_interval(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Multiply-shift reduction of a u64 onto `0..n`.
fn bounded_index(bits: u64, n: usize) -> usize {
    ((bits as u128 * n as u128) >> 64) as usize
}

/// One coordinate of a [`Point`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    /// Index into an ordinal grid or a categorical choice.
    Index(usize),
    Real(f64),
}

impl Value {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(x) => Some(*x),
            Value::Index(_) => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            Value::Index(i) => Some(*i),
            Value::Real(_) => None,
        }
    }
}

/// A configuration drawn from a [`SearchSpace`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<Value>,
}

impl Point {
    pub fn new(coords: Vec<Value>) -> Self {
        Point { coords }
    }

    pub fn reals(xs: &[f64]) -> Self {
        Point {
            coords: xs.iter().map(|&x| Value::Real(x)).collect(),
        }
    }

    pub fn indices(ix: &[usize]) -> Self {
        Point {
            coords: ix.iter().map(|&i| Value::Index(i)).collect(),
        }
    }

    pub fn coords(&self) -> &[Value] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Classifier input derived from a [`Point`].
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// An ordered, fixed list of parameter domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ParamDomain>", into = "Vec<ParamDomain>")]
pub struct SearchSpace {
    dims: Vec<ParamDomain>,
    encoded_len: usize,
}

impl SearchSpace {
    pub fn new(dims: Vec<ParamDomain>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSpace("a search space needs at least one dimension".into()));
        }
        for (i, d) in dims.iter().enumerate() {
            d.validate()
                .map_err(|e| Error::InvalidSpace(format!("dimension {i}: {e}")))?;
        }
        let encoded_len = dims.iter().map(ParamDomain::encoded_len).sum();
        Ok(SearchSpace { dims, encoded_len })
    }

    /// The unit hypercube `[0, 1]^dim`.
    pub fn unit_cube(dim: usize) -> Result<Self> {
        SearchSpace::new(vec![ParamDomain::continuous(0.0, 1.0); dim])
    }

    pub fn dims(&self) -> &[ParamDomain] {
        &self.dims
    }

    pub fn dimensionality(&self) -> usize {
        self.dims.len()
    }

    pub fn feature_len(&self) -> usize {
        self.encoded_len
    }

    pub fn is_discrete(&self) -> bool {
        self.dims.iter().all(ParamDomain::is_discrete)
    }

    pub fn validate_point(&self, point: &Point) -> Result<()> {
        if point.len() != self.dims.len() {
            return Err(Error::InvalidPoint(format!(
                "expected {} coordinates, got {}",
                self.dims.len(),
                point.len()
            )));
        }
        for (i, (d, v)) in self.dims.iter().zip(point.coords()).enumerate() {
            if !d.contains(v) {
                return Err(Error::InvalidPoint(format!(
                    "coordinate {i} = {v:?} is outside {d:?}"
                )));
            }
        }
        Ok(())
    }

    /// Draw one point from the uniform prior.
    pub fn sample_prior<R: RngCore + ?Sized>(&self, rng: &mut R) -> Point {
        Point {
            coords: self.dims.iter().map(|d| d.sample(rng)).collect(),
        }
    }

    /// Continuous coordinates pass through, ordinal indices map to their grid
    /// value and categorical choices become a one-hot block.
    pub fn encode(&self, point: &Point) -> Result<FeatureVector> {
        self.validate_point(point)?;
        let mut out = Vec::with_capacity(self.encoded_len);
        self.encode_into(point, &mut out);
        Ok(FeatureVector(out))
    }

    /// Encoding without validation, for points this space produced itself.
    pub(crate) fn encode_into(&self, point: &Point, out: &mut Vec<f64>) {
        out.clear();
        for (d, v) in self.dims.iter().zip(point.coords()) {
            match (d, v) {
                (ParamDomain::Continuous { .. }, Value::Real(x)) => out.push(*x),
                (ParamDomain::Ordinal { values }, Value::Index(i)) => out.push(values[*i]),
                (ParamDomain::Categorical { n_choices }, Value::Index(i)) => {
                    out.extend((0..*n_choices).map(|c| if c == *i { 1.0 } else { 0.0 }))
                }
                _ => unreachable!("point was validated against this space"),
            }
        }
    }
}

impl TryFrom<Vec<ParamDomain>> for SearchSpace {
    type Error = Error;

    fn try_from(dims: Vec<ParamDomain>) -> Result<Self> {
        SearchSpace::new(dims)
    }
}

impl From<SearchSpace> for Vec<ParamDomain> {
    fn from(space: SearchSpace) -> Self {
        space.dims
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{child_rng, Purpose};
    use proptest::prelude::*;

    #[test]
    fn rejects_invalid_domains() {
        assert!(SearchSpace::new(vec![]).is_err());
        assert!(SearchSpace::new(vec![ParamDomain::continuous(1.0, 1.0)]).is_err());
        assert!(SearchSpace::new(vec![ParamDomain::continuous(0.0, f64::INFINITY)]).is_err());
        assert!(SearchSpace::new(vec![ParamDomain::ordinal(vec![])]).is_err());
        assert!(SearchSpace::new(vec![ParamDomain::ordinal(vec![0.1, 0.1])]).is_err());
        assert!(SearchSpace::new(vec![ParamDomain::categorical(1)]).is_err());
    }

    #[test]
    fn unit_interval_sample_in_range() {
        let space = SearchSpace::unit_cube(1).unwrap();
        for seed in 0..100 {
            let p = space.sample_prior(&mut child_rng(seed, Purpose::Sampling, 0));
            let x = p.coords()[0].as_real().unwrap();
            assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn branin_box_samples_in_range() {
        let space = SearchSpace::new(vec![
            ParamDomain::continuous(-5.0, 10.0),
            ParamDomain::continuous(0.0, 15.0),
        ])
        .unwrap();
        let mut rng = child_rng(1, Purpose::Sampling, 0);
        for _ in 0..1000 {
            let p = space.sample_prior(&mut rng);
            space.validate_point(&p).unwrap();
        }
    }

    #[test]
    fn categorical_frequencies_are_uniform() {
        let space = SearchSpace::new(vec![ParamDomain::categorical(4)]).unwrap();
        let mut rng = child_rng(11, Purpose::Sampling, 0);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[space.sample_prior(&mut rng).coords()[0].as_index().unwrap()] += 1;
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.25).abs() < 0.01, "frequency {freq}");
        }
    }

    #[test]
    fn encode_examples() {
        let unit = SearchSpace::unit_cube(1).unwrap();
        assert_eq!(unit.encode(&Point::reals(&[0.3])).unwrap().0, vec![0.3]);

        let ord = SearchSpace::new(vec![ParamDomain::ordinal(vec![0.01, 0.1, 1.0])]).unwrap();
        assert_eq!(ord.encode(&Point::indices(&[1])).unwrap().0, vec![0.1]);

        let cat = SearchSpace::new(vec![ParamDomain::categorical(3)]).unwrap();
        assert_eq!(cat.encode(&Point::indices(&[2])).unwrap().0, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn encode_rejects_mismatched_points() {
        let space = SearchSpace::unit_cube(2).unwrap();
        assert!(matches!(space.encode(&Point::reals(&[0.1])), Err(Error::InvalidPoint(_))));
        assert!(matches!(space.encode(&Point::reals(&[0.1, 1.5])), Err(Error::InvalidPoint(_))));
        assert!(matches!(space.encode(&Point::indices(&[0, 0])), Err(Error::InvalidPoint(_))));
    }

    #[test]
    fn space_json_roundtrip_validates() {
        let json = r#"[{"kind":"continuous","low":0.0,"high":1.0},{"kind":"categorical","n_choices":3}]"#;
        let space: SearchSpace = serde_json::from_str(json).unwrap();
        assert_eq!(space.feature_len(), 4);
        let bad = r#"[{"kind":"categorical","n_choices":1}]"#;
        assert!(serde_json::from_str::<SearchSpace>(bad).is_err());
    }

    fn arb_domain() -> impl Strategy<Value = ParamDomain> {
        prop_oneof![
            (-100.0f64..100.0, 0.001f64..50.0).prop_map(|(lo, w)| ParamDomain::continuous(lo, lo + w)),
            prop::collection::btree_set(-1000i32..1000, 1..6)
                .prop_map(|s| ParamDomain::ordinal(s.into_iter().map(f64::from).collect::<Vec<_>>())),
            (2usize..7).prop_map(ParamDomain::categorical),
        ]
    }

    proptest! {
        #[test]
        fn feature_length_is_a_function_of_the_space(
            dims in prop::collection::vec(arb_domain(), 1..8),
            seed in any::<u64>(),
        ) {
            let space = SearchSpace::new(dims.clone()).unwrap();
            let expected: usize = dims.iter().map(|d| match d {
                ParamDomain::Categorical { n_choices } => *n_choices,
                _ => 1,
            }).sum();
            let mut rng = child_rng(seed, Purpose::Sampling, 0);
            for _ in 0..5 {
                let p = space.sample_prior(&mut rng);
                space.validate_point(&p).unwrap();
                let f = space.encode(&p).unwrap();
                prop_assert_eq!(f.len(), expected);
                prop_assert_eq!(space.encode(&p).unwrap(), f);
            }
        }

        #[test]
        fn same_seed_same_point(
            dims in prop::collection::vec(arb_domain(), 1..8),
            seed in any::<u64>(),
        ) {
            let space = SearchSpace::new(dims).unwrap();
            let a = space.sample_prior(&mut child_rng(seed, Purpose::Sampling, 9));
            let b = space.sample_prior(&mut child_rng(seed, Purpose::Sampling, 9));
            prop_assert_eq!(a, b);
        }
    }
}
