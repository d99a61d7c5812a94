//! The black-box objective interface and closed-form synthetic benchmarks.
//!
//! The optimizers in this crate always maximize. Benchmarks that are
//! naturally minimized are adapted with [`as_maximization`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ParamDomain, Point, SearchSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }

    /// Map a value in this direction onto the maximization scale.
    pub fn to_max(self, y: f64) -> f64 {
        match self {
            Direction::Maximize => y,
            Direction::Minimize => -y,
        }
    }
}

pub trait Objective: Send + Sync {
    fn name(&self) -> &str;
    fn space(&self) -> &SearchSpace;
    fn direction(&self) -> Direction;
    fn evaluate(&self, point: &Point) -> Result<f64>;
}

impl<T: Objective + ?Sized> Objective for Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn space(&self) -> &SearchSpace {
        (**self).space()
    }
    fn direction(&self) -> Direction {
        (**self).direction()
    }
    fn evaluate(&self, point: &Point) -> Result<f64> {
        (**self).evaluate(point)
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn space(&self) -> &SearchSpace {
        (**self).space()
    }
    fn direction(&self) -> Direction {
        (**self).direction()
    }
    fn evaluate(&self, point: &Point) -> Result<f64> {
        (**self).evaluate(point)
    }
}

/// Total budget `N` split into `N / W` synchronous batches of `W` points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub total: usize,
    pub workers: usize,
}

impl BudgetConfig {
    pub fn new(total: usize, workers: usize) -> Result<Self> {
        let budget = BudgetConfig { total, workers };
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<()> {
        if self.total == 0 || self.workers == 0 {
            return Err(Error::Config(format!(
                "budget and workers must be positive, got N={} W={}",
                self.total, self.workers
            )));
        }
        if !self.total.is_multiple_of(self.workers) {
            return Err(Error::Config(format!(
                "workers W={} must divide the budget N={}",
                self.workers, self.total
            )));
        }
        Ok(())
    }

    pub fn batches(&self) -> usize {
        self.total / self.workers
    }
}

fn check_domain(name: &str, space: &SearchSpace, point: &Point) -> Result<()> {
    space.validate_point(point).map_err(|e| Error::Domain {
        objective: name.to_string(),
        detail: e.to_string(),
    })
}

fn reals(point: &Point) -> Vec<f64> {
    point.coords().iter().filter_map(|v| v.as_real()).collect()
}

/// Branin-Hoo on `[-5, 10] x [0, 15]`, minimized.
#[derive(Clone, Debug)]
pub struct Branin {
    space: SearchSpace,
}

impl Branin {
    pub fn new() -> Self {
        let space = SearchSpace::new(vec![
            ParamDomain::continuous(-5.0, 10.0),
            ParamDomain::continuous(0.0, 15.0),
        ])
        .expect("branin box is valid");
        Branin { space }
    }

    pub fn value(x1: f64, x2: f64) -> f64 {
        let a = 1.0;
        let b = 5.1 / (4.0 * PI * PI);
        let c = 5.0 / PI;
        let r = 6.0;
        let s = 10.0;
        let t = 1.0 / (8.0 * PI);
        a * (x2 - b * x1 * x1 + c * x1 - r).powi(2) + s * (1.0 - t) * x1.cos() + s
    }
}

impl Default for Branin {
    fn default() -> Self {
        Branin::new()
    }
}

impl Objective for Branin {
    fn name(&self) -> &str {
        "branin"
    }
    fn space(&self) -> &SearchSpace {
        &self.space
    }
    fn direction(&self) -> Direction {
        Direction::Minimize
    }
    fn evaluate(&self, point: &Point) -> Result<f64> {
        check_domain("branin", &self.space, point)?;
        let x = reals(point);
        Ok(Branin::value(x[0], x[1]))
    }
}

const HARTMANN6_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

const HARTMANN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];

const HARTMANN6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

/// Six-dimensional Hartmann function on `[0, 1]^6`, minimized.
#[derive(Clone, Debug)]
pub struct Hartmann6 {
    space: SearchSpace,
}

impl Hartmann6 {
    pub fn new() -> Self {
        Hartmann6 {
            space: SearchSpace::unit_cube(6).expect("unit cube is valid"),
        }
    }

    pub fn value(x: &[f64; 6]) -> f64 {
        let mut total = 0.0;
        for i in 0..4 {
            let inner: f64 = (0..6)
                .map(|j| HARTMANN6_A[i][j] * (x[j] - HARTMANN6_P[i][j]).powi(2))
                .sum();
            total += HARTMANN6_ALPHA[i] * (-inner).exp();
        }
        -total
    }
}

impl Default for Hartmann6 {
    fn default() -> Self {
        Hartmann6::new()
    }
}

impl Objective for Hartmann6 {
    fn name(&self) -> &str {
        "hartmann6"
    }
    fn space(&self) -> &SearchSpace {
        &self.space
    }
    fn direction(&self) -> Direction {
        Direction::Minimize
    }
    fn evaluate(&self, point: &Point) -> Result<f64> {
        check_domain("hartmann6", &self.space, point)?;
        let x = reals(point);
        let x: [f64; 6] = x.try_into().expect("six continuous coordinates");
        Ok(Hartmann6::value(&x))
    }
}

/// Look up a synthetic benchmark by name.
pub fn benchmark(name: &str) -> Result<Arc<dyn Objective>> {
    match name {
        "branin" => Ok(Arc::new(Branin::new())),
        "hartmann6" => Ok(Arc::new(Hartmann6::new())),
        other => Err(Error::Config(format!(
            "unknown objective {other:?} (expected \"branin\" or \"hartmann6\")"
        ))),
    }
}

/// An objective backed by a closure.
pub struct FnObjective<F> {
    name: String,
    space: SearchSpace,
    direction: Direction,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    pub fn new(name: impl Into<String>, space: SearchSpace, direction: Direction, f: F) -> Self {
        FnObjective {
            name: name.into(),
            space,
            direction,
            f,
        }
    }
}

impl<F> fmt::Debug for FnObjective<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnObjective")
            .field("name", &self.name)
            .field("direction", &self.direction)
            .finish_non_exhaustive()
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }
    fn space(&self) -> &SearchSpace {
        &self.space
    }
    fn direction(&self) -> Direction {
        self.direction
    }
    fn evaluate(&self, point: &Point) -> Result<f64> {
        check_domain(&self.name, &self.space, point)?;
        Ok((self.f)(point))
    }
}

/// The maximization form of an objective: negated when the inner objective
/// is minimized, unchanged otherwise.
#[derive(Clone, Debug)]
pub struct Maximized<O> {
    inner: O,
}

impl<O: Objective> Maximized<O> {
    pub fn inner(&self) -> &O {
        &self.inner
    }
}

pub fn as_maximization<O: Objective>(objective: O) -> Maximized<O> {
    Maximized { inner: objective }
}

impl<O: Objective> Objective for Maximized<O> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn space(&self) -> &SearchSpace {
        self.inner.space()
    }
    fn direction(&self) -> Direction {
        Direction::Maximize
    }
    fn evaluate(&self, point: &Point) -> Result<f64> {
        let y = self.inner.evaluate(point)?;
        Ok(self.inner.direction().to_max(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const HARTMANN6_ARGMIN: [f64; 6] = [0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573];

    #[test]
    fn branin_known_values() {
        let f = Branin::new();
        let at_min = f.evaluate(&Point::reals(&[PI, 2.275])).unwrap();
        assert_abs_diff_eq!(at_min, 0.397887, epsilon = 1e-5);
        // 36 + 10 (1 - 1/(8 pi)) + 10
        let hand = 36.0 + 10.0 * (1.0 - 1.0 / (8.0 * PI)) + 10.0;
        let origin = f.evaluate(&Point::reals(&[0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(origin, hand, epsilon = 1e-12);
        assert_abs_diff_eq!(origin, 55.602113, epsilon = 1e-5);
    }

    #[test]
    fn branin_minimum_is_local() {
        let centre = Branin::value(PI, 2.275);
        for dx in [-1e-3, 0.0, 1e-3] {
            for dy in [-1e-3, 0.0, 1e-3] {
                if dx == 0.0 && dy == 0.0 {
                    continue;
                }
                assert!(Branin::value(PI + dx, 2.275 + dy) > centre);
            }
        }
    }

    #[test]
    fn hartmann6_known_values() {
        let f = Hartmann6::new();
        let at_min = f.evaluate(&Point::reals(&HARTMANN6_ARGMIN)).unwrap();
        assert_abs_diff_eq!(at_min, -3.32237, epsilon = 1e-4);
        let corner = f.evaluate(&Point::reals(&[1.0; 6])).unwrap();
        assert!(corner > -0.01 && corner < 0.0, "corner value {corner}");
    }

    #[test]
    fn hartmann6_minimum_is_local() {
        let centre = Hartmann6::value(&HARTMANN6_ARGMIN);
        for j in 0..6 {
            for d in [-1e-3, 1e-3] {
                let mut x = HARTMANN6_ARGMIN;
                x[j] += d;
                assert!(Hartmann6::value(&x) > centre);
            }
        }
    }

    #[test]
    fn benchmarks_reject_out_of_domain_points() {
        assert!(matches!(
            Branin::new().evaluate(&Point::reals(&[-6.0, 1.0])),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            Hartmann6::new().evaluate(&Point::reals(&[0.5; 5])),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn maximization_form() {
        let g = as_maximization(Branin::new());
        assert_eq!(g.direction(), Direction::Maximize);
        let v = g.evaluate(&Point::reals(&[0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(v, -55.602113, epsilon = 1e-5);

        let already = FnObjective::new(
            "id",
            SearchSpace::unit_cube(1).unwrap(),
            Direction::Maximize,
            |p: &Point| p.coords()[0].as_real().unwrap(),
        );
        let same = as_maximization(&already);
        assert_eq!(same.evaluate(&Point::reals(&[0.25])).unwrap(), 0.25);
    }

    #[test]
    fn budget_requires_divisibility() {
        assert_eq!(BudgetConfig::new(400, 20).unwrap().batches(), 20);
        assert!(BudgetConfig::new(401, 20).is_err());
        assert!(BudgetConfig::new(0, 20).is_err());
    }

    #[test]
    fn named_lookup() {
        assert_eq!(benchmark("branin").unwrap().name(), "branin");
        assert_eq!(benchmark("hartmann6").unwrap().space().dimensionality(), 6);
        assert!(benchmark("rosenbrock").is_err());
    }

    proptest! {
        #[test]
        fn negation_reverses_argbest(xs in prop::collection::vec((-5.0f64..10.0, 0.0f64..15.0), 2..40)) {
            let f = Branin::new();
            let g = as_maximization(Branin::new());
            let points: Vec<Point> = xs.iter().map(|&(a, b)| Point::reals(&[a, b])).collect();
            let fv: Vec<f64> = points.iter().map(|p| f.evaluate(p).unwrap()).collect();
            let gv: Vec<f64> = points.iter().map(|p| g.evaluate(p).unwrap()).collect();
            for i in 0..points.len() {
                prop_assert_eq!(gv[i], -fv[i]);
                for j in 0..points.len() {
                    prop_assert_eq!(fv[i] < fv[j], gv[i] > gv[j]);
                }
            }
        }

        #[test]
        fn evaluation_is_deterministic(x in prop::array::uniform6(0.0f64..=1.0)) {
            let f = Hartmann6::new();
            let p = Point::reals(&x);
            prop_assert_eq!(f.evaluate(&p).unwrap().to_bits(), f.evaluate(&p).unwrap().to_bits());
        }
    }
}
