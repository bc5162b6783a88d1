use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::numerics::fd_gradient;
use crate::rng::rng_from_seed;
use crate::scoring::ScoreModel;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One-parameter natural exponential family `exp{theta x - k(theta) + a(x)}`.
#[derive(Clone)]
pub struct NefModel {
    a: ScalarFn,
    a1: ScalarFn,
    a2: ScalarFn,
    k: Option<ScalarFn>,
}

impl fmt::Debug for NefModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NefModel").field("has_cumulant", &self.k.is_some()).finish()
    }
}

impl NefModel {
    /// `a1` and `a2` are the first and second derivatives of `a`.
    pub fn new(a: ScalarFn, a1: ScalarFn, a2: ScalarFn, k: Option<ScalarFn>) -> Self {
        Self { a, a1, a2, k }
    }

    /// `N(theta, 1)` written as a natural exponential family.
    pub fn unit_normal() -> Self {
        Self::new(
            Arc::new(|x| -0.5 * x * x - 0.5 * (2.0 * PI).ln()),
            Arc::new(|x| -x),
            Arc::new(|_| -1.0),
            Some(Arc::new(|t| 0.5 * t * t)),
        )
    }

    pub fn a(&self, x: f64) -> f64 {
        (self.a)(x)
    }

    pub fn a1(&self, x: f64) -> f64 {
        (self.a1)(x)
    }

    pub fn a2(&self, x: f64) -> f64 {
        (self.a2)(x)
    }

    /// Normalized log-density; needs the cumulant function.
    pub fn log_density(&self, x: f64, theta: f64) -> Result<f64> {
        let k = self.k.as_ref().ok_or(Error::UnknownNormalizer)?;
        Ok(theta * x - k(theta) + self.a(x))
    }

    /// Probes `a2 = d a1 / dx` at 100 random points of `[lo, hi]`.
    pub fn check_derivatives(&self, seed: u64, lo: f64, hi: f64) -> Result<()> {
        let mut rng = rng_from_seed(seed);
        for _ in 0..100 {
            let x = lo + (hi - lo) * rng.random::<f64>();
            let fd = fd_gradient(|t| self.a1(t[0]), &[x])?[0];
            if (fd - self.a2(x)).abs() > 1e-5 * fd.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!("a'' disagrees with the derivative of a' at x = {x}")));
            }
        }
        Ok(())
    }
}

/// Hyvarinen score of a natural exponential family,
/// `a''(x) + (theta + a'(x))^2 / 2`; free of the cumulant function.
#[derive(Debug, Clone)]
pub struct NefHyvarinen {
    pub model: NefModel,
}

impl ScoreModel for NefHyvarinen {
    fn name(&self) -> &str {
        "natural exponential family, Hyvarinen score"
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn obs_dim(&self) -> usize {
        1
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        let d = theta[0] + self.model.a1(x[0]);
        Ok(self.model.a2(x[0]) + 0.5 * d * d)
    }
    fn has_analytic_gradient(&self) -> bool {
        true
    }
    fn score_gradient(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![theta[0] + self.model.a1(x[0])])
    }
}
