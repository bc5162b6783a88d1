use rand_distr::{Distribution, StandardNormal};

use super::Simulate;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{spd_factor, SquareMatrix};
use crate::rng::{rng_from_seed, Rng};
use crate::scoring::{pairwise_eqcorr_obs, CoordTransform, ParamTransform, ScoreModel};

/// q-variate normal with common mean, variance and correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqCorrModel {
    pub q: usize,
    pub mu: f64,
    pub sigma2: f64,
    pub rho: f64,
}

/// Lower end of the admissible correlation range for dimension `q`.
pub fn rho_lower_bound(q: usize) -> f64 {
    -1.0 / (q as f64 - 1.0)
}

impl EqCorrModel {
    pub fn new(q: usize, mu: f64, sigma2: f64, rho: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::Domain(format!("q must be at least 2, got {q}")));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::Domain(format!("sigma^2 must be positive, got {sigma2}")));
        }
        if !(rho > rho_lower_bound(q) && rho < 1.0) {
            return Err(Error::Domain(format!("rho = {rho} outside ({}, 1)", rho_lower_bound(q))));
        }
        Ok(Self { q, mu, sigma2, rho })
    }

    /// `sigma^2 [(1 - rho) I + rho 1 1^T]`.
    pub fn covariance(&self) -> SquareMatrix {
        let mut c = SquareMatrix::zeros(self.q);
        for i in 0..self.q {
            for j in 0..self.q {
                c[(i, j)] = if i == j { self.sigma2 } else { self.rho * self.sigma2 };
            }
        }
        c
    }

    /// Eigenvalues: `sigma^2 (1 - rho)` with multiplicity `q - 1`, then
    /// `sigma^2 (1 + (q - 1) rho)`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = vec![self.sigma2 * (1.0 - self.rho); self.q - 1];
        ev.push(self.sigma2 * (1.0 + (self.q as f64 - 1.0) * self.rho));
        ev
    }
}

/// `n x q` sample drawn through the triangular factor of the full covariance.
pub fn sample_eqcorr_rng(rng: &mut Rng, n: usize, model: &EqCorrModel) -> Result<Dataset> {
    let r = spd_factor(&model.covariance())?;
    let rt = r.matrix().transpose();
    let q = model.q;
    let mut values = Vec::with_capacity(n * q);
    let mut z = vec![0.0; q];
    for _ in 0..n {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        values.extend(rt.matvec(&z).into_iter().map(|v| v + model.mu));
    }
    Dataset::new(q, values)
}

pub fn sample_eqcorr(seed: u64, n: usize, q: usize, mu: f64, sigma2: f64, rho: f64) -> Result<Dataset> {
    sample_eqcorr_rng(&mut rng_from_seed(seed), n, &EqCorrModel::new(q, mu, sigma2, rho)?)
}

/// Pairwise log-likelihood score in `theta = (mu, sigma^2, rho)`.
///
/// The unconstrained coordinates are `(mu, log sigma, logit of rho rescaled
/// to its admissible interval)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseEqCorr {
    pub q: usize,
}

impl ScoreModel for PairwiseEqCorr {
    fn name(&self) -> &str {
        "equi-correlated normal, pairwise likelihood"
    }
    fn param_dim(&self) -> usize {
        3
    }
    fn obs_dim(&self) -> usize {
        self.q
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        pairwise_eqcorr_obs(x, theta[0], theta[1], theta[2])
    }
    fn in_domain(&self, theta: &[f64]) -> bool {
        theta[0].is_finite() && theta[1] > 0.0 && theta[1].is_finite() && theta[2] > rho_lower_bound(self.q) && theta[2] < 1.0
    }
    fn transform(&self) -> ParamTransform {
        ParamTransform::new(vec![
            CoordTransform::Identity,
            CoordTransform::Exp { rate: 2.0 },
            CoordTransform::Logistic { lo: rho_lower_bound(self.q), hi: 1.0 },
        ])
    }
}

impl Simulate for PairwiseEqCorr {
    fn simulate(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Result<Dataset> {
        sample_eqcorr_rng(rng, n, &EqCorrModel::new(self.q, theta[0], theta[1], theta[2])?)
    }
}
