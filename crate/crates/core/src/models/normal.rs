use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};

use super::Simulate;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scoring::{
    hyvarinen_score, log_score, tsallis_score, CoordTransform, Density, ParamTransform, ScoreModel, ScoreRule,
    SmoothDensity,
};

/// Univariate normal density `N(mu, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mu: f64,
    pub sigma: f64,
}

impl Normal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() && mu.is_finite() {
            Ok(Self { mu, sigma })
        } else {
            Err(Error::Domain(format!("normal needs finite mu and sigma > 0, got ({mu}, {sigma})")))
        }
    }
}

impl Density for Normal {
    fn log_density(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        -0.5 * z * z - self.sigma.ln() - 0.5 * (2.0 * PI).ln()
    }

    fn power_integral(&self, gamma: f64) -> Option<f64> {
        Some((2.0 * PI * self.sigma * self.sigma).powf(0.5 * (1.0 - gamma)) / gamma.sqrt())
    }
}

impl SmoothDensity for Normal {
    fn grad_log_density(&self, x: &[f64]) -> Vec<f64> {
        vec![-(x[0] - self.mu) / (self.sigma * self.sigma)]
    }

    fn laplacian_log_density(&self, _x: &[f64]) -> f64 {
        -1.0 / (self.sigma * self.sigma)
    }
}

/// Which normal parameters are free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalParams {
    /// `theta = (mu)` with known standard deviation.
    Mean { sigma: f64 },
    /// `theta = (mu, sigma)`.
    MeanSd,
}

/// Normal model scored by the log, Tsallis or Hyvarinen rule, with analytic
/// gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModel {
    rule: ScoreRule,
    params: NormalParams,
}

impl NormalModel {
    pub fn new(rule: ScoreRule, params: NormalParams) -> Self {
        Self { rule, params }
    }

    pub fn rule(&self) -> ScoreRule {
        self.rule
    }

    fn unpack(&self, theta: &[f64]) -> (f64, f64) {
        match self.params {
            NormalParams::Mean { sigma } => (theta[0], sigma),
            NormalParams::MeanSd => (theta[0], theta[1]),
        }
    }

    fn density(&self, theta: &[f64]) -> Result<Normal> {
        let (mu, sigma) = self.unpack(theta);
        Normal::new(mu, sigma)
    }

    /// Gradient in `(mu, sigma)` regardless of which are free.
    fn full_gradient(&self, x: f64, mu: f64, sigma: f64) -> [f64; 2] {
        let r = x - mu;
        let s2 = sigma * sigma;
        match self.rule {
            ScoreRule::Log => [-r / s2, 1.0 / sigma - r * r / (s2 * sigma)],
            ScoreRule::Hyvarinen => [-r / (s2 * s2), 2.0 / (s2 * sigma) - 2.0 * r * r / (s2 * s2 * sigma)],
            ScoreRule::Tsallis(cfg) => {
                let g = cfg.gamma();
                let q = Normal { mu, sigma };
                let e = ((g - 1.0) * q.log_density(x)).exp();
                let integral = q.power_integral(g).unwrap_or(f64::NAN);
                let de_dmu = e * (g - 1.0) * r / s2;
                let de_dsigma = e * (g - 1.0) * (-1.0 / sigma + r * r / (s2 * sigma));
                [-g * de_dmu, (g - 1.0) * (1.0 - g) * integral / sigma - g * de_dsigma]
            }
        }
    }
}

impl ScoreModel for NormalModel {
    fn name(&self) -> &str {
        "normal"
    }

    fn param_dim(&self) -> usize {
        match self.params {
            NormalParams::Mean { .. } => 1,
            NormalParams::MeanSd => 2,
        }
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        let q = self.density(theta)?;
        match self.rule {
            ScoreRule::Log => log_score(x[0], &q),
            ScoreRule::Tsallis(cfg) => tsallis_score(x[0], &q, cfg),
            ScoreRule::Hyvarinen => hyvarinen_score(x, &q),
        }
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn score_gradient(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        let (mu, sigma) = self.unpack(theta);
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        let g = self.full_gradient(x[0], mu, sigma);
        Ok(match self.params {
            NormalParams::Mean { .. } => vec![g[0]],
            NormalParams::MeanSd => g.to_vec(),
        })
    }

    fn in_domain(&self, theta: &[f64]) -> bool {
        let (mu, sigma) = self.unpack(theta);
        mu.is_finite() && sigma > 0.0 && sigma.is_finite()
    }

    fn transform(&self) -> ParamTransform {
        match self.params {
            NormalParams::Mean { .. } => ParamTransform::identity(1),
            NormalParams::MeanSd => ParamTransform::new(vec![CoordTransform::Identity, CoordTransform::Exp { rate: 1.0 }]),
        }
    }
}

impl Simulate for NormalModel {
    fn simulate(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Result<Dataset> {
        let q = self.density(theta)?;
        Ok(Dataset::from_scalars(&sample_normal(rng, n, q.mu, q.sigma)))
    }
}

/// `n` draws from `N(mu, sigma^2)`.
pub fn sample_normal(rng: &mut Rng, n: usize, mu: f64, sigma: f64) -> Vec<f64> {
    (0..n).map(|_| mu + sigma * Distribution::<f64>::sample(&StandardNormal, rng)).collect()
}
