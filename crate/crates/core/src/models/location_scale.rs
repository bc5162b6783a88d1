use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use super::Simulate;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::rng::Rng;
use crate::scoring::{log_score, tsallis_score, CoordTransform, Density, ParamTransform, ScoreModel, ScoreRule};

type Sampler = Arc<dyn Fn(&mut Rng) -> f64 + Send + Sync>;

/// Standardized base density `p0` with a sampler and a finite quadrature
/// support.
#[derive(Clone)]
pub struct BaseDensity {
    log_density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: (f64, f64),
    sampler: Sampler,
}

impl fmt::Debug for BaseDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaseDensity").field("support", &self.support).finish()
    }
}

impl BaseDensity {
    /// Fails unless `p0` integrates to one within 1e-8 on `support`.
    pub fn new(log_density: Arc<dyn Fn(f64) -> f64 + Send + Sync>, support: (f64, f64), sampler: Sampler) -> Result<Self> {
        let mass = integrate(|x| log_density(x).exp(), support.0, support.1, 1e-12)?;
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("base density integrates to {mass} on its support")));
        }
        Ok(Self { log_density, support, sampler })
    }

    pub fn standard_normal() -> Self {
        Self::new(
            Arc::new(|x| -0.5 * x * x - 0.5 * (2.0 * PI).ln()),
            (-40.0, 40.0),
            Arc::new(|rng| StandardNormal.sample(rng)),
        )
        .expect("standard normal is normalized")
    }

    pub fn log_density(&self, x: f64) -> f64 {
        (self.log_density)(x)
    }
}

/// Location or scale family generated by a base density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocationScaleMode {
    /// `theta` is the location; the scale is fixed.
    Location { scale: f64 },
    /// `theta` is the scale; the location is fixed.
    Scale { location: f64 },
}

/// Scalar-parameter location or scale model scored by the log or Tsallis rule.
#[derive(Debug, Clone)]
pub struct LocationScaleModel {
    base: BaseDensity,
    mode: LocationScaleMode,
    rule: ScoreRule,
    /// `int p0^gamma` for the Tsallis rule.
    base_power: f64,
}

struct Member<'a> {
    base: &'a BaseDensity,
    loc: f64,
    scale: f64,
    base_power: f64,
}

impl Density for Member<'_> {
    fn log_density(&self, x: f64) -> f64 {
        self.base.log_density((x - self.loc) / self.scale) - self.scale.ln()
    }
    fn power_integral(&self, gamma: f64) -> Option<f64> {
        Some(self.scale.powf(1.0 - gamma) * self.base_power)
    }
}

impl LocationScaleModel {
    pub fn new(base: BaseDensity, mode: LocationScaleMode, rule: ScoreRule) -> Result<Self> {
        let base_power = match rule {
            ScoreRule::Tsallis(cfg) => {
                let g = cfg.gamma();
                integrate(|x| (g * base.log_density(x)).exp(), base.support.0, base.support.1, 1e-12)?
            }
            ScoreRule::Log => f64::NAN,
            ScoreRule::Hyvarinen => {
                return Err(Error::InvalidArgument("location-scale models support the log and Tsallis scores".into()))
            }
        };
        Ok(Self { base, mode, rule, base_power })
    }

    fn member(&self, theta: f64) -> Result<Member<'_>> {
        let (loc, scale) = match self.mode {
            LocationScaleMode::Location { scale } => (theta, scale),
            LocationScaleMode::Scale { location } => (location, theta),
        };
        if !(scale > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {scale}")));
        }
        Ok(Member { base: &self.base, loc, scale, base_power: self.base_power })
    }
}

impl ScoreModel for LocationScaleModel {
    fn name(&self) -> &str {
        match self.mode {
            LocationScaleMode::Location { .. } => "location model",
            LocationScaleMode::Scale { .. } => "scale model",
        }
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn obs_dim(&self) -> usize {
        1
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        let q = self.member(theta[0])?;
        match self.rule {
            ScoreRule::Tsallis(cfg) => tsallis_score(x[0], &q, cfg),
            _ => log_score(x[0], &q),
        }
    }
    fn in_domain(&self, theta: &[f64]) -> bool {
        match self.mode {
            LocationScaleMode::Location { .. } => theta[0].is_finite(),
            LocationScaleMode::Scale { .. } => theta[0] > 0.0 && theta[0].is_finite(),
        }
    }
    fn transform(&self) -> ParamTransform {
        match self.mode {
            LocationScaleMode::Location { .. } => ParamTransform::identity(1),
            LocationScaleMode::Scale { .. } => ParamTransform::new(vec![CoordTransform::Exp { rate: 1.0 }]),
        }
    }
}

impl Simulate for LocationScaleModel {
    fn simulate(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Result<Dataset> {
        let q = self.member(theta[0])?;
        let xs: Vec<f64> = (0..n).map(|_| q.loc + q.scale * (self.base.sampler)(rng)).collect();
        Ok(Dataset::from_scalars(&xs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Normal;
    use crate::scoring::TsallisConfig;

    #[test]
    fn rejects_unnormalized_base() {
        let r = BaseDensity::new(Arc::new(|x| -0.5 * x * x), (-10.0, 10.0), Arc::new(|_| 0.0));
        assert!(r.is_err());
    }

    #[test]
    fn tsallis_matches_closed_form_normal() {
        let cfg = TsallisConfig::new(1.5).unwrap();
        let m = LocationScaleModel::new(BaseDensity::standard_normal(), LocationScaleMode::Scale { location: 0.5 }, ScoreRule::Tsallis(cfg)).unwrap();
        let q = Normal::new(0.5, 2.0).unwrap();
        let expected = tsallis_score(1.1, &q, cfg).unwrap();
        assert!((m.score(&[1.1], &[2.0]).unwrap() - expected).abs() < 1e-10);
    }
}
