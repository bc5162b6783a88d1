//! Parametric families, their scored variants and seeded samplers.

mod eqcorr;
mod location_scale;
mod nef;
mod normal;
mod regression;
mod vonmises;

use crate::data::Dataset;
use crate::error::Result;
use crate::rng::Rng;
use crate::scoring::{FixedParams, Reparametrized, ScoreModel};

pub use eqcorr::{rho_lower_bound, sample_eqcorr, sample_eqcorr_rng, EqCorrModel, PairwiseEqCorr};
pub use location_scale::{BaseDensity, LocationScaleMode, LocationScaleModel};
pub use nef::{NefHyvarinen, NefModel, ScalarFn};
pub use normal::{sample_normal, Normal, NormalModel, NormalParams};
pub use regression::{ols, sample_linreg_contaminated, ContaminatedSample, LinRegModel, RegressionScoreModel};
pub use vonmises::{
    sample_vonmises, sample_vonmises_rng, wrap_angle, CircularHyvarinen, VonMises, VonMisesKappaHyvarinen,
    VonMisesKappaLog,
};

/// Models that can draw a dataset at a parameter value.
pub trait Simulate {
    fn simulate(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Result<Dataset>;
}

impl<M: ScoreModel + Simulate> Simulate for Reparametrized<M> {
    fn simulate(&self, psi: &[f64], n: usize, rng: &mut Rng) -> Result<Dataset> {
        self.inner().simulate(&self.to_natural(psi), n, rng)
    }
}

impl<M: ScoreModel + Simulate> Simulate for FixedParams<M> {
    fn simulate(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Result<Dataset> {
        self.inner().simulate(&self.expand(theta), n, rng)
    }
}
