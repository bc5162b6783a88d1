//! Scoring rules, the [`ScoreModel`] abstraction and total empirical scores.
//!
//! Every score is oriented so that smaller is better: the estimator minimizes
//! the total score and the posterior is proportional to `prior * exp(-S)`.

mod pairwise;
mod rules;
mod transform;

use std::sync::Arc;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{pairwise_sum, try_fd_gradient, try_fd_hessian, SquareMatrix};

pub use pairwise::{pairwise_eqcorr_obs, pairwise_eqcorr_score};
pub use rules::{
    circular_hyvarinen_score, hyvarinen_score, log_score, power_integral, tsallis_score, Density, SmoothDensity,
};
pub use transform::{CoordTransform, ParamTransform};

/// Tuning constant of the Tsallis score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsallisConfig {
    gamma: f64,
}

impl TsallisConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 1.0 && gamma.is_finite() {
            Ok(Self { gamma })
        } else {
            Err(Error::InvalidArgument(format!("Tsallis gamma must exceed 1, got {gamma}")))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Scoring rules available for density-based models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreRule {
    Log,
    Tsallis(TsallisConfig),
    Hyvarinen,
}

impl ScoreRule {
    /// Tsallis for `gamma > 1`, the log score at exactly `gamma = 1`.
    pub fn tsallis_or_log(gamma: f64) -> Result<Self> {
        if gamma == 1.0 {
            Ok(Self::Log)
        } else {
            Ok(Self::Tsallis(TsallisConfig::new(gamma)?))
        }
    }
}

/// A parametric model paired with a scoring rule.
///
/// `score` is the pointwise score `S(x; theta)` in natural parameters.
/// Derivatives default to central differences; models with cheap analytic
/// gradients override `score_gradient` and report it through
/// `has_analytic_gradient`.
pub trait ScoreModel: Send + Sync {
    fn name(&self) -> &str;

    fn param_dim(&self) -> usize;

    fn obs_dim(&self) -> usize;

    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64>;

    fn has_analytic_gradient(&self) -> bool {
        false
    }

    fn score_gradient(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        try_fd_gradient(|t| self.score(x, t), theta)
    }

    fn score_hessian(&self, x: &[f64], theta: &[f64]) -> Result<SquareMatrix> {
        if self.has_analytic_gradient() {
            jacobian_of_gradient(|t| self.score_gradient(x, t), theta)
        } else {
            try_fd_hessian(|t| self.score(x, t), theta)
        }
    }

    fn in_domain(&self, _theta: &[f64]) -> bool {
        true
    }

    /// Map from unconstrained coordinates to the natural parameters.
    fn transform(&self) -> ParamTransform {
        ParamTransform::identity(self.param_dim())
    }
}

impl<T: ScoreModel + ?Sized> ScoreModel for Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn obs_dim(&self) -> usize {
        (**self).obs_dim()
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        (**self).score(x, theta)
    }
    fn has_analytic_gradient(&self) -> bool {
        (**self).has_analytic_gradient()
    }
    fn score_gradient(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        (**self).score_gradient(x, theta)
    }
    fn score_hessian(&self, x: &[f64], theta: &[f64]) -> Result<SquareMatrix> {
        (**self).score_hessian(x, theta)
    }
    fn in_domain(&self, theta: &[f64]) -> bool {
        (**self).in_domain(theta)
    }
    fn transform(&self) -> ParamTransform {
        (**self).transform()
    }
}

/// Symmetrized forward Jacobian of a gradient field, by central differences.
pub(crate) fn jacobian_of_gradient<F>(grad: F, theta: &[f64]) -> Result<SquareMatrix>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let d = theta.len();
    let mut out = SquareMatrix::zeros(d);
    let mut x = theta.to_vec();
    for j in 0..d {
        let h = f64::EPSILON.cbrt() * theta[j].abs().max(1.0);
        x[j] = theta[j] + h;
        let gp = grad(&x)?;
        x[j] = theta[j] - h;
        let gm = grad(&x)?;
        x[j] = theta[j];
        for i in 0..d {
            let v = (gp[i] - gm[i]) / (2.0 * h);
            if !v.is_finite() {
                return Err(Error::NonFiniteDerivative);
            }
            out[(i, j)] = v;
        }
    }
    Ok(out.symmetrized())
}

/// Which derivatives [`total_score`] should compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Derivatives {
    None,
    Gradient,
    Hessian,
}

/// Total empirical score `S(theta) = sum_i S(x_i; theta)` and optionally its
/// derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalScoreEval {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
    pub hessian: Option<SquareMatrix>,
}

fn check_dims<M: ScoreModel + ?Sized>(model: &M, data: &Dataset, theta: &[f64]) -> Result<()> {
    if theta.len() != model.param_dim() {
        return Err(Error::DimensionMismatch { expected: model.param_dim(), got: theta.len() });
    }
    if !data.is_empty() && data.m() != model.obs_dim() {
        return Err(Error::DimensionMismatch { expected: model.obs_dim(), got: data.m() });
    }
    Ok(())
}

/// Sum of pointwise scores with a fixed pairwise reduction order.
pub fn total_score_value<M: ScoreModel + ?Sized>(model: &M, data: &Dataset, theta: &[f64]) -> Result<f64> {
    check_dims(model, data, theta)?;
    let parts = data.rows().map(|x| model.score(x, theta)).collect::<Result<Vec<f64>>>()?;
    let v = pairwise_sum(&parts);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteScore { theta: theta.to_vec() })
    }
}

fn total_gradient_analytic<M: ScoreModel + ?Sized>(model: &M, data: &Dataset, theta: &[f64]) -> Result<Vec<f64>> {
    let d = theta.len();
    let grads = data.rows().map(|x| model.score_gradient(x, theta)).collect::<Result<Vec<_>>>()?;
    Ok((0..d).map(|j| pairwise_sum(&grads.iter().map(|g| g[j]).collect::<Vec<_>>())).collect())
}

/// Total score with derivatives: analytic when the model provides a gradient,
/// finite differences of the total otherwise.
pub fn total_score<M: ScoreModel + ?Sized>(
    model: &M,
    data: &Dataset,
    theta: &[f64],
    derivatives: Derivatives,
) -> Result<TotalScoreEval> {
    let value = total_score_value(model, data, theta)?;
    let value_at = |t: &[f64]| total_score_value(model, data, t);
    let gradient = if derivatives >= Derivatives::Gradient {
        Some(if model.has_analytic_gradient() {
            total_gradient_analytic(model, data, theta)?
        } else {
            try_fd_gradient(value_at, theta)?
        })
    } else {
        None
    };
    let hessian = if derivatives >= Derivatives::Hessian {
        Some(if model.has_analytic_gradient() {
            jacobian_of_gradient(|t| total_gradient_analytic(model, data, t), theta)?
        } else {
            try_fd_hessian(value_at, theta)?
        })
    } else {
        None
    };
    Ok(TotalScoreEval { value, gradient, hessian })
}

/// Model expressed in unconstrained coordinates `psi` of an inner model.
#[derive(Debug, Clone)]
pub struct Reparametrized<M> {
    inner: M,
    transform: ParamTransform,
    name: String,
}

impl<M: ScoreModel> Reparametrized<M> {
    /// Uses the inner model's own transform.
    pub fn new(inner: M) -> Self {
        let transform = inner.transform();
        Self::with_transform(inner, transform)
    }

    pub fn with_transform(inner: M, transform: ParamTransform) -> Self {
        let name = format!("{} (unconstrained)", inner.name());
        Self { inner, transform, name }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn param_transform(&self) -> &ParamTransform {
        &self.transform
    }

    pub fn to_natural(&self, psi: &[f64]) -> Vec<f64> {
        self.transform.to_natural(psi)
    }
}

impl<M: ScoreModel> ScoreModel for Reparametrized<M> {
    fn name(&self) -> &str {
        &self.name
    }
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }
    fn obs_dim(&self) -> usize {
        self.inner.obs_dim()
    }
    fn score(&self, x: &[f64], psi: &[f64]) -> Result<f64> {
        self.inner.score(x, &self.transform.to_natural(psi))
    }
    fn has_analytic_gradient(&self) -> bool {
        self.inner.has_analytic_gradient()
    }
    fn score_gradient(&self, x: &[f64], psi: &[f64]) -> Result<Vec<f64>> {
        if !self.inner.has_analytic_gradient() {
            return try_fd_gradient(|t| self.score(x, t), psi);
        }
        let g = self.inner.score_gradient(x, &self.transform.to_natural(psi))?;
        Ok(g.iter().zip(self.transform.jacobian_diag(psi)).map(|(a, b)| a * b).collect())
    }
    fn in_domain(&self, psi: &[f64]) -> bool {
        psi.iter().all(|p| p.is_finite()) && self.inner.in_domain(&self.transform.to_natural(psi))
    }
}

/// Model with some coordinates of an inner model held fixed.
#[derive(Debug, Clone)]
pub struct FixedParams<M> {
    inner: M,
    template: Vec<Option<f64>>,
    name: String,
}

impl<M: ScoreModel> FixedParams<M> {
    /// `template[j] = Some(v)` fixes coordinate `j` at `v`; `None` leaves it free.
    pub fn new(inner: M, template: Vec<Option<f64>>) -> Result<Self> {
        if template.len() != inner.param_dim() {
            return Err(Error::DimensionMismatch { expected: inner.param_dim(), got: template.len() });
        }
        if template.iter().all(|t| t.is_some()) {
            return Err(Error::InvalidArgument("at least one parameter must remain free".into()));
        }
        let name = format!("{} (partially fixed)", inner.name());
        Ok(Self { inner, template, name })
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    /// Full natural parameter vector from the free coordinates.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut it = free.iter();
        self.template.iter().map(|t| t.unwrap_or_else(|| *it.next().unwrap_or(&f64::NAN))).collect()
    }

    fn free_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.template.iter().enumerate().filter(|(_, t)| t.is_none()).map(|(j, _)| j)
    }
}

impl<M: ScoreModel> ScoreModel for FixedParams<M> {
    fn name(&self) -> &str {
        &self.name
    }
    fn param_dim(&self) -> usize {
        self.template.iter().filter(|t| t.is_none()).count()
    }
    fn obs_dim(&self) -> usize {
        self.inner.obs_dim()
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        self.inner.score(x, &self.expand(theta))
    }
    fn has_analytic_gradient(&self) -> bool {
        self.inner.has_analytic_gradient()
    }
    fn score_gradient(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        if !self.inner.has_analytic_gradient() {
            return try_fd_gradient(|t| self.score(x, t), theta);
        }
        let g = self.inner.score_gradient(x, &self.expand(theta))?;
        Ok(self.free_indices().map(|j| g[j]).collect())
    }
    fn in_domain(&self, theta: &[f64]) -> bool {
        self.inner.in_domain(&self.expand(theta))
    }
    fn transform(&self) -> ParamTransform {
        let t = self.inner.transform();
        ParamTransform::new(self.free_indices().map(|j| t.coords()[j]).collect())
    }
}
