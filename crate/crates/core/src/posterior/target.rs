use std::sync::Arc;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimation::GodambeEstimate;
use crate::numerics::SquareMatrix;
use crate::priors::PriorSpec;
use crate::scoring::{total_score, total_score_value, Derivatives, ParamTransform, ScoreModel};

/// The scoring-rule posterior `pi(theta) exp{-S(theta*)}`,
/// `theta* = theta~ + C (theta - theta~)`, normalized to zero at `theta~`.
#[derive(Clone)]
pub struct CalibratedTarget {
    model: Arc<dyn ScoreModel>,
    data: Arc<Dataset>,
    prior: PriorSpec,
    theta_tilde: Vec<f64>,
    c: SquareMatrix,
    calibrated: bool,
    sampling: ParamTransform,
    curvature: SquareMatrix,
    offset: f64,
}

impl std::fmt::Debug for CalibratedTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CalibratedTarget")
            .field("model", &self.model.name())
            .field("prior", &self.prior)
            .field("theta_tilde", &self.theta_tilde)
            .field("c", &self.c)
            .field("calibrated", &self.calibrated)
            .finish()
    }
}

impl CalibratedTarget {
    /// Target with an explicit calibration matrix. `H = C^T S''(theta~) C / n`
    /// is computed here.
    pub fn new(
        model: Arc<dyn ScoreModel>,
        data: Arc<Dataset>,
        prior: PriorSpec,
        theta_tilde: Vec<f64>,
        c: SquareMatrix,
    ) -> Result<Self> {
        let d = model.param_dim();
        if theta_tilde.len() != d || c.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: theta_tilde.len().min(c.dim()) });
        }
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let hess = total_score(model.as_ref(), &data, &theta_tilde, Derivatives::Hessian)?
            .hessian
            .ok_or(Error::NonFiniteDerivative)?;
        let curvature = c.transpose().matmul(&hess).matmul(&c).scale(1.0 / data.n() as f64).symmetrized();
        let calibrated = c != SquareMatrix::identity(d);
        let sampling = model.transform();
        let mut target =
            Self { model, data, prior, theta_tilde, c, calibrated, sampling, curvature, offset: 0.0 };
        let at_mode = target.log_density(&target.theta_tilde.clone())?;
        if !at_mode.is_finite() {
            return Err(Error::NonFiniteEvaluation { point: target.theta_tilde.clone() });
        }
        target.offset = at_mode;
        Ok(target)
    }

    /// Calibrated target using the `C` of a Godambe estimate.
    pub fn calibrated(model: Arc<dyn ScoreModel>, data: Arc<Dataset>, prior: PriorSpec, est: &GodambeEstimate) -> Result<Self> {
        Self::new(model, data, prior, est.theta.clone(), est.c.clone())
    }

    /// Target with `C = I`.
    pub fn uncalibrated(model: Arc<dyn ScoreModel>, data: Arc<Dataset>, prior: PriorSpec, theta_tilde: Vec<f64>) -> Result<Self> {
        let d = theta_tilde.len();
        Self::new(model, data, prior, theta_tilde, SquareMatrix::identity(d))
    }

    /// Replaces the coordinates used for sampling (default: the model's own).
    pub fn with_sampling_transform(mut self, t: ParamTransform) -> Self {
        self.sampling = t;
        self
    }

    pub fn dim(&self) -> usize {
        self.theta_tilde.len()
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn model(&self) -> &Arc<dyn ScoreModel> {
        &self.model
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn theta_tilde(&self) -> &[f64] {
        &self.theta_tilde
    }

    pub fn c(&self) -> &SquareMatrix {
        &self.c
    }

    pub fn is_calibrated(&self) -> bool {
        self.calibrated
    }

    /// `H(theta~)`.
    pub fn curvature(&self) -> &SquareMatrix {
        &self.curvature
    }

    pub fn sampling_transform(&self) -> &ParamTransform {
        &self.sampling
    }

    pub fn theta_star(&self, theta: &[f64]) -> Vec<f64> {
        let diff: Vec<f64> = theta.iter().zip(&self.theta_tilde).map(|(a, b)| a - b).collect();
        self.c.matvec(&diff).iter().zip(&self.theta_tilde).map(|(a, b)| a + b).collect()
    }

    /// Unshifted `log pi(theta) - S(theta*)`; `-inf` when `theta*` leaves the
    /// model domain.
    fn log_density(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: theta.len() });
        }
        if !self.model.in_domain(theta) {
            return Err(Error::Domain(format!("parameter {theta:?} outside the model domain")));
        }
        let star = self.theta_star(theta);
        if !self.model.in_domain(&star) {
            return Ok(f64::NEG_INFINITY);
        }
        let lp = self.prior.log_density(theta)?;
        Ok(lp - total_score_value(self.model.as_ref(), &self.data, &star)?)
    }

    /// `log pi(theta) - S(theta*)`, shifted to zero at `theta~`.
    pub fn log_posterior(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.log_density(theta)? - self.offset)
    }

    /// Log target in sampling coordinates, Jacobian included.
    pub fn log_posterior_sampling(&self, u: &[f64]) -> Result<f64> {
        let theta = self.sampling.to_natural(u);
        Ok(self.log_posterior(&theta)? + self.sampling.log_abs_det_jacobian(u))
    }
}

/// `log pi(theta) - S(theta~ + C (theta - theta~))` up to the constant that
/// makes it zero at `theta~`.
pub fn log_sr_posterior(target: &CalibratedTarget, theta: &[f64]) -> Result<f64> {
    target.log_posterior(theta)
}

/// True for errors that mean "no posterior mass here" rather than a failure.
pub(crate) fn is_support_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Domain(_) | Error::OutsideSupport { .. } | Error::NonFiniteScore { .. } | Error::NonFiniteEvaluation { .. }
    )
}
