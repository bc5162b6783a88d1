use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{fd_derivative_1d, fd_third_tensor, grid_normalize, spd_factor, try_fd_gradient, try_fd_hessian, Grid1D, SquareMatrix};
use crate::scoring::{total_score, total_score_value, Derivatives};

use super::target::{is_support_error, CalibratedTarget};

/// Normalized grid posterior of a scalar target in model coordinates. Nodes
/// where the target has no support get zero density.
pub fn grid_posterior_1d(target: &CalibratedTarget, grid: &[f64]) -> Result<Grid1D> {
    if target.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: target.dim() });
    }
    let logs = grid
        .iter()
        .map(|&t| match target.log_posterior(&[t]) {
            Err(e) if is_support_error(&e) => Ok(f64::NEG_INFINITY),
            other => other,
        })
        .collect::<Result<Vec<f64>>>()?;
    grid_normalize(&Grid1D::from_log_values(grid.to_vec(), &logs)?)
}

/// `N_d(theta~, H^-1 / n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalApprox {
    mean: Vec<f64>,
    precision: SquareMatrix,
    log_norm: f64,
    cov: SquareMatrix,
}

impl NormalApprox {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &SquareMatrix {
        &self.cov
    }

    pub fn sd(&self, j: usize) -> f64 {
        self.cov[(j, j)].sqrt()
    }

    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let diff: Vec<f64> = theta.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        self.log_norm - 0.5 * self.precision.quad_form(&diff)
    }

    pub fn density(&self, theta: &[f64]) -> f64 {
        self.log_density(theta).exp()
    }
}

pub fn normal_approx(theta_tilde: &[f64], h: &SquareMatrix, n: usize) -> Result<NormalApprox> {
    let d = theta_tilde.len();
    if h.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: h.dim() });
    }
    let h = h.symmetrized();
    let f = spd_factor(&h)?;
    let nf = n as f64;
    let precision = h.scale(nf);
    let log_norm = -0.5 * d as f64 * (2.0 * PI).ln() + 0.5 * (d as f64 * nf.ln() + f.log_det());
    let cov = h.inverse()?.scale(1.0 / nf);
    Ok(NormalApprox { mean: theta_tilde.to_vec(), precision, log_norm, cov })
}

/// Inputs of the asymptotic expansion of the posterior of
/// `w = sqrt(n) (theta - theta~)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionDensity {
    pub theta_tilde: Vec<f64>,
    /// `H(theta~)`.
    pub h: SquareMatrix,
    pub c: SquareMatrix,
    pub n: usize,
    /// `pi_i / pi` at `theta~`.
    pub prior_grad: Vec<f64>,
    /// `pi_ij / pi` at `theta~`.
    pub prior_hess: SquareMatrix,
    /// Third derivatives of the total score, flattened `i*d*d + j*d + k`.
    pub s3: Vec<f64>,
    /// Fourth derivative of the total score; `d = 1` only.
    pub s4: Option<f64>,
    pub order: usize,
}

impl ExpansionDensity {
    /// Collects the expansion inputs from a target by finite differences.
    pub fn from_target(target: &CalibratedTarget, order: usize) -> Result<Self> {
        let d = target.dim();
        check_order(order, d)?;
        let tt = target.theta_tilde().to_vec();
        let prior = target.prior();
        let lp = |t: &[f64]| prior.log_density(t);
        let g = try_fd_gradient(lp, &tt)?;
        let hl = try_fd_hessian(lp, &tt)?;
        let mut prior_hess = hl.clone();
        for a in 0..d {
            for b in 0..d {
                prior_hess[(a, b)] += g[a] * g[b];
            }
        }
        let model = target.model().as_ref();
        let data = target.data();
        let (s3, s4) = if d == 1 {
            let grad = |x: f64| -> Result<f64> {
                if model.has_analytic_gradient() {
                    Ok(total_score(model, data, &[x], Derivatives::Gradient)?.gradient.unwrap()[0])
                } else {
                    fd_derivative_1d(|y| total_score_value(model, data, &[y]), x, 1)
                }
            };
            let s3 = fd_derivative_1d(grad, tt[0], 2)?;
            let s4 = fd_derivative_1d(grad, tt[0], 3)?;
            (vec![s3], Some(s4))
        } else {
            let hess = |t: &[f64]| -> Result<SquareMatrix> {
                total_score(model, data, t, Derivatives::Hessian)?.hessian.ok_or(Error::NonFiniteDerivative)
            };
            (fd_third_tensor(hess, &tt)?, None)
        };
        Ok(Self {
            theta_tilde: tt,
            h: target.curvature().clone(),
            c: target.c().clone(),
            n: target.n(),
            prior_grad: g,
            prior_hess,
            s3,
            s4,
            order,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_tilde.len()
    }

    /// `A1(w) = (pi_i / pi) w^i - (1/6) (S_ijk / n) c_ir c_js c_kt w^r w^s w^t`.
    pub fn a1(&self, w: &[f64]) -> f64 {
        let d = self.dim();
        let n = self.n as f64;
        let cw = self.c.matvec(w);
        let mut cubic = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    cubic += self.s3[i * d * d + j * d + k] * cw[i] * cw[j] * cw[k];
                }
            }
        }
        let linear: f64 = self.prior_grad.iter().zip(w).map(|(a, b)| a * b).sum();
        linear - cubic / (6.0 * n)
    }

    /// Second-order term for `d = 1`.
    pub fn a2(&self, w: f64) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::UnsupportedOrder { order: 2, dim: self.dim() });
        }
        let n = self.n as f64;
        let h = 1.0 / self.h[(0, 0)];
        let c = self.c[(0, 0)];
        let p1 = self.prior_grad[0];
        let p2 = self.prior_hess[(0, 0)];
        let t3 = self.s3[0] / n * c.powi(3);
        let t4 = self.s4.ok_or(Error::UnsupportedOrder { order: 2, dim: 1 })? / n * c.powi(4);
        let w2 = w * w;
        Ok(0.5 * p2 * (w2 - h) - p1 * t3 * (w2 * w2 - 3.0 * h * h) / 6.0 - t4 * (w2 * w2 - 3.0 * h * h) / 24.0
            + t3 * t3 * (w2 * w2 * w2 - 15.0 * h * h * h) / 72.0)
    }

    /// Expansion density of `w` at one point (may be negative far in the tails).
    pub fn density(&self, w: &[f64]) -> Result<f64> {
        let d = self.dim();
        check_order(self.order, d)?;
        if w.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: w.len() });
        }
        let f = spd_factor(&self.h.symmetrized())?;
        let log_phi = -0.5 * d as f64 * (2.0 * PI).ln() + 0.5 * f.log_det() - 0.5 * self.h.quad_form(w);
        let n = self.n as f64;
        let mut corr = 1.0;
        if self.order >= 1 {
            corr += self.a1(w) / n.sqrt();
        }
        if self.order == 2 {
            corr += self.a2(w[0])? / n;
        }
        Ok(log_phi.exp() * corr)
    }
}

fn check_order(order: usize, d: usize) -> Result<()> {
    if order > 2 || (order == 2 && d > 1) {
        Err(Error::UnsupportedOrder { order, dim: d })
    } else {
        Ok(())
    }
}

/// The expansion on a grid of `w` values (`d = 1`). Negative values are
/// clipped to zero; the grid is not renormalized.
pub fn expansion_density(inputs: &ExpansionDensity, w_grid: &[f64]) -> Result<Grid1D> {
    if inputs.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: inputs.dim() });
    }
    let vals = w_grid.iter().map(|&w| Ok(inputs.density(&[w])?.max(0.0))).collect::<Result<Vec<_>>>()?;
    Grid1D::new(w_grid.to_vec(), vals)
}
