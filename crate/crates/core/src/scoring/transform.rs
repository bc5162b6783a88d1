//! Maps between unconstrained coordinates `psi` and natural parameters `theta`.

use crate::error::{Error, Result};

/// Coordinate-wise map `theta = f(psi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordTransform {
    Identity,
    /// `theta = exp(rate * psi)`; rate 1 for `log k`, rate 2 maps `log s` to `s^2`.
    Exp { rate: f64 },
    /// `theta = lo + (hi - lo) / (1 + exp(-psi))`, a logit rescaled to `(lo, hi)`.
    Logistic { lo: f64, hi: f64 },
}

impl CoordTransform {
    pub fn forward(&self, psi: f64) -> f64 {
        match *self {
            Self::Identity => psi,
            Self::Exp { rate } => (rate * psi).exp(),
            Self::Logistic { lo, hi } => lo + (hi - lo) * logistic(psi),
        }
    }

    pub fn inverse(&self, theta: f64) -> Result<f64> {
        match *self {
            Self::Identity => Ok(theta),
            Self::Exp { rate } => {
                if theta > 0.0 {
                    Ok(theta.ln() / rate)
                } else {
                    Err(Error::OutsideSupport { value: theta, lo: 0.0, hi: f64::INFINITY })
                }
            }
            Self::Logistic { lo, hi } => {
                if theta > lo && theta < hi {
                    let u = (theta - lo) / (hi - lo);
                    Ok((u / (1.0 - u)).ln())
                } else {
                    Err(Error::OutsideSupport { value: theta, lo, hi })
                }
            }
        }
    }

    /// `d theta / d psi`.
    pub fn derivative(&self, psi: f64) -> f64 {
        match *self {
            Self::Identity => 1.0,
            Self::Exp { rate } => rate * (rate * psi).exp(),
            Self::Logistic { lo, hi } => {
                let s = logistic(psi);
                (hi - lo) * s * (1.0 - s)
            }
        }
    }

    /// `log |d theta / d psi|`, evaluated without overflow in the tails.
    pub fn log_abs_derivative(&self, psi: f64) -> f64 {
        match *self {
            Self::Identity => 0.0,
            Self::Exp { rate } => rate.abs().ln() + rate * psi,
            Self::Logistic { lo, hi } => (hi - lo).ln() - softplus(psi) - softplus(-psi),
        }
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

/// One [`CoordTransform`] per parameter coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTransform {
    coords: Vec<CoordTransform>,
}

impl ParamTransform {
    pub fn new(coords: Vec<CoordTransform>) -> Self {
        Self { coords }
    }

    pub fn identity(d: usize) -> Self {
        Self { coords: vec![CoordTransform::Identity; d] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[CoordTransform] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|c| *c == CoordTransform::Identity)
    }

    pub fn to_natural(&self, psi: &[f64]) -> Vec<f64> {
        self.coords.iter().zip(psi).map(|(c, &p)| c.forward(p)).collect()
    }

    pub fn to_unconstrained(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: theta.len() });
        }
        self.coords.iter().zip(theta).map(|(c, &t)| c.inverse(t)).collect()
    }

    /// Diagonal of the Jacobian `d theta / d psi`.
    pub fn jacobian_diag(&self, psi: &[f64]) -> Vec<f64> {
        self.coords.iter().zip(psi).map(|(c, &p)| c.derivative(p)).collect()
    }

    pub fn log_abs_det_jacobian(&self, psi: &[f64]) -> f64 {
        self.coords.iter().zip(psi).map(|(c, &p)| c.log_abs_derivative(p)).sum()
    }
}
