use std::f64::consts::PI;

use rand::Rng as _;

use super::Simulate;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::log_bessel_i0;
use crate::rng::{rng_from_seed, Rng};
use crate::scoring::{circular_hyvarinen_score, CoordTransform, ParamTransform, ScoreModel};

/// Von Mises distribution on the circle with mean direction `theta0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMises {
    pub theta0: f64,
    pub kappa: f64,
}

impl VonMises {
    pub fn new(theta0: f64, kappa: f64) -> Result<Self> {
        if kappa >= 0.0 && kappa.is_finite() && theta0.is_finite() {
            Ok(Self { theta0, kappa })
        } else {
            Err(Error::Domain(format!("von Mises needs kappa >= 0, got {kappa}")))
        }
    }

    /// Normalized log-density with respect to arc length.
    pub fn log_density(&self, t: f64) -> Result<f64> {
        Ok(self.kappa * (t - self.theta0).cos() - (2.0 * PI).ln() - log_bessel_i0(self.kappa)?)
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(t: f64) -> f64 {
    let w = (t + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Best-Fisher wrapped-Cauchy rejection sampler.
pub fn sample_vonmises_rng(rng: &mut Rng, n: usize, theta0: f64, kappa: f64) -> Result<Vec<f64>> {
    VonMises::new(theta0, kappa)?;
    if kappa < 1e-8 {
        return Ok((0..n).map(|_| wrap_angle(theta0 - PI + 2.0 * PI * rng.random::<f64>())).collect());
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let u3: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let dev = f.clamp(-1.0, 1.0).acos();
            out.push(wrap_angle(theta0 + if u3 > 0.5 { dev } else { -dev }));
        }
    }
    Ok(out)
}

/// `n` von Mises angles in `[-pi, pi)` from a fresh stream seeded by `seed`.
pub fn sample_vonmises(seed: u64, n: usize, theta0: f64, kappa: f64) -> Result<Vec<f64>> {
    sample_vonmises_rng(&mut rng_from_seed(seed), n, theta0, kappa)
}

/// Hyvarinen score for the concentration `kappa` with known mean direction:
/// `-kappa cos(t - theta0) + kappa^2 sin^2(t - theta0) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMisesKappaHyvarinen {
    pub theta0: f64,
}

impl ScoreModel for VonMisesKappaHyvarinen {
    fn name(&self) -> &str {
        "von Mises concentration, Hyvarinen score"
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn obs_dim(&self) -> usize {
        1
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        let (a, b) = (theta[0] * self.theta0.cos(), theta[0] * self.theta0.sin());
        Ok(circular_hyvarinen_score(x[0], a, b))
    }
    fn has_analytic_gradient(&self) -> bool {
        true
    }
    fn score_gradient(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        let (s, c) = (x[0] - self.theta0).sin_cos();
        Ok(vec![-c + theta[0] * s * s])
    }
    fn in_domain(&self, theta: &[f64]) -> bool {
        theta[0] > 0.0 && theta[0].is_finite()
    }
    fn transform(&self) -> ParamTransform {
        ParamTransform::new(vec![CoordTransform::Exp { rate: 1.0 }])
    }
}

impl Simulate for VonMisesKappaHyvarinen {
    fn simulate(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Result<Dataset> {
        Ok(Dataset::from_scalars(&sample_vonmises_rng(rng, n, self.theta0, theta[0])?))
    }
}

/// Log score (negative log-likelihood) for the concentration with known mean
/// direction; gives the full-likelihood posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMisesKappaLog {
    pub theta0: f64,
}

impl ScoreModel for VonMisesKappaLog {
    fn name(&self) -> &str {
        "von Mises concentration, log score"
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn obs_dim(&self) -> usize {
        1
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        Ok(-VonMises::new(self.theta0, theta[0])?.log_density(x[0])?)
    }
    fn in_domain(&self, theta: &[f64]) -> bool {
        theta[0] > 0.0 && theta[0].is_finite()
    }
    fn transform(&self) -> ParamTransform {
        ParamTransform::new(vec![CoordTransform::Exp { rate: 1.0 }])
    }
}

impl Simulate for VonMisesKappaLog {
    fn simulate(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Result<Dataset> {
        Ok(Dataset::from_scalars(&sample_vonmises_rng(rng, n, self.theta0, theta[0])?))
    }
}

/// Hyvarinen score on the circle in the natural parameters `(a, b)` of the
/// density proportional to `exp(a cos t + b sin t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CircularHyvarinen;

impl ScoreModel for CircularHyvarinen {
    fn name(&self) -> &str {
        "circular Hyvarinen"
    }
    fn param_dim(&self) -> usize {
        2
    }
    fn obs_dim(&self) -> usize {
        1
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        Ok(circular_hyvarinen_score(x[0], theta[0], theta[1]))
    }
    fn has_analytic_gradient(&self) -> bool {
        true
    }
    fn score_gradient(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        let (s, c) = x[0].sin_cos();
        let d1 = -theta[0] * s + theta[1] * c;
        Ok(vec![-c - s * d1, -s + c * d1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::bessel_ratio_a1;

    #[test]
    fn uniform_case_log_density() {
        let v = VonMises::new(0.3, 0.0).unwrap();
        for t in [-3.0, 0.0, 2.0] {
            assert!((v.log_density(t).unwrap() + (2.0 * PI).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn wrap_range() {
        for t in [-7.0, -PI, 0.0, PI, 3.0 * PI, 100.0] {
            let w = wrap_angle(t);
            assert!((-PI..PI).contains(&w));
            assert!(((w - t) / (2.0 * PI) - ((w - t) / (2.0 * PI)).round()).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_when_kappa_zero() {
        let n = 100_000;
        let mut xs = sample_vonmises(11, n, 0.0, 0.0).unwrap();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (i, x) in xs.iter().enumerate() {
            let f = (x + PI) / (2.0 * PI);
            d = d.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
        }
        // Kolmogorov critical value at alpha = 0.01
        assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
    }

    #[test]
    fn resultant_length_matches_a1() {
        let theta0 = 0.7;
        let xs = sample_vonmises(5, 100_000, theta0, 3.0).unwrap();
        let c = xs.iter().map(|t| t.cos()).sum::<f64>() / xs.len() as f64;
        let s = xs.iter().map(|t| t.sin()).sum::<f64>() / xs.len() as f64;
        assert!((s.atan2(c) - theta0).abs() < 0.02);
        assert!(((c * c + s * s).sqrt() - bessel_ratio_a1(3.0).unwrap()).abs() < 0.01);
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(sample_vonmises(3, 50, 0.0, 2.0).unwrap(), sample_vonmises(3, 50, 0.0, 2.0).unwrap());
        assert_ne!(sample_vonmises(3, 50, 0.0, 2.0).unwrap(), sample_vonmises(4, 50, 0.0, 2.0).unwrap());
    }

    #[test]
    fn kappa_score_is_circular_score_on_the_mean_axis() {
        let m = VonMisesKappaHyvarinen { theta0: 0.4 };
        let v = m.score(&[1.1], &[2.5]).unwrap();
        let (s, c) = (1.1f64 - 0.4).sin_cos();
        assert!((v - (-2.5 * c + 0.5 * 6.25 * s * s)).abs() < 1e-14);
    }
}
