//! Pointwise scoring rules.

use super::TsallisConfig;
use crate::error::{Error, Result};
use crate::numerics::integrate;

/// A univariate density known through its log-density.
pub trait Density {
    fn log_density(&self, x: f64) -> f64;

    /// Closed form of `int q(y)^gamma dy`, when the family has one.
    fn power_integral(&self, _gamma: f64) -> Option<f64> {
        None
    }

    /// Finite interval carrying all but a negligible part of the mass, used
    /// for quadrature when no closed form exists.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }
}

/// A density with first and second derivatives of `log q` in the observation.
pub trait SmoothDensity {
    fn grad_log_density(&self, x: &[f64]) -> Vec<f64>;
    fn laplacian_log_density(&self, x: &[f64]) -> f64;
}

/// Logarithmic score `-log q(x)`.
pub fn log_score<D: Density + ?Sized>(x: f64, q: &D) -> Result<f64> {
    let l = q.log_density(x);
    if l.is_finite() {
        Ok(-l)
    } else {
        Err(Error::NonFiniteDensity { x })
    }
}

/// `int q(y)^gamma dy`: closed form if available, adaptive quadrature on the
/// declared support otherwise.
pub fn power_integral<D: Density + ?Sized>(q: &D, gamma: f64) -> Result<f64> {
    if let Some(v) = q.power_integral(gamma) {
        return Ok(v);
    }
    let (lo, hi) = q.support().ok_or(Error::IntegralUnavailable)?;
    integrate(|y| (gamma * q.log_density(y)).exp(), lo, hi, 1e-12)
}

/// Tsallis score `(gamma - 1) int q^gamma - gamma q(x)^(gamma - 1)`.
pub fn tsallis_score<D: Density + ?Sized>(x: f64, q: &D, cfg: TsallisConfig) -> Result<f64> {
    let g = cfg.gamma();
    let l = q.log_density(x);
    if l.is_nan() || l == f64::INFINITY {
        return Err(Error::NonFiniteDensity { x });
    }
    Ok((g - 1.0) * power_integral(q, g)? - g * ((g - 1.0) * l).exp())
}

/// Hyvarinen score `lap log q(x) + |grad log q(x)|^2 / 2`.
pub fn hyvarinen_score<D: SmoothDensity + ?Sized>(x: &[f64], q: &D) -> Result<f64> {
    let grad = q.grad_log_density(x);
    let lap = q.laplacian_log_density(x);
    let v = lap + 0.5 * grad.iter().map(|g| g * g).sum::<f64>();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteDerivative)
    }
}

/// Hyvarinen score on the circle for the density proportional to
/// `exp(a cos t + b sin t)`.
pub fn circular_hyvarinen_score(t: f64, a: f64, b: f64) -> f64 {
    let (s, c) = t.sin_cos();
    let d1 = -a * s + b * c;
    -a * c - b * s + 0.5 * d1 * d1
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    struct StdNormal {
        shift: f64,
        with_closed_form: bool,
    }

    impl Density for StdNormal {
        fn log_density(&self, x: f64) -> f64 {
            -0.5 * x * x - 0.5 * (2.0 * PI).ln() + self.shift
        }
        fn power_integral(&self, gamma: f64) -> Option<f64> {
            self.with_closed_form.then(|| (2.0 * PI).powf(0.5 * (1.0 - gamma)) / gamma.sqrt())
        }
        fn support(&self) -> Option<(f64, f64)> {
            Some((-40.0, 40.0))
        }
    }

    impl SmoothDensity for StdNormal {
        fn grad_log_density(&self, x: &[f64]) -> Vec<f64> {
            vec![-x[0]]
        }
        fn laplacian_log_density(&self, _x: &[f64]) -> f64 {
            -1.0
        }
    }

    struct Uniform01;
    impl Density for Uniform01 {
        fn log_density(&self, x: f64) -> f64 {
            if (0.0..=1.0).contains(&x) {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        }
    }

    const N01: StdNormal = StdNormal { shift: 0.0, with_closed_form: true };

    #[test]
    fn log_score_values() {
        assert!((log_score(0.0, &N01).unwrap() - 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        assert_eq!(log_score(0.3, &Uniform01).unwrap(), 0.0);
        assert!(matches!(log_score(2.0, &Uniform01), Err(Error::NonFiniteDensity { .. })));
    }

    #[test]
    fn log_score_against_numerically_normalized_table() {
        // unnormalized density exp(-x^4) on [-3, 3], normalized by quadrature
        let z = integrate(|x: f64| (-x.powi(4)).exp(), -3.0, 3.0, 1e-13).unwrap();
        struct Quartic(f64);
        impl Density for Quartic {
            fn log_density(&self, x: f64) -> f64 {
                -x.powi(4) - self.0.ln()
            }
        }
        let q = Quartic(z);
        // 2 Gamma(5/4) = 1.8128049541109541
        assert!((z - 1.812_804_954_110_954).abs() < 1e-10);
        assert!((log_score(0.7, &q).unwrap() - (0.7f64.powi(4) + z.ln())).abs() < 1e-14);
    }

    #[test]
    fn tsallis_closed_form_and_quadrature_agree() {
        let cfg = TsallisConfig::new(2.0).unwrap();
        let closed = tsallis_score(0.0, &N01, cfg).unwrap();
        let expected = 1.0 / (2.0 * PI.sqrt()) - 2.0 / (2.0 * PI).sqrt();
        assert!((closed - expected).abs() < 1e-14);
        assert!((closed + 0.515_789_77).abs() < 1e-8);
        let quad = tsallis_score(0.0, &StdNormal { shift: 0.0, with_closed_form: false }, cfg).unwrap();
        assert!((quad - closed).abs() < 1e-10);
    }

    #[test]
    fn tsallis_needs_an_integral() {
        let cfg = TsallisConfig::new(1.5).unwrap();
        assert_eq!(tsallis_score(0.5, &Uniform01, cfg), Err(Error::IntegralUnavailable));
        assert!(TsallisConfig::new(1.0).is_err());
    }

    #[test]
    fn tsallis_near_one_tracks_log_score() {
        let g = 1.001;
        let cfg = TsallisConfig::new(g).unwrap();
        for (a, b) in [(0.0, 1.0), (-0.5, 0.8), (0.3, -1.2)] {
            let dt = (tsallis_score(a, &N01, cfg).unwrap() - tsallis_score(b, &N01, cfg).unwrap()) / (g * (g - 1.0));
            let dl = log_score(a, &N01).unwrap() - log_score(b, &N01).unwrap();
            assert!((dt - dl).abs() < 1e-3, "{dt} vs {dl}");
        }
    }

    #[test]
    fn tsallis_depends_on_density_only() {
        let cfg = TsallisConfig::new(1.5).unwrap();
        assert_eq!(tsallis_score(1.3, &N01, cfg).unwrap(), tsallis_score(-1.3, &N01, cfg).unwrap());
    }

    #[test]
    fn hyvarinen_values_and_homogeneity() {
        assert_eq!(hyvarinen_score(&[0.0], &N01).unwrap(), -1.0);
        let shifted = StdNormal { shift: 17.25, with_closed_form: true };
        for x in [-2.0, 0.1, 3.0] {
            assert_eq!(hyvarinen_score(&[x], &N01).unwrap(), hyvarinen_score(&[x], &shifted).unwrap());
            assert_eq!(hyvarinen_score(&[x], &N01).unwrap(), -1.0 + 0.5 * x * x);
        }
    }

    #[test]
    fn circular_special_cases() {
        for t in [-3.0, 0.0, 1.0, 2.5] {
            assert_eq!(circular_hyvarinen_score(t, 0.0, 0.0), 0.0);
        }
        assert_eq!(circular_hyvarinen_score(0.0, 3.0, 0.0), -3.0);
    }
}
