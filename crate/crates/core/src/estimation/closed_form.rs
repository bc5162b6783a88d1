//! Closed-form minimum-score estimators.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::NefModel;

/// Trigonometric sample moments of a set of angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularMoments {
    pub c: f64,
    pub s: f64,
    pub c2: f64,
    pub s2: f64,
}

impl CircularMoments {
    pub fn new(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = angles.len() as f64;
        let mut m = Self { c: 0.0, s: 0.0, c2: 0.0, s2: 0.0 };
        for &t in angles {
            m.c += t.cos();
            m.s += t.sin();
            m.c2 += (2.0 * t).cos();
            m.s2 += (2.0 * t).sin();
        }
        m.c /= n;
        m.s /= n;
        m.c2 /= n;
        m.s2 /= n;
        Ok(m)
    }

    /// Squared mean resultant length of the doubled angles.
    pub fn r2_squared(&self) -> f64 {
        self.c2 * self.c2 + self.s2 * self.s2
    }

    fn check(&self) -> Result<()> {
        if self.r2_squared() >= 1.0 - 1e-12 {
            return Err(Error::DegenerateSample(
                "doubled angles have unit resultant length; the concentration estimate is unbounded".into(),
            ));
        }
        Ok(())
    }
}

/// Solves the 2x2 normal equations of circular score matching for the
/// natural parameters `(a, b)` of `exp(a cos t + b sin t)`.
pub fn circular_normal_equations(angles: &[f64]) -> Result<(f64, f64)> {
    let m = CircularMoments::new(angles)?;
    m.check()?;
    let det = 0.25 * (1.0 - m.r2_squared());
    let a = (0.5 * (1.0 + m.c2) * m.c + 0.5 * m.s2 * m.s) / det;
    let b = (0.5 * m.s2 * m.c + 0.5 * (1.0 - m.c2) * m.s) / det;
    Ok((a, b))
}

/// Hyvarinen estimate of the von Mises concentration from the trigonometric
/// moments of the sample. Invariant to the mean direction.
pub fn vmf_kappa_closed_form(angles: &[f64]) -> Result<f64> {
    let m = CircularMoments::new(angles)?;
    m.check()?;
    let r2 = m.c * m.c + m.s * m.s;
    let rr2 = m.r2_squared();
    let inner = r2 * (1.0 + rr2) + 2.0 * (m.c * m.c - m.s * m.s) * m.c2 + 4.0 * m.c * m.s * m.s2;
    Ok(2.0 * inner.max(0.0).sqrt() / (1.0 - rr2))
}

/// Hyvarinen estimate of the concentration when the mean direction `theta0`
/// is known: `mean cos(t - theta0) / mean sin^2(t - theta0)`.
pub fn vmf_kappa_known_direction(angles: &[f64], theta0: f64) -> Result<f64> {
    if angles.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (mut c, mut s2) = (0.0, 0.0);
    for &t in angles {
        let (s, co) = (t - theta0).sin_cos();
        c += co;
        s2 += s * s;
    }
    if s2 <= 1e-12 * angles.len() as f64 {
        return Err(Error::DegenerateSample("all angles on the mean axis".into()));
    }
    Ok(c / s2)
}

/// Hyvarinen estimate of a natural exponential family parameter,
/// `-mean a'(x)`.
pub fn nef_theta_closed_form(data: &Dataset, model: &NefModel) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(-data.rows().map(|r| model.a1(r[0])).sum::<f64>() / data.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_angles_are_degenerate() {
        assert!(matches!(vmf_kappa_closed_form(&[0.4; 10]), Err(Error::DegenerateSample(_))));
        // antipodal pairs double to a single direction
        assert!(matches!(vmf_kappa_closed_form(&[0.1, 0.1 + std::f64::consts::PI]), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn nef_closed_form_examples() {
        let m = NefModel::unit_normal();
        assert_eq!(nef_theta_closed_form(&Dataset::from_scalars(&[1.0, 3.0]), &m).unwrap(), 2.0);
        assert!(nef_theta_closed_form(&Dataset::from_scalars(&[]), &m).is_err());
    }

    #[test]
    fn rotation_invariance() {
        let angles = [0.1, 0.5, -0.3, 1.2, 0.05, -0.8, 0.33];
        let k = vmf_kappa_closed_form(&angles).unwrap();
        let rotated: Vec<f64> = angles.iter().map(|t| t + 1.9).collect();
        assert!((vmf_kappa_closed_form(&rotated).unwrap() - k).abs() < 1e-12);
    }
}
