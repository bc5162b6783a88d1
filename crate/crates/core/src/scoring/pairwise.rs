//! Pairwise log-likelihood score for the equi-correlated normal model.
//!
//! Additive constants (`log 2 pi` terms) are dropped throughout.

use crate::data::Dataset;
use crate::error::{Error, Result};

fn check(q: usize, sigma2: f64, rho: f64) -> Result<()> {
    if q < 2 {
        return Err(Error::Domain(format!("pairwise score needs q >= 2, got {q}")));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Domain(format!("sigma^2 must be positive, got {sigma2}")));
    }
    let lo = -1.0 / (q as f64 - 1.0);
    if !(rho > lo && rho < 1.0) {
        return Err(Error::Domain(format!("rho = {rho} outside ({lo}, 1)")));
    }
    Ok(())
}

/// Negative pairwise log-likelihood contribution of one q-vector.
pub fn pairwise_eqcorr_obs(x: &[f64], mu: f64, sigma2: f64, rho: f64) -> Result<f64> {
    let q = x.len();
    check(q, sigma2, rho)?;
    let qf = q as f64;
    let pairs = qf * (qf - 1.0);
    let mean = x.iter().sum::<f64>() / qf;
    let w: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(0.5 * pairs * sigma2.ln()
        + 0.25 * pairs * (1.0 - rho * rho).ln()
        + (qf - 1.0 + rho) * w / (2.0 * sigma2 * (1.0 - rho * rho))
        + pairs * (mean - mu) * (mean - mu) / (2.0 * sigma2 * (1.0 + rho)))
}

/// Negative pairwise log-likelihood of an `n x q` sample from the within and
/// between sums of squares.
pub fn pairwise_eqcorr_score(data: &Dataset, theta: &[f64]) -> Result<f64> {
    if theta.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: theta.len() });
    }
    let (mu, sigma2, rho) = (theta[0], theta[1], theta[2]);
    let q = data.m();
    check(q, sigma2, rho)?;
    let n = data.n() as f64;
    if data.is_empty() {
        return Ok(0.0);
    }
    let qf = q as f64;
    let pairs = qf * (qf - 1.0);
    let row_means: Vec<f64> = data.rows().map(|r| r.iter().sum::<f64>() / qf).collect();
    let grand = row_means.iter().sum::<f64>() / n;
    let ssw: f64 = data.rows().zip(&row_means).map(|(r, m)| r.iter().map(|v| (v - m) * (v - m)).sum::<f64>()).sum();
    let ssb: f64 = row_means.iter().map(|m| (m - grand) * (m - grand)).sum();
    Ok(0.5 * n * pairs * sigma2.ln()
        + 0.25 * n * pairs * (1.0 - rho * rho).ln()
        + (qf - 1.0 + rho) * ssw / (2.0 * sigma2 * (1.0 - rho * rho))
        + (pairs * ssb + n * pairs * (grand - mu) * (grand - mu)) / (2.0 * sigma2 * (1.0 + rho)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|i| (0..4).map(|r| ((i * 4 + r) as f64 * 0.731).sin() * 1.3 + 0.2 * r as f64).collect())
            .collect();
        Dataset::from_rows(&rows).unwrap()
    }

    fn bivariate_nll(x: &[f64], mu: f64, s2: f64, rho: f64) -> f64 {
        let (u, v) = (x[0] - mu, x[1] - mu);
        let det = s2 * s2 * (1.0 - rho * rho);
        0.5 * det.ln() + (u * u + v * v - 2.0 * rho * u * v) / (2.0 * s2 * (1.0 - rho * rho))
    }

    #[test]
    fn summed_observations_match_closed_form() {
        let d = sample();
        let theta = [0.3, 1.7, 0.25];
        let total = pairwise_eqcorr_score(&d, &theta).unwrap();
        let by_obs: f64 = d.rows().map(|r| pairwise_eqcorr_obs(r, 0.3, 1.7, 0.25).unwrap()).sum();
        assert!((total - by_obs).abs() < 1e-10 * total.abs());
    }

    #[test]
    fn q2_equals_bivariate_likelihood() {
        let x = [0.4, -1.1];
        for &(mu, s2, rho) in &[(0.0, 1.0, 0.0), (0.5, 2.0, -0.7), (-1.0, 0.3, 0.9)] {
            let a = pairwise_eqcorr_obs(&x, mu, s2, rho).unwrap();
            assert!((a - bivariate_nll(&x, mu, s2, rho)).abs() < 1e-12);
        }
    }

    #[test]
    fn pairs_sum_to_pairwise_score() {
        // brute force: sum of bivariate terms over all ordered-pair halves
        let d = sample();
        let (mu, s2, rho) = (0.1, 0.8, 0.35);
        let mut brute = 0.0;
        for r in d.rows() {
            for a in 0..r.len() {
                for b in (a + 1)..r.len() {
                    brute += bivariate_nll(&[r[a], r[b]], mu, s2, rho);
                }
            }
        }
        let v = pairwise_eqcorr_score(&d, &[mu, s2, rho]).unwrap();
        assert!((v - brute).abs() < 1e-10 * brute.abs());
    }

    #[test]
    fn location_equivariance() {
        let d = sample();
        let shifted = Dataset::new(d.m(), d.as_slice().iter().map(|v| v + 3.5).collect()).unwrap();
        let a = pairwise_eqcorr_score(&d, &[0.2, 1.1, 0.4]).unwrap();
        let b = pairwise_eqcorr_score(&shifted, &[3.7, 1.1, 0.4]).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs());
    }

    #[test]
    fn domain_checks() {
        let d = sample();
        assert!(matches!(pairwise_eqcorr_score(&d, &[0.0, -1.0, 0.1]), Err(Error::Domain(_))));
        assert!(matches!(pairwise_eqcorr_score(&d, &[0.0, 1.0, -0.34]), Err(Error::Domain(_))));
        assert!(pairwise_eqcorr_score(&d, &[0.0, 1.0, -0.33]).is_ok());
        assert!(matches!(pairwise_eqcorr_score(&d, &[0.0, 1.0, 1.0]), Err(Error::Domain(_))));
    }
}
