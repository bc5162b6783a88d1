//! Modified Bessel functions of the first kind, orders 0 and 1.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this the power series is used; above it the large-argument expansion.
const REGIME_SPLIT: f64 = 20.0;

/// Power series `(I0(x), I1(x))`; only used for `x < REGIME_SPLIT` where
/// neither overflows.
fn series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 0.5 * x;
    let (mut s0, mut s1) = (t0, t1);
    let mut k = 1.0;
    loop {
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        s0 += t0;
        s1 += t1;
        if t0 <= s0 * 1e-17 && t1 <= s1 * 1e-17 {
            break;
        }
        k += 1.0;
    }
    (s0, s1)
}

/// Sum of the asymptotic expansion `I_nu(x) ~ e^x / sqrt(2 pi x) * sum`,
/// truncated at its smallest term.
fn asymptotic_sum(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (k * 8.0 * x);
        if next.abs() >= term.abs() || next.abs() < 1e-18 * sum.abs() {
            if next.abs() < term.abs() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum
}

/// Mean resultant length `A1(k) = I1(k) / I0(k)` of a von Mises distribution.
///
/// Uses the power series for `k < 20` and the ratio of the two large-argument
/// expansions above, so the exponentially large factors cancel analytically.
pub fn bessel_ratio_a1(kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("A1 requires kappa >= 0, got {kappa}")));
    }
    if kappa > 1e6 {
        return Err(Error::Domain(format!("A1 requires kappa <= 1e6, got {kappa}")));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    if kappa < REGIME_SPLIT {
        let (i0, i1) = series(kappa);
        Ok(i1 / i0)
    } else {
        Ok(asymptotic_sum(1.0, kappa) / asymptotic_sum(0.0, kappa))
    }
}

/// `log I0(k)` without overflow for large arguments.
pub fn log_bessel_i0(kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("log I0 requires finite kappa >= 0, got {kappa}")));
    }
    if kappa < REGIME_SPLIT {
        Ok(series(kappa).0.ln())
    } else {
        Ok(kappa - 0.5 * (2.0 * PI * kappa).ln() + asymptotic_sum(0.0, kappa).ln())
    }
}
