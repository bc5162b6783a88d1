//! Central finite differences.

use crate::error::{Error, Result};

use super::matrix::SquareMatrix;

fn gradient_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

fn hessian_step(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * x.abs().max(1.0)
}

fn eval<F>(f: &F, point: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let v = f(point)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteEvaluation { point: point.to_vec() })
    }
}

/// Gradient of a fallible scalar field by central differences.
pub fn try_fd_gradient<F>(f: F, theta: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut x = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        let h = gradient_step(theta[j]);
        x[j] = theta[j] + h;
        let xp = x[j];
        let fp = eval(&f, &x)?;
        x[j] = theta[j] - h;
        let xm = x[j];
        let fm = eval(&f, &x)?;
        x[j] = theta[j];
        grad.push((fp - fm) / (xp - xm));
    }
    Ok(grad)
}

/// Gradient by central differences with step `cbrt(eps) * max(1, |theta_j|)`.
pub fn fd_gradient<F>(f: F, theta: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    try_fd_gradient(|t| Ok(f(t)), theta)
}

/// Hessian of a fallible scalar field; symmetrized on return.
pub fn try_fd_hessian<F>(f: F, theta: &[f64]) -> Result<SquareMatrix>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let d = theta.len();
    let h: Vec<f64> = theta.iter().map(|&t| hessian_step(t)).collect();
    let f0 = eval(&f, theta)?;
    let mut x = theta.to_vec();
    let mut hess = SquareMatrix::zeros(d);
    for i in 0..d {
        x[i] = theta[i] + h[i];
        let fp = eval(&f, &x)?;
        x[i] = theta[i] - h[i];
        let fm = eval(&f, &x)?;
        x[i] = theta[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                x[i] = theta[i] + si * h[i];
                x[j] = theta[j] + sj * h[j];
                let v = eval(&f, &x);
                x[i] = theta[i];
                x[j] = theta[j];
                v
            };
            let fpp = corner(1.0, 1.0)?;
            let fpm = corner(1.0, -1.0)?;
            let fmp = corner(-1.0, 1.0)?;
            let fmm = corner(-1.0, -1.0)?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess.symmetrized())
}

/// Hessian by central differences with step `eps^(1/4) * max(1, |theta_j|)`.
pub fn fd_hessian<F>(f: F, theta: &[f64]) -> Result<SquareMatrix>
where
    F: Fn(&[f64]) -> f64,
{
    try_fd_hessian(|t| Ok(f(t)), theta)
}

/// Derivative of order 1..=4 of a scalar function of one variable, using
/// five-point central stencils.
pub fn fd_derivative_1d<F>(f: F, x: f64, order: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidArgument(format!("derivative order {order} not in 1..=4")));
    }
    let h = f64::EPSILON.powf(1.0 / (order as f64 + 2.0)) * x.abs().max(1.0);
    let at = |t: f64| -> Result<f64> {
        let v = f(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEvaluation { point: vec![t] })
        }
    };
    let (fm2, fm1, fp1, fp2) = (at(x - 2.0 * h)?, at(x - h)?, at(x + h)?, at(x + 2.0 * h)?);
    Ok(match order {
        1 => (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h),
        2 => (-fm2 + 16.0 * fm1 - 30.0 * at(x)? + 16.0 * fp1 - fp2) / (12.0 * h * h),
        3 => (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h),
        _ => (fp2 - 4.0 * fp1 + 6.0 * at(x)? - 4.0 * fm1 + fm2) / (h * h * h * h),
    })
}

/// Third-derivative tensor `T[i][j][k]`, flattened as `i*d*d + j*d + k`, from
/// central differences of a Hessian-valued function.
pub fn fd_third_tensor<F>(hessian: F, theta: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<SquareMatrix>,
{
    let d = theta.len();
    let mut out = vec![0.0; d * d * d];
    let mut x = theta.to_vec();
    for k in 0..d {
        let h = f64::EPSILON.powf(1.0 / 6.0) * theta[k].abs().max(1.0);
        x[k] = theta[k] + h;
        let hp = hessian(&x)?;
        x[k] = theta[k] - h;
        let hm = hessian(&x)?;
        x[k] = theta[k];
        for i in 0..d {
            for j in 0..d {
                out[i * d * d + j * d + k] = (hp[(i, j)] - hm[(i, j)]) / (2.0 * h);
            }
        }
    }
    // average over index permutations to remove asymmetric noise
    let mut sym = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let perms = [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)];
                sym[i * d * d + j * d + k] =
                    perms.iter().map(|&(a, b, c)| out[a * d * d + b * d + c]).sum::<f64>() / 6.0;
            }
        }
    }
    Ok(sym)
}
