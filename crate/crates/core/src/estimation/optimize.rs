//! Nelder-Mead minimization of total scores in unconstrained coordinates.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::SquareMatrix;
use crate::scoring::{total_score, total_score_value, Derivatives, ParamTransform, ScoreModel};

/// Outcome of a minimum-score fit, in natural parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MinScoreResult {
    pub theta: Vec<f64>,
    pub score_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop once every vertex lies within this distance of the best one.
    pub simplex_tol: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { simplex_tol: 1e-10, max_iterations: 100_000, initial_step: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

fn simplex_size(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// Nelder-Mead with standard coefficients. Evaluation errors and non-finite
/// values count as `+inf`, except at the starting point. The simplex is
/// rebuilt around the best vertex after convergence until a restart no longer
/// improves the value.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: NelderMeadOptions) -> Result<NelderMeadResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let f0 = f(x0)?;
    if !f0.is_finite() {
        return Err(Error::NonFiniteScore { theta: x0.to_vec() });
    }
    let eval = |x: &[f64]| match f(x) {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    };
    let d = x0.len();
    let mut best = (x0.to_vec(), f0);
    let mut iterations = 0;
    let mut step = opts.initial_step;
    for _restart in 0..20 {
        let mut simplex = vec![best.0.clone()];
        let mut values = vec![best.1];
        for j in 0..d {
            let mut v = best.0.clone();
            v[j] += step * v[j].abs().max(1.0);
            values.push(eval(&v));
            simplex.push(v);
        }
        loop {
            let mut order: Vec<usize> = (0..=d).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();
            if simplex_size(&simplex) <= opts.simplex_tol * best.0.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
                break;
            }
            if iterations >= opts.max_iterations {
                return Err(Error::MaxIterations(opts.max_iterations));
            }
            iterations += 1;
            let centroid: Vec<f64> =
                (0..d).map(|j| simplex[..d].iter().map(|v| v[j]).sum::<f64>() / d as f64).collect();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[d]).map(|(c, w)| c + t * (w - c)).collect()
            };
            let xr = along(-1.0);
            let fr = eval(&xr);
            if fr < values[0] {
                let xe = along(-2.0);
                let fe = eval(&xe);
                if fe < fr {
                    simplex[d] = xe;
                    values[d] = fe;
                } else {
                    simplex[d] = xr;
                    values[d] = fr;
                }
            } else if fr < values[d - 1] {
                simplex[d] = xr;
                values[d] = fr;
            } else {
                let (xc, fc) = if fr < values[d] {
                    let xc = along(-0.5);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(0.5);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < values[d].min(fr) {
                    simplex[d] = xc;
                    values[d] = fc;
                } else {
                    for i in 1..=d {
                        let shrunk: Vec<f64> = simplex[0].iter().zip(&simplex[i]).map(|(b, v)| b + 0.5 * (v - b)).collect();
                        values[i] = eval(&shrunk);
                        simplex[i] = shrunk;
                    }
                }
            }
        }
        let improved = values[0] < best.1;
        let moved = simplex[0] != best.0;
        best = (simplex[0].clone(), values[0]);
        if !improved && !moved {
            break;
        }
        step = step.min(1e-3).max(1e-6);
    }
    Ok(NelderMeadResult { x: best.0, value: best.1, iterations })
}

fn gradient_norm(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Minimizes the total score starting from `theta_init` (natural parameters),
/// optimizing in the model's unconstrained coordinates. A few damped Newton
/// steps follow the simplex search when its gradient certificate fails.
pub fn minimize_total_score<M: ScoreModel + ?Sized>(
    model: &M,
    data: &Dataset,
    theta_init: &[f64],
) -> Result<MinScoreResult> {
    minimize_total_score_with(model, data, theta_init, NelderMeadOptions::default())
}

pub fn minimize_total_score_with<M: ScoreModel + ?Sized>(
    model: &M,
    data: &Dataset,
    theta_init: &[f64],
    opts: NelderMeadOptions,
) -> Result<MinScoreResult> {
    if !model.in_domain(theta_init) {
        return Err(Error::Domain(format!("starting point {theta_init:?} outside the parameter domain")));
    }
    let transform = model.transform();
    let objective = |psi: &[f64]| -> Result<f64> {
        let theta = transform.to_natural(psi);
        if !model.in_domain(&theta) {
            return Ok(f64::INFINITY);
        }
        total_score_value(model, data, &theta)
    };
    let psi0 = transform.to_unconstrained(theta_init)?;
    let nm = nelder_mead(objective, &psi0, opts)?;
    let mut psi = nm.x;
    let mut value = nm.value;
    let mut theta = transform.to_natural(&psi);
    let mut grad = total_score(model, data, &theta, Derivatives::Gradient)?.gradient.unwrap_or_default();
    let tol = |v: f64| 1e-6 * v.abs().max(1.0);
    for _ in 0..8 {
        if gradient_norm(&grad) <= tol(value) {
            break;
        }
        match newton_step(model, data, &transform, &psi, value) {
            Some((p, v)) => {
                psi = p;
                value = v;
                theta = transform.to_natural(&psi);
                grad = total_score(model, data, &theta, Derivatives::Gradient)?.gradient.unwrap_or_default();
            }
            None => break,
        }
    }
    let gn = gradient_norm(&grad);
    Ok(MinScoreResult { theta, score_value: value, iterations: nm.iterations, converged: gn <= tol(value), gradient_norm: gn })
}

/// One Newton step in unconstrained coordinates with backtracking; `None`
/// when it does not decrease the score.
fn newton_step<M: ScoreModel + ?Sized>(
    model: &M,
    data: &Dataset,
    transform: &ParamTransform,
    psi: &[f64],
    value: f64,
) -> Option<(Vec<f64>, f64)> {
    let in_psi = |p: &[f64]| -> Result<f64> {
        let theta = transform.to_natural(p);
        if !model.in_domain(&theta) {
            return Err(Error::Domain("outside domain".into()));
        }
        total_score_value(model, data, &theta)
    };
    let g = crate::numerics::try_fd_gradient(in_psi, psi).ok()?;
    let h: SquareMatrix = crate::numerics::try_fd_hessian(in_psi, psi).ok()?;
    let step = h.solve(&g).ok()?;
    let mut t = 1.0;
    for _ in 0..20 {
        let cand: Vec<f64> = psi.iter().zip(&step).map(|(p, s)| p - t * s).collect();
        if let Ok(v) = in_psi(&cand) {
            if v < value || (v <= value && cand != psi) {
                return Some((cand, v));
            }
        }
        t *= 0.5;
    }
    None
}

/// Best of several local fits.
pub fn minimize_multistart<M: ScoreModel + ?Sized>(
    model: &M,
    data: &Dataset,
    starts: &[Vec<f64>],
) -> Result<MinScoreResult> {
    let mut best: Option<MinScoreResult> = None;
    let mut last_err = None;
    for s in starts {
        match minimize_total_score(model, data, s) {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.score_value < b.score_value) {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::InvalidArgument("no starting points".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let r = nelder_mead(f, &[-1.2, 1.0], NelderMeadOptions::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn non_finite_start_rejected() {
        let f = |x: &[f64]| Ok(x[0].ln());
        assert!(nelder_mead(f, &[-1.0], NelderMeadOptions::default()).is_err());
    }

    #[test]
    fn iteration_limit() {
        let f = |x: &[f64]| Ok(x.iter().map(|v| v * v).sum::<f64>());
        let opts = NelderMeadOptions { max_iterations: 3, ..Default::default() };
        assert_eq!(nelder_mead(f, &[5.0, 5.0], opts), Err(Error::MaxIterations(3)));
    }
}
