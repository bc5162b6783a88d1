//! Sensitivity, variability and Godambe information.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{pairwise_sum, spd_factor, SquareMatrix};
use crate::scoring::{total_score, Derivatives, ScoreModel};

/// Godambe quantities at a parameter point.
///
/// `g = k j^-1 k`, `v = g^-1`, `c` satisfies `c^T k c = g`, and
/// `h = c^T S'' c / n` is the curvature of the calibrated total score.
#[derive(Debug, Clone, PartialEq)]
pub struct GodambeEstimate {
    pub theta: Vec<f64>,
    pub k: SquareMatrix,
    pub j: SquareMatrix,
    pub g: SquareMatrix,
    pub v: SquareMatrix,
    pub c: SquareMatrix,
    pub h: SquareMatrix,
}

fn elementwise_mean(ms: &[SquareMatrix], d: usize) -> SquareMatrix {
    let mut out = SquareMatrix::zeros(d);
    let n = ms.len() as f64;
    for a in 0..d {
        for b in 0..d {
            out[(a, b)] = pairwise_sum(&ms.iter().map(|m| m[(a, b)]).collect::<Vec<_>>()) / n;
        }
    }
    out
}

fn per_observation_hessians<M: ScoreModel + ?Sized>(model: &M, data: &Dataset, theta: &[f64]) -> Result<Vec<SquareMatrix>> {
    data.rows()
        .map(|x| {
            let h = model.score_hessian(x, theta).map_err(|_| Error::NonFiniteDerivative)?;
            if h.is_finite() {
                Ok(h)
            } else {
                Err(Error::NonFiniteDerivative)
            }
        })
        .collect()
}

fn per_observation_outer<M: ScoreModel + ?Sized>(model: &M, data: &Dataset, theta: &[f64]) -> Result<Vec<SquareMatrix>> {
    let d = theta.len();
    data.rows()
        .map(|x| {
            let g = model.score_gradient(x, theta).map_err(|_| Error::NonFiniteDerivative)?;
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteDerivative);
            }
            let mut m = SquareMatrix::zeros(d);
            for a in 0..d {
                for b in 0..d {
                    m[(a, b)] = g[a] * g[b];
                }
            }
            Ok(m)
        })
        .collect()
}

fn nonempty(data: &Dataset) -> Result<()> {
    if data.is_empty() {
        Err(Error::EmptyDataset)
    } else {
        Ok(())
    }
}

/// Sensitivity `K = mean of d s(x_i) / d theta^T`, from per-observation
/// Hessians of the score.
pub fn estimate_k<M: ScoreModel + ?Sized>(model: &M, data: &Dataset, theta: &[f64]) -> Result<SquareMatrix> {
    nonempty(data)?;
    Ok(elementwise_mean(&per_observation_hessians(model, data, theta)?, theta.len()).symmetrized())
}

/// Variability `J = mean of s(x_i) s(x_i)^T`.
pub fn estimate_j<M: ScoreModel + ?Sized>(model: &M, data: &Dataset, theta: &[f64]) -> Result<SquareMatrix> {
    nonempty(data)?;
    Ok(elementwise_mean(&per_observation_outer(model, data, theta)?, theta.len()))
}

/// Per-element mean and standard error of `d s / d theta^T - s s^T` over the
/// observations; zero in expectation exactly when the information identity
/// holds.
pub fn information_identity_gap<M: ScoreModel + ?Sized>(
    model: &M,
    data: &Dataset,
    theta: &[f64],
) -> Result<(SquareMatrix, SquareMatrix)> {
    nonempty(data)?;
    let d = theta.len();
    let hs = per_observation_hessians(model, data, theta)?;
    let os = per_observation_outer(model, data, theta)?;
    let diffs: Vec<SquareMatrix> = hs.iter().zip(&os).map(|(h, o)| h.sub(o)).collect();
    let mean = elementwise_mean(&diffs, d);
    let n = diffs.len() as f64;
    let mut se = SquareMatrix::zeros(d);
    for a in 0..d {
        for b in 0..d {
            let var = diffs.iter().map(|m| (m[(a, b)] - mean[(a, b)]).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            se[(a, b)] = (var / n).sqrt();
        }
    }
    Ok((mean, se))
}

/// Assembles the Godambe quantities from `K`, `J` and the total-score Hessian
/// at `theta`, for a sample of size `n`.
///
/// `C = M^-1 M_A` with `M`, `M_A` the upper-triangular factors of `K` and `G`.
pub fn assemble_godambe(
    k: &SquareMatrix,
    j: &SquareMatrix,
    theta: &[f64],
    total_hessian: &SquareMatrix,
    n: usize,
) -> Result<GodambeEstimate> {
    let k = k.symmetrized();
    let j = j.symmetrized();
    let mk = spd_factor(&k)?;
    spd_factor(&j)?;
    let j_inv = j.inverse()?;
    let g = k.matmul(&j_inv).matmul(&k).symmetrized();
    let k_inv = k.inverse()?;
    let v = k_inv.matmul(&j).matmul(&k_inv).symmetrized();
    let ma = spd_factor(&g)?;
    let c = mk.inverse_factor().matmul(ma.matrix());
    let h = c.transpose().matmul(total_hessian).matmul(&c).scale(1.0 / n.max(1) as f64).symmetrized();
    Ok(GodambeEstimate { theta: theta.to_vec(), k, j, g, v, c, h })
}

/// Empirical Godambe estimate at `theta` from the observed data.
pub fn godambe_at<M: ScoreModel + ?Sized>(model: &M, data: &Dataset, theta: &[f64]) -> Result<GodambeEstimate> {
    let k = estimate_k(model, data, theta)?;
    let j = estimate_j(model, data, theta)?;
    let hess = total_score(model, data, theta, Derivatives::Hessian)?.hessian.ok_or(Error::NonFiniteDerivative)?;
    assemble_godambe(&k, &j, theta, &hess, data.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalar_case() {
        let e = assemble_godambe(&SquareMatrix::scalar(4.0), &SquareMatrix::scalar(2.0), &[0.0], &SquareMatrix::scalar(40.0), 10).unwrap();
        assert!((e.g[(0, 0)] - 8.0).abs() < 1e-14);
        assert!((e.v[(0, 0)] - 0.125).abs() < 1e-14);
        assert!((e.c[(0, 0)] - 2f64.sqrt()).abs() < 1e-14);
        assert!((e.h[(0, 0)] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn equal_k_and_j_give_identity_calibration() {
        let k = SquareMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let e = assemble_godambe(&k, &k, &[0.0, 0.0], &k.scale(5.0), 5).unwrap();
        assert!(e.c.sub(&SquareMatrix::identity(2)).max_abs() < 1e-8);
        assert!(e.g.rel_frobenius_distance(&k) < 1e-12);
    }

    #[test]
    fn indefinite_inputs() {
        let bad = SquareMatrix::from_diag(&[1.0, -1.0]);
        let ok = SquareMatrix::identity(2);
        assert!(matches!(assemble_godambe(&bad, &ok, &[0.0; 2], &ok, 1), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(assemble_godambe(&ok, &bad, &[0.0; 2], &ok, 1), Err(Error::NotPositiveDefinite { .. })));
    }

    fn spd(d: usize, entries: &[f64]) -> SquareMatrix {
        let a = SquareMatrix::from_row_major(d, entries[..d * d].to_vec()).unwrap();
        a.transpose().matmul(&a).add(&SquareMatrix::identity(d))
    }

    proptest! {
        #[test]
        fn calibration_identity(d in 1usize..=5, e1 in proptest::collection::vec(-2.0f64..2.0, 25), e2 in proptest::collection::vec(-2.0f64..2.0, 25)) {
            let k = spd(d, &e1);
            let j = spd(d, &e2);
            let est = assemble_godambe(&k, &j, &vec![0.0; d], &k, 1).unwrap();
            let ctkc = est.c.transpose().matmul(&est.k).matmul(&est.c);
            prop_assert!(ctkc.rel_frobenius_distance(&est.g) < 1e-10);
            prop_assert!(est.v.matmul(&est.g).rel_frobenius_distance(&SquareMatrix::identity(d)) < 1e-8);
            prop_assert!(est.g.rel_frobenius_distance(&k.matmul(&j.inverse().unwrap()).matmul(&k)) < 1e-8);
        }
    }
}
