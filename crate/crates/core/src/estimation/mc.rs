//! Monte Carlo estimates of expected sensitivity and variability.

use rayon::prelude::*;

use super::godambe::{estimate_j, estimate_k};
use crate::error::Result;
use crate::models::Simulate;
use crate::numerics::SquareMatrix;
use crate::rng::{derive_seed, rng_from_seed};
use crate::scoring::ScoreModel;

/// Expected information at a parameter point, pooled over simulated datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct McInformation {
    pub k: SquareMatrix,
    pub j: SquareMatrix,
    pub g: SquareMatrix,
    /// `sqrt(det G)` of the pooled estimate.
    pub sqrt_det_g: f64,
    /// Standard error of `sqrt(det G)`, from its spread across replicates.
    pub stderr: f64,
    pub replicates: usize,
}

/// Simulates `replicates` datasets of size `n` at `theta`, each from its own
/// stream `derive_seed(seed, r)`, and pools the per-replicate `K` and `J`.
pub fn monte_carlo_information<M>(model: &M, theta: &[f64], replicates: usize, n: usize, seed: u64) -> Result<McInformation>
where
    M: ScoreModel + Simulate + ?Sized,
{
    let per: Vec<(SquareMatrix, SquareMatrix)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, r as u64));
            let data = model.simulate(theta, n, &mut rng)?;
            Ok((estimate_k(model, &data, theta)?, estimate_j(model, &data, theta)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = theta.len();
    let rf = replicates as f64;
    let mut k = SquareMatrix::zeros(d);
    let mut j = SquareMatrix::zeros(d);
    for (kr, jr) in &per {
        k = k.add(kr);
        j = j.add(jr);
    }
    k = k.scale(1.0 / rf);
    j = j.scale(1.0 / rf);
    let g = k.matmul(&j.inverse()?).matmul(&k).symmetrized();
    let sqrt_det_g = g.det().max(0.0).sqrt();
    let per_det: Vec<f64> = per
        .iter()
        .filter_map(|(kr, jr)| jr.inverse().ok().map(|ji| kr.matmul(&ji).matmul(kr).det().max(0.0).sqrt()))
        .collect();
    let stderr = if per_det.len() > 1 {
        let m = per_det.iter().sum::<f64>() / per_det.len() as f64;
        let var = per_det.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (per_det.len() - 1) as f64;
        (var / per_det.len() as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(McInformation { k, j, g, sqrt_det_g, stderr, replicates })
}
