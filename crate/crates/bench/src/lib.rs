//! Fixed inputs shared by the benchmarks.

use std::sync::Arc;

use scorebayes_core::models::{sample_eqcorr, sample_normal, sample_vonmises, NormalModel, NormalParams};
use scorebayes_core::posterior::CalibratedTarget;
use scorebayes_core::priors::PriorSpec;
use scorebayes_core::rng::rng_from_seed;
use scorebayes_core::scoring::ScoreRule;
use scorebayes_core::{Dataset, SquareMatrix};

pub fn vonmises_angles(n: usize) -> Vec<f64> {
    sample_vonmises(1, n, 0.0, 3.0).expect("valid parameters")
}

pub fn eqcorr_data(n: usize, q: usize) -> Dataset {
    sample_eqcorr(2, n, q, 0.0, 1.0, 0.5).expect("valid parameters")
}

/// Log-score normal-mean posterior with a flat prior.
pub fn normal_target(n: usize) -> CalibratedTarget {
    let xs = sample_normal(&mut rng_from_seed(3), n, 0.5, 1.0);
    let xbar = xs.iter().sum::<f64>() / n as f64;
    let model = NormalModel::new(ScoreRule::Log, NormalParams::Mean { sigma: 1.0 });
    CalibratedTarget::new(Arc::new(model), Arc::new(Dataset::from_scalars(&xs)), PriorSpec::Flat, vec![xbar], SquareMatrix::identity(1))
        .expect("valid target")
}
