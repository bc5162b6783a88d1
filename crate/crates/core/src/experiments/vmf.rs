//! Concentration of a von Mises sample with known mean direction, scored by
//! the Hyvarinen rule.

use std::sync::Arc;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimation::{assemble_godambe, minimize_total_score, vmf_kappa_known_direction, GodambeEstimate};
use crate::models::{sample_vonmises, VonMisesKappaHyvarinen, VonMisesKappaLog};
use crate::numerics::{bessel_ratio_a1, linspace, Grid1D};
use crate::posterior::{grid_posterior_1d, summarize_grid, CalibratedTarget, PosteriorSummary};
use crate::priors::{vmf_reference_prior, PriorSpec};
use crate::rng::derive_seed;
use crate::scoring::{total_score, Derivatives, ScoreModel};

use super::{LabelledSummary, Reproduction, Table};

/// Expected per-observation sensitivity and variability of the Hyvarinen
/// score in `kappa`: `K = A1/k`, `J = 2 - 3 A1/k`.
pub fn vmf_expected_information(kappa: f64) -> Result<(f64, f64)> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let r = bessel_ratio_a1(kappa)? / kappa;
    Ok((r, 2.0 - 3.0 * r))
}

/// `V(k) = k (2k - 3 A1) / A1^2`.
pub fn vmf_sandwich_variance(kappa: f64) -> Result<f64> {
    let (k, j) = vmf_expected_information(kappa)?;
    Ok(j / (k * k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VmfPrior {
    Reference,
    InverseKappa,
    Flat,
}

impl VmfPrior {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(Self::Reference),
            "inverse_kappa" | "jeffreys_scale" => Ok(Self::InverseKappa),
            "flat" => Ok(Self::Flat),
            _ => Err(Error::InvalidArgument(format!("unknown von Mises prior '{s}'"))),
        }
    }

    pub fn spec(self) -> PriorSpec {
        match self {
            Self::Reference => PriorSpec::closed_form("von Mises reference", |t: &[f64]| Ok(vmf_reference_prior(t[0])?.ln())),
            Self::InverseKappa => PriorSpec::Power { coord: 0, exponent: -1.0 },
            Self::Flat => PriorSpec::Flat,
        }
    }
}

/// Hyvarinen fit of `kappa` with Godambe quantities from the expected
/// information at the estimate.
pub fn vmf_fit(data: &Dataset, theta0: f64) -> Result<GodambeEstimate> {
    let angles = data.column(0);
    let kappa = vmf_kappa_known_direction(&angles, theta0)?;
    if !(kappa > 0.0) {
        return Err(Error::DegenerateSample(format!("Hyvarinen estimate of kappa is not positive ({kappa})")));
    }
    let (k, j) = vmf_expected_information(kappa)?;
    let model = VonMisesKappaHyvarinen { theta0 };
    let hess = total_score(&model, data, &[kappa], Derivatives::Hessian)?.hessian.ok_or(Error::NonFiniteDerivative)?;
    assemble_godambe(
        &crate::numerics::SquareMatrix::scalar(k),
        &crate::numerics::SquareMatrix::scalar(j),
        &[kappa],
        &hess,
        data.n(),
    )
}

/// The calibrated and uncalibrated Hyvarinen posteriors.
pub fn vmf_targets(data: &Dataset, theta0: f64, prior: VmfPrior) -> Result<(CalibratedTarget, CalibratedTarget, GodambeEstimate)> {
    let est = vmf_fit(data, theta0)?;
    let model: Arc<dyn ScoreModel> = Arc::new(VonMisesKappaHyvarinen { theta0 });
    let data = Arc::new(data.clone());
    let cal = CalibratedTarget::calibrated(model.clone(), data.clone(), prior.spec(), &est)?;
    let uncal = CalibratedTarget::uncalibrated(model, data, prior.spec(), est.theta.clone())?;
    Ok((cal, uncal, est))
}

/// Posterior from the von Mises likelihood itself.
pub fn vmf_full_likelihood_target(data: &Dataset, theta0: f64, prior: VmfPrior, start: f64) -> Result<CalibratedTarget> {
    let model = VonMisesKappaLog { theta0 };
    let fit = minimize_total_score(&model, data, &[start])?;
    CalibratedTarget::uncalibrated(Arc::new(model), Arc::new(data.clone()), prior.spec(), fit.theta)
}

/// Grid from near zero (or `kappa~ - 10 sd`) to `kappa~ + 10 sd`, with
/// `sd = sqrt(V(kappa~)/n)`.
pub fn vmf_kappa_grid(kappa_tilde: f64, n: usize, points: usize) -> Result<Vec<f64>> {
    let sd = (vmf_sandwich_variance(kappa_tilde)? / n as f64).sqrt();
    let lo = (kappa_tilde - 10.0 * sd).max(1e-3);
    Ok(linspace(lo, kappa_tilde + 10.0 * sd, points))
}

/// Posterior spreads for one simulated sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmfCalibrationCheck {
    pub kappa_tilde: f64,
    pub sd_calibrated: f64,
    pub sd_uncalibrated: f64,
    /// `sqrt(V(kappa~) / n)`.
    pub sd_sandwich: f64,
}

pub fn vmf_calibration_check(seed: u64, n: usize, kappa: f64, prior: VmfPrior) -> Result<VmfCalibrationCheck> {
    let data = Dataset::from_scalars(&sample_vonmises(seed, n, 0.0, kappa)?);
    let (cal, uncal, est) = vmf_targets(&data, 0.0, prior)?;
    let kt = est.theta[0];
    let grid = vmf_kappa_grid(kt, n, 1201)?;
    let gc = grid_posterior_1d(&cal, &grid)?;
    let gu = grid_posterior_1d(&uncal, &grid)?;
    Ok(VmfCalibrationCheck {
        kappa_tilde: kt,
        sd_calibrated: gc.sd(),
        sd_uncalibrated: gu.sd(),
        sd_sandwich: (vmf_sandwich_variance(kt)? / n as f64).sqrt(),
    })
}

fn summary_row(t: &mut Table, n: usize, kappa: f64, prior: f64, s: &PosteriorSummary) {
    t.push(vec![n as f64, kappa, prior, s.mode, s.mean, s.sd, s.lower, s.upper]);
}

/// Plot data for the von Mises example: prior curves, calibrated versus
/// uncalibrated versus likelihood posteriors, a scenario sweep over
/// `n in {10, 30, 50}` and `kappa in {1, 5}`, and a calibration study.
pub fn vmf_reproduce(seed: u64) -> Result<Reproduction> {
    let mut tables = Vec::new();
    let mut summaries = Vec::new();

    let mut prior = Table::new("prior_curves", &["kappa", "reference", "inverse_kappa"]);
    for k in linspace(0.01, 10.0, 1000) {
        prior.push(vec![k, vmf_reference_prior(k)?, 1.0 / k]);
    }
    tables.push(prior);

    // main comparison: n = 50, kappa = 3, prior 1/kappa
    let (n, kappa) = (50, 3.0);
    let angles = sample_vonmises(derive_seed(seed, 0), n, 0.0, kappa)?;
    let mut data_t = Table::new("sample", &["angle"]);
    for a in &angles {
        data_t.push(vec![*a]);
    }
    tables.push(data_t);
    let data = Dataset::from_scalars(&angles);
    let (cal, uncal, est) = vmf_targets(&data, 0.0, VmfPrior::InverseKappa)?;
    let kt = est.theta[0];
    let full = vmf_full_likelihood_target(&data, 0.0, VmfPrior::InverseKappa, kt)?;
    let grid = vmf_kappa_grid(kt, n, 1201)?;
    let gc = grid_posterior_1d(&cal, &grid)?;
    let gu = grid_posterior_1d(&uncal, &grid)?;
    let gf = grid_posterior_1d(&full, &grid)?;
    tables.push(Table::from_grids(
        "calibration_posteriors",
        "kappa",
        &[("calibrated", &gc), ("uncalibrated", &gu), ("full_likelihood", &gf)],
    )?);
    let mut main = Table::new("calibration_summary", &["n", "kappa_true", "posterior", "mode", "mean", "sd", "lower", "upper"]);
    for (code, label, g) in [(0.0, "calibrated", &gc), (1.0, "uncalibrated", &gu), (2.0, "full_likelihood", &gf)] {
        let s = summarize_grid(g);
        summary_row(&mut main, n, kappa, code, &s);
        summaries.push(LabelledSummary::new(label, "kappa", s));
    }
    tables.push(main);

    let mut sweep = Table::new("scenario_summary", &["n", "kappa_true", "prior", "mode", "mean", "sd", "lower", "upper"]);
    for (si, (n, kappa)) in [(10, 1.0), (30, 1.0), (50, 1.0), (10, 5.0), (30, 5.0), (50, 5.0)].into_iter().enumerate() {
        let angles = sample_vonmises(derive_seed(seed, 1 + si as u64), n, 0.0, kappa)?;
        let data = Dataset::from_scalars(&angles);
        let (cr, _, est) = vmf_targets(&data, 0.0, VmfPrior::Reference)?;
        let (ci, _, _) = vmf_targets(&data, 0.0, VmfPrior::InverseKappa)?;
        let kt = est.theta[0];
        let sd = (vmf_sandwich_variance(kt)? / n as f64).sqrt();
        let grid = linspace(1e-3, (kt + 8.0 * sd).max(3.0 * kappa), 1201);
        let gr = grid_posterior_1d(&cr, &grid)?;
        let gi = grid_posterior_1d(&ci, &grid)?;
        let name = format!("scenario_n{n}_kappa{kappa}");
        tables.push(Table::from_grids(&name, "kappa", &[("reference", &gr), ("inverse_kappa", &gi)])?);
        summary_row(&mut sweep, n, kappa, 0.0, &summarize_grid(&gr));
        summary_row(&mut sweep, n, kappa, 1.0, &summarize_grid(&gi));
    }
    tables.push(sweep);

    let mut study = Table::new("calibration_study", &["replicate", "kappa_tilde", "sd_calibrated", "sd_uncalibrated", "sd_sandwich"]);
    for r in 0..50u64 {
        let c = vmf_calibration_check(derive_seed(seed, 100 + r), 50, 3.0, VmfPrior::InverseKappa)?;
        study.push(vec![r as f64, c.kappa_tilde, c.sd_calibrated, c.sd_uncalibrated, c.sd_sandwich]);
    }
    tables.push(study);
    Ok(Reproduction { tables, summaries })
}

/// Grid posterior of `kappa` for a given sample.
pub fn vmf_grid_posterior(data: &Dataset, theta0: f64, prior: VmfPrior, points: usize) -> Result<(Grid1D, GodambeEstimate)> {
    let (cal, _, est) = vmf_targets(data, theta0, prior)?;
    let grid = vmf_kappa_grid(est.theta[0], data.n(), points)?;
    Ok((grid_posterior_1d(&cal, &grid)?, est))
}
