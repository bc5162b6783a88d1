//! Equi-correlated normal model scored by the pairwise likelihood.

use std::sync::Arc;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimation::{assemble_godambe, minimize_total_score, monte_carlo_information, GodambeEstimate};
use crate::models::{rho_lower_bound, sample_eqcorr, PairwiseEqCorr};
use crate::numerics::{grid_normalize, linspace, Grid1D};
use crate::posterior::{grid_posterior_1d, mh_sample, summarize_chain, summarize_grid, CalibratedTarget, Chain, MhOptions};
use crate::priors::{tabulate_reference_prior, transform_prior, GProvider, McSettings, PriorSpec, TabulatedPrior};
use crate::rng::derive_seed;
use crate::scoring::{CoordTransform, FixedParams, ParamTransform, Reparametrized, ScoreModel};

use super::{LabelledSummary, Reproduction, Table};

pub type RhoModel = Reparametrized<FixedParams<PairwiseEqCorr>>;

/// Scaled logit of `rho` on `(-1/(q-1), 1)`.
pub fn rho_transform(q: usize) -> CoordTransform {
    CoordTransform::Logistic { lo: rho_lower_bound(q), hi: 1.0 }
}

/// Pairwise likelihood in `psi = scaled logit(rho)` with `mu` and `sigma^2` known.
pub fn rho_only_model(q: usize, mu: f64, sigma2: f64) -> Result<RhoModel> {
    let fixed = FixedParams::new(PairwiseEqCorr { q }, vec![Some(mu), Some(sigma2), None])?;
    Ok(Reparametrized::with_transform(fixed, ParamTransform::new(vec![rho_transform(q)])))
}

/// Reference prior of `psi` tabulated by Monte Carlo on `psi_nodes`.
pub fn rho_reference_prior(q: usize, mu: f64, sigma2: f64, settings: McSettings, psi_nodes: &[f64]) -> Result<TabulatedPrior> {
    let model = rho_only_model(q, mu, sigma2)?;
    tabulate_reference_prior(psi_nodes, &GProvider::MonteCarlo { model: Arc::new(model), settings })
}

/// The uniform prior on `rho`, as a density of `psi`.
pub fn rho_uniform_prior(q: usize) -> PriorSpec {
    transform_prior(PriorSpec::Flat, ParamTransform::new(vec![rho_transform(q)]))
}

/// Godambe estimate in `psi` with `K`, `J` from simulation at `psi~`.
pub fn rho_fit(data: &Dataset, q: usize, mu: f64, sigma2: f64, settings: McSettings) -> Result<GodambeEstimate> {
    let model = rho_only_model(q, mu, sigma2)?;
    let fit = minimize_total_score(&model, data, &[0.0])?;
    expected_godambe(&model, data, &fit.theta, settings)
}

fn expected_godambe<M>(model: &M, data: &Dataset, theta: &[f64], settings: McSettings) -> Result<GodambeEstimate>
where
    M: ScoreModel + crate::models::Simulate,
{
    let info = monte_carlo_information(model, theta, settings.replicates, settings.n, settings.seed)?;
    let hess = crate::scoring::total_score(model, data, theta, crate::scoring::Derivatives::Hessian)?
        .hessian
        .ok_or(Error::NonFiniteDerivative)?;
    assemble_godambe(&info.k, &info.j, theta, &hess, data.n())
}

/// Calibrated posterior of `rho` (known `mu`, `sigma^2`).
#[derive(Debug, Clone)]
pub struct RhoPosterior {
    pub estimate: GodambeEstimate,
    pub rho_tilde: f64,
    /// Density of `rho` on the image of the `psi` grid.
    pub grid: Grid1D,
}

/// Grid posterior in `psi`, mapped to a density of `rho`. `prior` is a
/// density of `psi`.
pub fn rho_posterior(data: &Dataset, q: usize, mu: f64, sigma2: f64, prior: PriorSpec, settings: McSettings, psi_grid: &[f64]) -> Result<RhoPosterior> {
    let est = rho_fit(data, q, mu, sigma2, settings)?;
    rho_posterior_with(data, q, mu, sigma2, prior, est, psi_grid)
}

pub fn rho_posterior_with(
    data: &Dataset,
    q: usize,
    mu: f64,
    sigma2: f64,
    prior: PriorSpec,
    est: GodambeEstimate,
    psi_grid: &[f64],
) -> Result<RhoPosterior> {
    let model: Arc<dyn ScoreModel> = Arc::new(rho_only_model(q, mu, sigma2)?);
    let target = CalibratedTarget::calibrated(model, Arc::new(data.clone()), prior, &est)?;
    let gp = grid_posterior_1d(&target, psi_grid)?;
    let t = rho_transform(q);
    let nodes: Vec<f64> = psi_grid.iter().map(|&p| t.forward(p)).collect();
    let vals: Vec<f64> = psi_grid.iter().zip(gp.values()).map(|(&p, &v)| v / t.derivative(p)).collect();
    let grid = grid_normalize(&Grid1D::new(nodes, vals)?)?;
    Ok(RhoPosterior { rho_tilde: t.forward(est.theta[0]), estimate: est, grid })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqCorrPrior {
    /// `1/sigma` on `(mu, sigma, rho)`.
    InverseSigma,
    /// Flat on `(mu, log sigma, scaled logit rho)`.
    FlatXi,
    Reference,
}

impl EqCorrPrior {
    pub const ALL: [Self; 3] = [Self::InverseSigma, Self::FlatXi, Self::Reference];

    pub fn label(self) -> &'static str {
        match self {
            Self::InverseSigma => "inverse_sigma",
            Self::FlatXi => "flat_xi",
            Self::Reference => "reference",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown equi-correlated prior '{s}'")))
    }
}

/// `log g(psi)` with `sqrt(det G(mu, tau, psi)) = exp(-tau) g(psi)` in the
/// unconstrained coordinates, tabulated at `(0, 0, psi)`.
pub fn eqcorr_reference_table(q: usize, settings: McSettings, psi_nodes: &[f64]) -> Result<TabulatedPrior> {
    let model = Reparametrized::new(PairwiseEqCorr { q });
    let rows = psi_nodes
        .par_iter()
        .enumerate()
        .map(|(i, &psi)| {
            let info = monte_carlo_information(&model, &[0.0, 0.0, psi], settings.replicates, settings.n, derive_seed(settings.seed, i as u64))?;
            if !(info.sqrt_det_g > 0.0) {
                return Err(Error::NotPositiveDefinite { minor: 0 });
            }
            Ok((info.sqrt_det_g.ln(), info.stderr / info.sqrt_det_g))
        })
        .collect::<Result<Vec<_>>>()?;
    TabulatedPrior::new(psi_nodes.to_vec(), rows.iter().map(|r| r.0).collect(), rows.iter().map(|r| r.1).collect())
}

/// Prior density in `theta = (mu, sigma^2, rho)`. The reference prior needs
/// the table from [`eqcorr_reference_table`].
pub fn eqcorr_prior(kind: EqCorrPrior, q: usize, table: Option<&TabulatedPrior>) -> Result<PriorSpec> {
    let t = PairwiseEqCorr { q }.transform();
    Ok(match kind {
        EqCorrPrior::InverseSigma => PriorSpec::Power { coord: 1, exponent: -1.0 },
        EqCorrPrior::FlatXi => PriorSpec::closed_form("flat in unconstrained coordinates", move |theta: &[f64]| {
            let xi = t.to_unconstrained(theta)?;
            Ok(-t.log_abs_det_jacobian(&xi))
        }),
        EqCorrPrior::Reference => {
            let table = table.ok_or_else(|| Error::InvalidArgument("reference prior needs a tabulated g".into()))?.clone();
            PriorSpec::closed_form("equi-correlated reference", move |theta: &[f64]| {
                let xi = t.to_unconstrained(theta)?;
                Ok(table.log_density(xi[2])? - xi[1] - t.log_abs_det_jacobian(&xi))
            })
        }
    })
}

fn moment_start(data: &Dataset, q: usize) -> Vec<f64> {
    let n = data.n() as f64;
    let mu = data.as_slice().iter().sum::<f64>() / (n * q as f64);
    let s2 = data.as_slice().iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n * q as f64);
    let mut cov = 0.0;
    for r in data.rows() {
        for a in 0..q {
            for b in 0..a {
                cov += (r[a] - mu) * (r[b] - mu);
            }
        }
    }
    let pairs = (q * (q - 1) / 2) as f64;
    let rho = (cov / (n * pairs * s2.max(1e-12))).clamp(rho_lower_bound(q) + 0.05, 0.95);
    vec![mu, s2.max(1e-6), rho]
}

/// Pairwise fit of `(mu, sigma^2, rho)` with `K`, `J` from simulation at the estimate.
pub fn eqcorr_fit(data: &Dataset, q: usize, settings: McSettings) -> Result<GodambeEstimate> {
    let model = PairwiseEqCorr { q };
    let fit = minimize_total_score(&model, data, &moment_start(data, q))?;
    expected_godambe(&model, data, &fit.theta, settings)
}

pub fn eqcorr_chain(data: &Dataset, q: usize, prior: PriorSpec, est: &GodambeEstimate, opts: MhOptions, seed: u64) -> Result<Chain> {
    let target = CalibratedTarget::calibrated(Arc::new(PairwiseEqCorr { q }), Arc::new(data.clone()), prior, est)?;
    mh_sample(&target, opts, seed)
}

fn histogram_rows(table: &mut Table, chains: &[Chain], bins: usize) {
    for j in 0..3 {
        let cols: Vec<Vec<f64>> = chains.iter().map(|c| c.column(j)).collect();
        let lo = cols.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        let hi = cols.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
        let mut counts = vec![vec![0.0; chains.len()]; bins];
        for (k, col) in cols.iter().enumerate() {
            for &v in col {
                let b = (((v - lo) / width) as usize).min(bins - 1);
                counts[b][k] += 1.0 / (col.len() as f64 * width);
            }
        }
        for (b, c) in counts.into_iter().enumerate() {
            let mut row = vec![j as f64, lo + b as f64 * width, lo + (b + 1) as f64 * width];
            row.extend(c);
            table.push(row);
        }
    }
}

/// Plot data for the equi-correlated example: calibrated posteriors of
/// `(mu, sigma^2, rho)` under three priors in two scenarios, and posteriors of
/// `rho` alone under the reference and uniform priors.
pub fn eqcorr_reproduce(seed: u64) -> Result<Reproduction> {
    let mut tables = Vec::new();
    let mut summaries = Vec::new();
    let names = ["mu", "sigma2", "rho"];
    let mut summary = Table::new("summary", &["scenario", "prior", "parameter", "mode", "mean", "sd", "lower", "upper"]);
    let scenarios = [(10usize, 10usize, 0.0, 1.0, 0.5), (10, 4, 0.0, 0.5, 0.1)];
    let psi_nodes = linspace(-8.0, 8.0, 41);
    for (si, &(n, q, mu, s2, rho)) in scenarios.iter().enumerate() {
        let label = format!("scenario{}", si + 1);
        let data = sample_eqcorr(derive_seed(seed, si as u64), n, q, mu, s2, rho)?;
        let settings = McSettings { replicates: 100, n: 300, seed: derive_seed(seed, 10 + si as u64) };
        let table = eqcorr_reference_table(q, settings, &psi_nodes)?;
        let mut gt = Table::new(&format!("{label}_reference_g"), &["psi", "log_g", "mc_stderr"]);
        for ((p, l), e) in table.nodes().iter().zip(table.log_values()).zip(table.stderr()) {
            gt.push(vec![*p, *l, *e]);
        }
        tables.push(gt);
        let est = eqcorr_fit(&data, q, McSettings { seed: derive_seed(seed, 20 + si as u64), ..settings })?;
        let mut chains = Vec::new();
        for (pi, kind) in EqCorrPrior::ALL.into_iter().enumerate() {
            let prior = eqcorr_prior(kind, q, Some(&table))?;
            let chain = eqcorr_chain(&data, q, prior, &est, MhOptions::default(), derive_seed(seed, 100 + 10 * si as u64 + pi as u64))?;
            tables.push(Table::from_chain(&format!("{label}_chain_{}", kind.label()), &names, &chain));
            for (j, s) in summarize_chain(&chain).into_iter().enumerate() {
                summary.push(vec![(si + 1) as f64, pi as f64, j as f64, s.mode, s.mean, s.sd, s.lower, s.upper]);
                summaries.push(LabelledSummary::new(&format!("{label}/{}", kind.label()), names[j], s));
            }
            chains.push(chain);
        }
        let mut hist = Table::new(&format!("{label}_histograms"), &["parameter", "bin_lo", "bin_hi", "inverse_sigma", "flat_xi", "reference"]);
        histogram_rows(&mut hist, &chains, 40);
        tables.push(hist);
    }
    tables.push(summary);

    let psi_prior = linspace(-8.0, 8.0, 81);
    let psi_grid = linspace(-8.0, 8.0, 1601);
    for (k, &(q, rho)) in [(5usize, 0.1), (5, 0.5), (10, 0.1), (10, 0.5)].iter().enumerate() {
        let settings = McSettings { replicates: 200, n: 500, seed: derive_seed(seed, 300 + k as u64) };
        let prior = rho_reference_prior(q, 0.0, 1.0, settings, &psi_prior)?;
        let data = sample_eqcorr(derive_seed(seed, 400 + k as u64), 10, q, 0.0, 1.0, rho)?;
        let est = rho_fit(&data, q, 0.0, 1.0, McSettings { seed: derive_seed(seed, 500 + k as u64), ..settings })?;
        let r = rho_posterior_with(&data, q, 0.0, 1.0, PriorSpec::Tabulated(prior), est.clone(), &psi_grid)?;
        let u = rho_posterior_with(&data, q, 0.0, 1.0, rho_uniform_prior(q), est, &psi_grid)?;
        tables.push(Table::from_grids(&format!("rho_known_q{q}_rho{rho}"), "rho", &[("reference", &r.grid), ("uniform", &u.grid)])?);
        summaries.push(LabelledSummary::new(&format!("rho_known_q{q}_rho{rho}/reference"), "rho", summarize_grid(&r.grid)));
        summaries.push(LabelledSummary::new(&format!("rho_known_q{q}_rho{rho}/uniform"), "rho", summarize_grid(&u.grid)));
    }
    Ok(Reproduction { tables, summaries })
}
