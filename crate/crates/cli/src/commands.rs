//! The four subcommands for each example. Every command builds its complete
//! output in memory; nothing is written until all computation succeeded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use scorebayes_core::estimation::{godambe_at, minimize_total_score, vmf_kappa_closed_form};
use scorebayes_core::experiments::eqcorr::{eqcorr_chain, eqcorr_fit, eqcorr_prior, eqcorr_reference_table, eqcorr_reproduce, EqCorrPrior};
use scorebayes_core::experiments::regression::{
    max_abs_error, regression_fit, regression_model, regression_prior, regression_reproduce, regression_target, RegressionData,
    RegressionPrior, RegressionSetup,
};
use scorebayes_core::experiments::vmf::{
    vmf_fit, vmf_full_likelihood_target, vmf_kappa_grid, vmf_reproduce, vmf_sandwich_variance, vmf_targets, VmfPrior,
};
use scorebayes_core::experiments::{LabelledSummary, Reproduction, Table};
use scorebayes_core::models::{ols, rho_lower_bound, sample_eqcorr, sample_normal, sample_vonmises, LinRegModel, NormalModel, NormalParams, VonMisesKappaLog};
use scorebayes_core::numerics::linspace;
use scorebayes_core::posterior::{
    grid_posterior_1d, mh_sample, normal_approx, summarize_chain, summarize_grid, CalibratedTarget, Chain, MhOptions, PosteriorSummary,
};
use scorebayes_core::priors::{vmf_reference_prior, McSettings, PriorSpec};
use scorebayes_core::rng::{derive_seed, rng_from_seed};
use scorebayes_core::scoring::{ScoreModel, ScoreRule, TsallisConfig};
use scorebayes_core::{Dataset, GodambeEstimate};

use crate::bundle::{FileRef, GodambeSummary, ResultBundle, SummaryRecord};
use crate::config::{Example, ExperimentConfig};
use crate::dataset::{read_dataset, table_to_string};
use crate::error::{numerical, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Estimate,
    Sample,
    PriorEval,
    Reproduce,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Estimate => "estimate",
            Self::Sample => "sample",
            Self::PriorEval => "prior-eval",
            Self::Reproduce => "reproduce",
        }
    }
}

/// Everything a command produces, held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub bundle: ResultBundle,
    /// `(file name, contents)` pairs written next to `results.json`.
    pub files: Vec<(String, String)>,
}

impl Output {
    fn new(command: Command, cfg: &ExperimentConfig, seed: u64) -> Self {
        let config: BTreeMap<String, String> = cfg.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        Self { bundle: ResultBundle::new(command.as_str(), cfg.example.as_str(), seed, config), files: Vec::new() }
    }

    fn table(&mut self, t: &Table) {
        self.file(&t.name, t.rows.len(), table_to_string(t));
    }

    fn file(&mut self, name: &str, rows: usize, contents: String) {
        let path = format!("{name}.csv");
        self.bundle.files.push(FileRef { name: name.to_string(), path: path.clone(), rows });
        self.files.push((path, contents));
    }

    fn estimate(&mut self, names: &[&str], est: &GodambeEstimate, n: usize) -> Result<(), CliError> {
        self.bundle.parameter_names = names.iter().map(|s| s.to_string()).collect();
        self.bundle.theta_tilde = est.theta.clone();
        self.bundle.godambe = Some(GodambeSummary::from(est));
        let approx = normal_approx(&est.theta, &est.h, n).map_err(numerical("normal approximation"))?;
        for (j, name) in names.iter().enumerate() {
            let (m, sd) = (est.theta[j], approx.sd(j));
            let s = PosteriorSummary { mode: m, mean: m, sd, lower: m - 1.959963984540054 * sd, upper: m + 1.959963984540054 * sd };
            self.summary("normal_approx", name, s);
        }
        Ok(())
    }

    fn summary(&mut self, label: &str, parameter: &str, s: PosteriorSummary) {
        self.bundle.summaries.push(SummaryRecord::from(&LabelledSummary::new(label, parameter, s)));
    }

    fn chain(&mut self, names: &[&str], chain: &Chain) {
        for (j, s) in summarize_chain(chain).into_iter().enumerate() {
            self.summary("mcmc", names[j], s);
        }
        self.bundle.extra.insert("acceptance_rate".into(), chain.acceptance_rate);
        self.table(&Table::from_chain("chain", names, chain));
    }

    fn reproduction(&mut self, r: &Reproduction) {
        for t in &r.tables {
            self.table(t);
        }
        self.bundle.summaries.extend(r.summaries.iter().map(SummaryRecord::from));
    }

    fn extra(&mut self, key: &str, v: f64) {
        self.bundle.extra.insert(key.to_string(), v);
    }
}

/// Writes all files to `out`, each first under a temporary name, then
/// `results.json` last.
pub fn write_output(out: &Path, output: &Output) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    let json = output.bundle.to_json()?;
    let mut all: Vec<(&str, &str)> = output.files.iter().map(|(n, c)| (n.as_str(), c.as_str())).collect();
    all.push(("results.json", &json));
    let mut staged = Vec::new();
    for (name, contents) in &all {
        let tmp = out.join(format!(".{name}.tmp"));
        if let Err(e) = std::fs::write(&tmp, contents) {
            for t in &staged {
                let _ = std::fs::remove_file(t);
            }
            return Err(e.into());
        }
        staged.push(tmp);
    }
    for (tmp, (name, _)) in staged.iter().zip(&all) {
        std::fs::rename(tmp, out.join(name))?;
    }
    Ok(())
}

/// Where relative `data` paths are resolved.
#[derive(Debug, Clone)]
pub struct Context {
    pub data_dir: PathBuf,
}

impl Default for Context {
    fn default() -> Self {
        Self { data_dir: PathBuf::from(".") }
    }
}

fn config_err(e: scorebayes_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("'{name}' must be positive, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<usize, CliError> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::Config(format!("'{name}' must be at least {min}, got {v}")))
    }
}

fn mh_options(cfg: &ExperimentConfig) -> Result<MhOptions, CliError> {
    let d = MhOptions::default();
    let opts = MhOptions {
        iterations: cfg.mcmc_iterations.unwrap_or(d.iterations),
        burn_in: cfg.mcmc_burn_in.unwrap_or(d.burn_in),
        thin: cfg.mcmc_thin.unwrap_or(d.thin),
        ..d
    };
    opts.validate().map_err(config_err)?;
    Ok(opts)
}

fn mc_settings(cfg: &ExperimentConfig, seed: u64) -> Result<McSettings, CliError> {
    Ok(McSettings {
        replicates: at_least("mc_replicates", cfg.mc_replicates.unwrap_or(100), 10)?,
        n: at_least("mc_n", cfg.mc_n.unwrap_or(300), 10)?,
        seed: derive_seed(seed, 2),
    })
}

fn load(ctx: &Context, path: &str) -> Result<crate::dataset::CsvData, CliError> {
    read_dataset(&ctx.data_dir.join(path))
}

fn scalar_column(d: crate::dataset::CsvData, preferred: &str) -> Result<Vec<f64>, CliError> {
    if let Some(j) = d.columns.iter().position(|c| c == preferred) {
        return Ok(d.dataset.column(j));
    }
    match (d.columns.len(), d.y) {
        (1, None) => Ok(d.dataset.column(0)),
        (0, Some(y)) => Ok(y),
        _ => Err(CliError::Data(format!("expected a single column or one named '{preferred}'"))),
    }
}

fn scalar_table(name: &str, column: &str, xs: &[f64]) -> Table {
    let mut t = Table::new(name, &[column]);
    for x in xs {
        t.push(vec![*x]);
    }
    t
}

pub fn run(command: Command, cfg: &ExperimentConfig, seed: u64, ctx: &Context) -> Result<Output, CliError> {
    let mut out = Output::new(command, cfg, seed);
    match cfg.example {
        Example::Vmf => vmf(command, cfg, seed, ctx, &mut out)?,
        Example::EqCorr => eqcorr(command, cfg, seed, ctx, &mut out)?,
        Example::Regression => regression(command, cfg, seed, ctx, &mut out)?,
        Example::Custom => custom(command, cfg, seed, ctx, &mut out)?,
    }
    // surface non-finite values as a numerical failure before anything is written
    out.bundle.to_json()?;
    Ok(out)
}

fn vmf(command: Command, cfg: &ExperimentConfig, seed: u64, ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let prior = VmfPrior::parse(cfg.prior.as_deref().unwrap_or("inverse_kappa")).map_err(config_err)?;
    let theta0 = cfg.theta0.unwrap_or(0.0);
    let log_score = match cfg.score.as_deref().unwrap_or("hyvarinen") {
        "hyvarinen" => false,
        "log" => true,
        s => return Err(CliError::Config(format!("von Mises score must be 'hyvarinen' or 'log', got '{s}'"))),
    };
    if command == Command::Reproduce {
        let r = vmf_reproduce(seed).map_err(numerical("von Mises reproduction"))?;
        out.reproduction(&r);
        return Ok(());
    }
    if command == Command::PriorEval {
        let hi = cfg.kappa.map_or(10.0, |k| (3.0 * k).max(10.0));
        let mut t = Table::new("prior", &["kappa", "reference", "inverse_kappa"]);
        for k in linspace(0.01, hi, 1000) {
            t.push(vec![k, vmf_reference_prior(k).map_err(numerical("reference prior evaluation"))?, 1.0 / k]);
        }
        out.table(&t);
        return Ok(());
    }

    let angles = match &cfg.data {
        Some(p) => scalar_column(load(ctx, p)?, "angle")?,
        None => {
            let n = at_least("n", cfg.n.unwrap_or(50), 2)?;
            let kappa = positive("kappa", cfg.kappa.unwrap_or(3.0))?;
            let a = sample_vonmises(derive_seed(seed, 0), n, theta0, kappa).map_err(numerical("von Mises sampling"))?;
            out.table(&scalar_table("data", "angle", &a));
            a
        }
    };
    let n = at_least("number of observations", angles.len(), 2)?;
    let data = Dataset::from_scalars(&angles);
    out.extra("n", n as f64);

    match command {
        Command::Estimate => {
            let est = if log_score {
                let model = VonMisesKappaLog { theta0 };
                let start = vmf_fit(&data, theta0).map(|e| e.theta[0]).unwrap_or(1.0);
                let fit = minimize_total_score(&model, &data, &[start]).map_err(numerical("score minimization"))?;
                godambe_at(&model, &data, &fit.theta).map_err(numerical("Godambe estimation"))?
            } else {
                vmf_fit(&data, theta0).map_err(numerical("Hyvarinen estimation of kappa"))?
            };
            out.estimate(&["kappa"], &est, n)?;
            out.extra("kappa_tilde", est.theta[0]);
            out.extra("sandwich_variance", vmf_sandwich_variance(est.theta[0]).map_err(numerical("sandwich variance"))?);
            if let Ok(k) = vmf_kappa_closed_form(&angles) {
                out.extra("kappa_tilde_unknown_direction", k);
            }
        }
        Command::Sample => {
            let opts = mh_options(cfg)?;
            let (target, names): (CalibratedTarget, Vec<(&str, CalibratedTarget)>) = if log_score {
                let est = vmf_fit(&data, theta0).map_err(numerical("Hyvarinen estimation of kappa"))?;
                let t = vmf_full_likelihood_target(&data, theta0, prior, est.theta[0]).map_err(numerical("likelihood posterior"))?;
                (t.clone(), vec![("full_likelihood", t)])
            } else {
                let (cal, uncal, est) = vmf_targets(&data, theta0, prior).map_err(numerical("calibrated posterior"))?;
                out.estimate(&["kappa"], &est, n)?;
                (cal.clone(), vec![("calibrated", cal), ("uncalibrated", uncal)])
            };
            let grid = vmf_kappa_grid(target.theta_tilde()[0], n, 1201).map_err(numerical("posterior grid"))?;
            let grids = names
                .iter()
                .map(|(l, t)| Ok((*l, grid_posterior_1d(t, &grid)?)))
                .collect::<scorebayes_core::Result<Vec<_>>>()
                .map_err(numerical("grid posterior"))?;
            for (l, g) in &grids {
                out.summary(&format!("{l}_grid"), "kappa", summarize_grid(g));
            }
            let cols: Vec<(&str, &_)> = grids.iter().map(|(l, g)| (*l, g)).collect();
            out.table(&Table::from_grids("posterior_grid", "kappa", &cols).map_err(numerical("posterior grid"))?);
            let chain = mh_sample(&target, opts, derive_seed(seed, 1)).map_err(numerical("Metropolis-Hastings sampling"))?;
            out.chain(&["kappa"], &chain);
        }
        Command::PriorEval | Command::Reproduce => unreachable!(),
    }
    Ok(())
}

fn eqcorr_psi_nodes() -> Vec<f64> {
    linspace(-8.0, 8.0, 41)
}

fn eqcorr(command: Command, cfg: &ExperimentConfig, seed: u64, ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let prior = EqCorrPrior::parse(cfg.prior.as_deref().unwrap_or("reference")).map_err(config_err)?;
    if let Some(s) = cfg.score.as_deref() {
        if s != "pairwise" {
            return Err(CliError::Config(format!("equi-correlated score must be 'pairwise', got '{s}'")));
        }
    }
    let mc = mc_settings(cfg, seed)?;
    if command == Command::Reproduce {
        let r = eqcorr_reproduce(seed).map_err(numerical("equi-correlated reproduction"))?;
        out.reproduction(&r);
        return Ok(());
    }
    let data = match &cfg.data {
        Some(p) => {
            let d = load(ctx, p)?;
            if d.y.is_some() {
                return Err(CliError::Data("equi-correlated data take no 'y' column".into()));
            }
            if let Some(q) = cfg.q {
                if q != d.dataset.m() {
                    return Err(CliError::Config(format!("q = {q} but the data have {} columns", d.dataset.m())));
                }
            }
            d.dataset
        }
        None if command == Command::PriorEval => Dataset::empty(cfg.q.unwrap_or(10)),
        None => {
            let n = at_least("n", cfg.n.unwrap_or(10), 2)?;
            let q = at_least("q", cfg.q.unwrap_or(10), 2)?;
            let sigma2 = positive("sigma2", cfg.sigma2.unwrap_or(1.0))?;
            let rho = cfg.rho.unwrap_or(0.5);
            if !(rho > rho_lower_bound(q) && rho < 1.0) {
                return Err(CliError::Config(format!("rho = {rho} outside ({}, 1)", rho_lower_bound(q))));
            }
            let d = sample_eqcorr(derive_seed(seed, 0), n, q, cfg.mu.unwrap_or(0.0), sigma2, rho).map_err(numerical("equi-correlated sampling"))?;
            let header: Vec<String> = (0..q).map(|j| format!("x{j}")).collect();
            let href: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut t = Table::new("data", &href);
            for r in d.rows() {
                t.push(r.to_vec());
            }
            out.table(&t);
            d
        }
    };
    let q = at_least("q", data.m(), 2)?;
    out.extra("q", q as f64);
    let names = ["mu", "sigma2", "rho"];
    match command {
        Command::PriorEval => {
            let table = eqcorr_reference_table(q, mc, &eqcorr_psi_nodes()).map_err(numerical("reference prior tabulation"))?;
            out.file("reference_prior", table.nodes().len(), table.to_csv());
        }
        Command::Estimate => {
            at_least("number of observations", data.n(), 2)?;
            let est = eqcorr_fit(&data, q, mc).map_err(numerical("pairwise likelihood fit"))?;
            out.estimate(&names, &est, data.n())?;
        }
        Command::Sample => {
            at_least("number of observations", data.n(), 2)?;
            let opts = mh_options(cfg)?;
            let table = match prior {
                EqCorrPrior::Reference => {
                    let t = eqcorr_reference_table(q, mc, &eqcorr_psi_nodes()).map_err(numerical("reference prior tabulation"))?;
                    out.file("reference_prior", t.nodes().len(), t.to_csv());
                    Some(t)
                }
                _ => None,
            };
            let spec = eqcorr_prior(prior, q, table.as_ref()).map_err(numerical("prior construction"))?;
            let est = eqcorr_fit(&data, q, mc).map_err(numerical("pairwise likelihood fit"))?;
            out.estimate(&names, &est, data.n())?;
            let chain = eqcorr_chain(&data, q, spec, &est, opts, derive_seed(seed, 1)).map_err(numerical("Metropolis-Hastings sampling"))?;
            out.chain(&names, &chain);
        }
        Command::Reproduce => unreachable!(),
    }
    Ok(())
}

fn regression_setup(cfg: &ExperimentConfig) -> Result<RegressionSetup, CliError> {
    let d = RegressionSetup::default();
    let beta = match (&cfg.beta, cfg.p) {
        (Some(b), Some(p)) if b.len() != p => {
            return Err(CliError::Config(format!("beta has {} entries but p = {p}", b.len())));
        }
        (Some(b), _) => b.clone(),
        (None, Some(p)) if p != d.p => return Err(CliError::Config(format!("p = {p} needs an explicit beta"))),
        (None, _) => d.beta.clone(),
    };
    let contamination = cfg.contamination.unwrap_or(d.contamination);
    if !(0.0..0.5).contains(&contamination) {
        return Err(CliError::Config(format!("contamination must be in [0, 0.5), got {contamination}")));
    }
    Ok(RegressionSetup {
        n: cfg.n.unwrap_or(d.n),
        p: at_least("p", beta.len(), 1)?,
        beta,
        sigma2: positive("sigma2", cfg.sigma2.unwrap_or(d.sigma2))?,
        contamination,
        shift: cfg.shift.unwrap_or(d.shift),
    })
}

/// A user CSV: response `y`, covariates in the remaining columns; an
/// intercept column is prepended.
fn regression_data_from_csv(d: crate::dataset::CsvData) -> Result<RegressionData, CliError> {
    let y = d.y.ok_or_else(|| CliError::Data("regression data need a 'y' column".into()))?;
    let rows: Vec<Vec<f64>> = (0..y.len())
        .map(|i| std::iter::once(1.0).chain(d.dataset.row(i).iter().copied()).collect())
        .collect();
    let design = LinRegModel::new(rows).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(RegressionData { design: Arc::new(design), y, outliers: Vec::new() })
}

fn regression(command: Command, cfg: &ExperimentConfig, seed: u64, ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let prior = RegressionPrior::parse(cfg.prior.as_deref().unwrap_or("reference")).map_err(config_err)?;
    let gamma = match cfg.score.as_deref() {
        None | Some("tsallis") => cfg.gamma.unwrap_or(1.25),
        Some("log") => {
            if cfg.gamma.is_some_and(|g| g != 1.0) {
                return Err(CliError::Config("the log score has gamma = 1".into()));
            }
            1.0
        }
        Some(s) => return Err(CliError::Config(format!("regression score must be 'tsallis' or 'log', got '{s}'"))),
    };
    let user = match &cfg.data {
        Some(p) => Some(regression_data_from_csv(load(ctx, p)?)?),
        None => None,
    };
    if command == Command::Reproduce {
        let r = regression_reproduce(seed, user, mh_options(cfg)?).map_err(numerical("regression reproduction"))?;
        out.reproduction(&r);
        return Ok(());
    }
    let setup = regression_setup(cfg)?;
    let p = user.as_ref().map_or(setup.p, |d| d.p());
    regression_model(p, gamma).map_err(config_err)?;
    if command == Command::PriorEval {
        let spec = regression_prior(RegressionPrior::Reference, gamma, p).map_err(numerical("reference prior"))?;
        let flat = regression_prior(RegressionPrior::Flat, gamma, p).map_err(numerical("flat prior"))?;
        let hi = 5.0 * cfg.sigma2.unwrap_or(1.0);
        let mut t = Table::new("prior", &["sigma2", "log_reference", "log_flat"]);
        for s2 in linspace(hi / 100.0, hi, 200) {
            let mut theta = vec![0.0; p];
            theta.push(s2);
            let ev = |s: &PriorSpec| s.log_density(&theta).map_err(numerical("prior evaluation"));
            t.push(vec![s2, ev(&spec)?, ev(&flat)?]);
        }
        out.table(&t);
        out.extra("gamma", gamma);
        return Ok(());
    }
    let data = match user {
        Some(d) => d,
        None => {
            let d = RegressionData::simulate(derive_seed(seed, 0), &setup).map_err(numerical("regression simulation"))?;
            let mut header: Vec<String> = (1..p).map(|j| format!("x{j}")).collect();
            header.push("y".into());
            let href: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut t = Table::new("data", &href);
            for (row, y) in d.design.rows().iter().zip(&d.y) {
                let mut r = row[1..].to_vec();
                r.push(*y);
                t.push(r);
            }
            out.table(&t);
            d
        }
    };
    let n = data.y.len();
    let names: Vec<String> = (0..p).map(|j| format!("beta{j}")).chain(["sigma2".to_string()]).collect();
    let nref: Vec<&str> = names.iter().map(String::as_str).collect();
    out.extra("gamma", gamma);
    out.extra("n", n as f64);
    match command {
        Command::Estimate => {
            let est = regression_fit(&data, gamma).map_err(numerical("Tsallis score minimization"))?;
            out.estimate(&nref, &est, n)?;
            let (beta, s2) = ols(&data.design, &data.y).map_err(numerical("least squares"))?;
            for (j, b) in beta.iter().enumerate() {
                out.extra(&format!("ols_beta{j}"), *b);
            }
            out.extra("ols_sigma2", s2);
            out.extra("max_abs_diff_ols_beta", max_abs_error(&est.theta[..p], &beta));
        }
        Command::Sample => {
            let opts = mh_options(cfg)?;
            let (target, est) = regression_target(&data, gamma, prior).map_err(numerical("calibrated posterior"))?;
            out.estimate(&nref, &est, n)?;
            let chain = mh_sample(&target, opts, derive_seed(seed, 1)).map_err(numerical("Metropolis-Hastings sampling"))?;
            out.chain(&nref, &chain);
        }
        Command::PriorEval | Command::Reproduce => unreachable!(),
    }
    Ok(())
}

fn custom_rule(cfg: &ExperimentConfig) -> Result<ScoreRule, CliError> {
    match cfg.score.as_deref().unwrap_or("log") {
        "log" => Ok(ScoreRule::Log),
        "hyvarinen" => Ok(ScoreRule::Hyvarinen),
        "tsallis" => {
            let g = cfg.gamma.ok_or_else(|| CliError::Config("the Tsallis score needs 'gamma'".into()))?;
            Ok(ScoreRule::Tsallis(TsallisConfig::new(g).map_err(config_err)?))
        }
        s => Err(CliError::Config(format!("unknown score '{s}'"))),
    }
}

/// Batch-means Monte Carlo standard error of the mean of `xs`.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let b = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(b).take(batches).map(|c| c.iter().sum::<f64>() / b as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

fn custom(command: Command, cfg: &ExperimentConfig, seed: u64, ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    if matches!(command, Command::PriorEval | Command::Reproduce) {
        return Err(CliError::Config(format!("'{}' is not available for the custom example", command.as_str())));
    }
    let rule = custom_rule(cfg)?;
    let (params, names): (NormalParams, &[&str]) = match cfg.model.as_deref().unwrap_or("normal_mean") {
        "normal_mean" => (NormalParams::Mean { sigma: positive("sigma", cfg.sigma.unwrap_or(1.0))? }, &["mu"]),
        "normal" => (NormalParams::MeanSd, &["mu", "sigma"]),
        m => return Err(CliError::Config(format!("unknown model '{m}'; expected 'normal_mean' or 'normal'"))),
    };
    if let Some(pr) = cfg.prior.as_deref() {
        if pr != "flat" {
            return Err(CliError::Config(format!("the custom example supports only the flat prior, got '{pr}'")));
        }
    }
    let xs = match &cfg.data {
        Some(p) => scalar_column(load(ctx, p)?, "x")?,
        None => {
            let n = at_least("n", cfg.n.unwrap_or(50), 2)?;
            let sigma = positive("sigma", cfg.sigma.unwrap_or(1.0))?;
            let x = sample_normal(&mut rng_from_seed(derive_seed(seed, 0)), n, cfg.mu.unwrap_or(0.0), sigma);
            out.table(&scalar_table("data", "x", &x));
            x
        }
    };
    let n = at_least("number of observations", xs.len(), 2)?;
    let data = Dataset::from_scalars(&xs);
    let model = NormalModel::new(rule, params);
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64).sqrt();
    let start = if names.len() == 1 { vec![mean] } else { vec![mean, sd.max(1e-6)] };
    let fit = minimize_total_score(&model, &data, &start).map_err(numerical("score minimization"))?;
    let est = godambe_at(&model, &data, &fit.theta).map_err(numerical("Godambe estimation"))?;
    out.estimate(names, &est, n)?;
    out.extra("n", n as f64);
    if command == Command::Sample {
        let opts = mh_options(cfg)?;
        let m: Arc<dyn ScoreModel> = Arc::new(model);
        let d = Arc::new(data);
        let target = if rule == ScoreRule::Log {
            CalibratedTarget::uncalibrated(m, d, PriorSpec::Flat, est.theta.clone())
        } else {
            CalibratedTarget::calibrated(m, d, PriorSpec::Flat, &est)
        }
        .map_err(numerical("posterior construction"))?;
        let chain = mh_sample(&target, opts, derive_seed(seed, 1)).map_err(numerical("Metropolis-Hastings sampling"))?;
        out.chain(names, &chain);
        for (j, name) in names.iter().enumerate() {
            out.extra(&format!("mcse_mean_{name}"), batch_means_se(&chain.column(j), 50));
        }
        if let (ScoreRule::Log, NormalParams::Mean { sigma }) = (rule, params) {
            // flat prior, known sigma: N(xbar, sigma^2 / n)
            out.extra("conjugate_mean", mean);
            out.extra("conjugate_sd", sigma / (n as f64).sqrt());
        }
    }
    Ok(())
}
