use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use scorebayes_core::estimation::minimize_total_score;
use scorebayes_core::experiments::eqcorr::rho_uniform_prior;
use scorebayes_core::models::{
    ols, BaseDensity, LinRegModel, LocationScaleMode, LocationScaleModel, RegressionScoreModel, Simulate,
    VonMisesKappaHyvarinen,
};
use scorebayes_core::numerics::{integrate, linspace};
use scorebayes_core::priors::{
    chi_square_prior_scalar, exact_input, godambe_reference_prior, regression_reference_prior, transform_prior,
    tsallis_regression_variances, vmf_reference_prior, ChiSqPriorInputs, GProvider, McSettings, PriorSpec, ScalarInput,
};
use scorebayes_core::rng::{derive_seed, rng_from_seed};
use scorebayes_core::scoring::{CoordTransform, ParamTransform, ScoreRule, TsallisConfig};

fn tsallis(gamma: f64) -> ScoreRule {
    ScoreRule::Tsallis(TsallisConfig::new(gamma).unwrap())
}

fn mc(model: LocationScaleModel, seed: u64) -> GProvider {
    GProvider::MonteCarlo { model: Arc::new(model), settings: McSettings { replicates: 200, n: 200, seed } }
}

#[test]
fn tsallis_location_prior_is_flat() {
    let model = LocationScaleModel::new(BaseDensity::standard_normal(), LocationScaleMode::Location { scale: 1.0 }, tsallis(1.5)).unwrap();
    let (a, sa) = godambe_reference_prior(&[0.0], &mc(model.clone(), 11)).unwrap();
    let (b, sb) = godambe_reference_prior(&[3.0], &mc(model.clone(), 12)).unwrap();
    let tol = 3.0 * (sa * sa + sb * sb).sqrt();
    assert!((a - b).abs() <= tol, "{a} vs {b}, tol {tol}");
    // with common random numbers the simulated datasets are translates
    let (c, _) = godambe_reference_prior(&[3.0], &mc(model, 11)).unwrap();
    assert!((a - c).abs() < 1e-6 * a, "{a} vs {c}");
}

#[test]
fn tsallis_scale_prior_is_inverse_scale() {
    let model = LocationScaleModel::new(BaseDensity::standard_normal(), LocationScaleMode::Scale { location: 0.0 }, tsallis(1.5)).unwrap();
    let vals: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&s| {
            let (v, se) = godambe_reference_prior(&[s], &mc(model.clone(), 5)).unwrap();
            (v.ln() + s.ln(), se / v)
        })
        .collect();
    let max_se = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    for (v, _) in &vals {
        assert!((v - vals[0].0).abs() <= 3.0 * max_se, "{vals:?}");
        assert!((v - vals[0].0).abs() < 1e-5, "{vals:?}");
    }
}

#[test]
fn log_score_normal_mean_prior_is_constant() {
    let model = LocationScaleModel::new(BaseDensity::standard_normal(), LocationScaleMode::Location { scale: 2.0 }, ScoreRule::Log).unwrap();
    for (i, mu) in [-5.0, 0.0, 1.5, 40.0].into_iter().enumerate() {
        let (v, se) = godambe_reference_prior(&[mu], &mc(model.clone(), i as u64)).unwrap();
        // sqrt of the Fisher information 1/4
        assert!((v - 0.5).abs() <= 4.0 * se, "mu={mu}: {v} +- {se}");
    }
}

#[test]
fn vmf_monte_carlo_prior_matches_closed_form() {
    let provider = GProvider::MonteCarlo {
        model: Arc::new(VonMisesKappaHyvarinen { theta0: 0.3 }),
        settings: McSettings { replicates: 400, n: 500, seed: 2024 },
    };
    let (v, se) = godambe_reference_prior(&[2.0], &provider).unwrap();
    let exact = vmf_reference_prior(2.0).unwrap();
    assert!((v - exact).abs() <= 3.0 * se, "{v} +- {se} vs {exact}");
}

#[test]
fn log_kappa_prior_transforms_as_a_density() {
    let kappa_prior = PriorSpec::closed_form("vmf", |t: &[f64]| Ok(vmf_reference_prior(t[0])?.ln()));
    let on_psi = transform_prior(kappa_prior, ParamTransform::new(vec![CoordTransform::Exp { rate: 1.0 }]));
    for psi in [-3.0f64, -0.5, 0.0, 1.2, 3.0] {
        let k = psi.exp();
        // G(psi) = G(kappa) (d kappa / d psi)^2
        let direct = (vmf_reference_prior(k).unwrap().powi(2) * k * k).sqrt().ln();
        let got = on_psi.log_density(&[psi]).unwrap();
        assert!((got - direct).abs() < 1e-6 * direct.abs().max(1.0), "psi={psi}");
    }
}

#[test]
fn uniform_correlation_gives_logistic_psi() {
    let prior = rho_uniform_prior(2);
    let logistic = |psi: f64| -psi - 2.0 * (-psi).exp().ln_1p();
    let offset = prior.log_density(&[0.0]).unwrap() - logistic(0.0);
    for psi in linspace(-12.0, 12.0, 25) {
        let d = prior.log_density(&[psi]).unwrap() - logistic(psi);
        assert!((d - offset).abs() < 1e-10, "psi={psi}");
    }
    let mass = integrate(|psi| (prior.log_density(&[psi]).unwrap() - offset).exp(), -30.0, 30.0, 1e-12).unwrap();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn regression_prior_finite_over_wide_range() {
    let prior = regression_reference_prior(1.25, 3).unwrap();
    let mut prev = f64::INFINITY;
    for s2 in (0..=120).map(|k| 10f64.powf(-6.0 + 0.1 * k as f64)) {
        let v = prior.log_density(&[0.0, 0.0, 0.0, s2]).unwrap();
        assert!(v.is_finite());
        assert!(v < prev);
        prev = v;
    }
    assert!(prior.log_density(&[0.0, 0.0, 0.0, 0.0]).is_err());
}

#[test]
fn tsallis_beta_variance_matches_simulation() {
    let (n, p, gamma) = (500, 2, 1.5);
    let beta = [1.0, 0.5];
    let design = Arc::new(LinRegModel::synthetic(77, n, p).unwrap());
    let model = RegressionScoreModel::new(p, tsallis(gamma)).unwrap().with_design(design.clone());
    let gram = design.gram();
    let quad: Vec<f64> = (0..2000u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_from_seed(derive_seed(9, rep));
            let data = model.simulate(&[beta[0], beta[1], 1.0], n, &mut rng).unwrap();
            let y = data.column(p);
            let (b0, s0) = ols(&design, &y).unwrap();
            let fit = minimize_total_score(&model, &data, &[b0[0], b0[1], s0]).unwrap();
            let d = [fit.theta[0] - beta[0], fit.theta[1] - beta[1]];
            let gd = gram.matvec(&d);
            (d[0] * gd[0] + d[1] * gd[1]) / p as f64
        })
        .collect();
    let empirical = quad.iter().sum::<f64>() / quad.len() as f64;
    let (vb, _) = tsallis_regression_variances(gamma, 1.0);
    assert!((empirical / vb - 1.0).abs() < 0.10, "empirical {empirical} vs {vb}");
}

// N(theta, theta^2) under the log score: g = i = 3/theta^2, sigma = theta^2/3,
// B^S = -16/theta^3 (score is minus the log-likelihood), B^l = 16/theta^3.
fn normal_cv_inputs(a_s: ScalarInput, a_l: ScalarInput) -> ChiSqPriorInputs {
    ChiSqPriorInputs {
        g: exact_input(|t| 3.0 / (t * t)),
        i: exact_input(|t| 3.0 / (t * t)),
        sigma: exact_input(|t| t * t / 3.0),
        a_s,
        a_l,
    }
}

/// Best exponent c of `pi = theta^c` for the second-order chi-square
/// functional `int sqrt(g) [A y' + B y^2 + D y]` with `y = d log pi / d theta`,
/// each coefficient evaluated by quadrature on `[lo, hi]`.
fn power_family_optimum(lo: f64, hi: f64) -> f64 {
    let g = |t: f64| 3.0 / (t * t);
    let i = g;
    let sigma = |t: f64| t * t / 3.0;
    let a_s = |t: f64| -16.0 / (t * t * t) / g(t);
    let a_l = |t: f64| 16.0 / (t * t * t) / i(t);
    let w = |t: f64| 1.0 / g(t) + 2.0 / i(t) - 4.0 * sigma(t);
    let h = 1e-4;
    let d = |f: &dyn Fn(f64) -> f64, t: f64| (f(t + h) - f(t - h)) / (2.0 * h);
    let a = |t: f64| -3.0 / g(t) + 4.0 / i(t) - 4.0 * sigma(t);
    let b = |t: f64| -1.0 / g(t) + 4.0 / i(t) - 4.0 * sigma(t);
    let dd = |t: f64| 3.0 * a_s(t) / g(t) + 2.0 * a_l(t) / i(t) + d(&g, t) / g(t) * w(t) + 2.0 * d(&w, t);
    // y = c / theta, y' = -c / theta^2
    let lin = integrate(|t| g(t).sqrt() * (-a(t) / (t * t) + dd(t) / t), lo, hi, 1e-9).unwrap();
    let quad = integrate(|t| g(t).sqrt() * b(t) / (t * t), lo, hi, 1e-9).unwrap();
    -lin / (2.0 * quad)
}

#[test]
fn chi_square_prior_matches_variational_optimum() {
    let c = power_family_optimum(1.0, 4.0);
    assert!((c + 13.0 / 6.0).abs() < 1e-6, "c = {c}");
    let inputs = normal_cv_inputs(exact_input(|t| -16.0 / (3.0 * t)), exact_input(|t| 16.0 / (3.0 * t)));
    let grid = linspace(1.0, 4.0, 301);
    let prior = chi_square_prior_scalar(&grid, &inputs).unwrap();
    let at = |t: f64| prior.log_density(t).unwrap();
    for t in [1.0, 1.7, 3.2, 4.0] {
        let expected = c * (t / 2.5f64).ln();
        assert!((at(t) - at(2.5) - expected).abs() < 1e-3, "theta={t}");
    }
}

/// `a = B / info` with `B` the sample mean of the third derivative of the
/// per-observation score over `draws` simulated points.
fn mc_third_order(sign: f64, draws: usize, stream: u64) -> ScalarInput {
    Arc::new(move |t: f64| {
        let mut rng = rng_from_seed(derive_seed(stream, t.to_bits()));
        let vals: Vec<f64> = (0..draws)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                let x = t + t * z;
                // third derivative of log N(x; t, t^2) in t
                sign * (-2.0 / t.powi(3) + 12.0 * x * x / t.powi(5) - 6.0 * x / t.powi(4))
            })
            .collect();
        let m = vals.iter().sum::<f64>() / draws as f64;
        let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (draws - 1) as f64;
        let info = 3.0 / (t * t);
        Ok((m / info, (var / draws as f64).sqrt() / info))
    })
}

#[test]
fn chi_square_band_from_monte_carlo_inputs() {
    let grid = linspace(1.5, 2.5, 41);
    let inputs = normal_cv_inputs(mc_third_order(-1.0, 10_000, 1), mc_third_order(1.0, 10_000, 2));
    let est = chi_square_prior_scalar(&grid, &inputs).unwrap();
    let exact = chi_square_prior_scalar(
        &grid,
        &normal_cv_inputs(exact_input(|t| -16.0 / (3.0 * t)), exact_input(|t| 16.0 / (3.0 * t))),
    )
    .unwrap();
    let band_width = est.stderr().iter().cloned().fold(0.0, f64::max);
    assert!(band_width > 0.0 && band_width < 0.1, "band {band_width}");
    let anchor = grid.len() / 2;
    for k in 0..grid.len() {
        let err = (est.log_values()[k] - est.log_values()[anchor]) - (exact.log_values()[k] - exact.log_values()[anchor]);
        assert!(err.abs() <= 3.0 * est.stderr()[k] + 1e-9, "node {k}: error {err}, band {}", est.stderr()[k]);
    }
}
