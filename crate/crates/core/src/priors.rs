//! Reference priors built from the Godambe information, the scalar
//! chi-square prior, and baseline priors.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::monte_carlo_information;
use crate::models::Simulate;
use crate::numerics::{bessel_ratio_a1, fd_derivative_1d, interpolate, trapezoid, SquareMatrix};
use crate::rng::derive_seed;
use crate::scoring::{ParamTransform, ScoreModel};

/// A score model that can also simulate data; needed by the Monte Carlo
/// Godambe provider.
pub trait SimulatedScoreModel: ScoreModel + Simulate {}

impl<T: ScoreModel + Simulate> SimulatedScoreModel for T {}

pub type LogDensityFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&[f64]) -> Result<SquareMatrix> + Send + Sync>;

/// Settings of the Monte Carlo Godambe provider.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub replicates: usize,
    pub n: usize,
    pub seed: u64,
}

impl McSettings {
    pub fn new(seed: u64) -> Self {
        Self { replicates: 200, n: 500, seed }
    }
}

/// Source of `G(theta)`.
#[derive(Clone)]
pub enum GProvider {
    Analytic(MatrixFn),
    MonteCarlo { model: Arc<dyn SimulatedScoreModel>, settings: McSettings },
}

impl fmt::Debug for GProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Analytic(_) => f.write_str("GProvider::Analytic"),
            Self::MonteCarlo { model, settings } => {
                write!(f, "GProvider::MonteCarlo({}, {settings:?})", model.name())
            }
        }
    }
}

/// Prior log-densities, up to an additive constant.
#[derive(Clone)]
pub enum PriorSpec {
    Flat,
    /// `theta[coord]^exponent`, e.g. exponent -1 for `1 / kappa`.
    Power { coord: usize, exponent: f64 },
    GodambeReference(GProvider),
    Tabulated(TabulatedPrior),
    ClosedForm { name: String, log_density: LogDensityFn },
    /// Prior on unconstrained `psi` induced by a prior on `theta = f(psi)`.
    Transformed { base: Box<PriorSpec>, transform: ParamTransform },
}

impl fmt::Debug for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Flat => f.write_str("Flat"),
            Self::Power { coord, exponent } => write!(f, "Power(theta[{coord}]^{exponent})"),
            Self::GodambeReference(p) => write!(f, "GodambeReference({p:?})"),
            Self::Tabulated(t) => write!(f, "Tabulated({} nodes)", t.nodes.len()),
            Self::ClosedForm { name, .. } => write!(f, "ClosedForm({name})"),
            Self::Transformed { base, .. } => write!(f, "Transformed({base:?})"),
        }
    }
}

impl PriorSpec {
    pub fn closed_form(name: &str, f: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self::ClosedForm { name: name.to_string(), log_density: Arc::new(f) }
    }

    pub fn log_density(&self, theta: &[f64]) -> Result<f64> {
        match self {
            Self::Flat => Ok(0.0),
            Self::Power { coord, exponent } => {
                let v = *theta.get(*coord).ok_or(Error::DimensionMismatch { expected: coord + 1, got: theta.len() })?;
                if v > 0.0 {
                    Ok(exponent * v.ln())
                } else {
                    Err(Error::OutsideSupport { value: v, lo: 0.0, hi: f64::INFINITY })
                }
            }
            Self::GodambeReference(p) => Ok(godambe_reference_prior(theta, p)?.0.ln()),
            Self::Tabulated(t) => t.log_density(theta[0]),
            Self::ClosedForm { log_density, .. } => log_density(theta),
            Self::Transformed { base, transform } => {
                let jac = transform.jacobian_diag(theta);
                if jac.iter().any(|j| *j == 0.0 || !j.is_finite()) {
                    return Err(Error::SingularJacobian(theta.to_vec()));
                }
                Ok(base.log_density(&transform.to_natural(theta))? + transform.log_abs_det_jacobian(theta))
            }
        }
    }
}

/// Change of variables: the prior on `psi` with `theta = transform(psi)`,
/// `pi(psi) = pi(theta(psi)) |d theta / d psi|`.
pub fn transform_prior(prior: PriorSpec, transform: ParamTransform) -> PriorSpec {
    PriorSpec::Transformed { base: Box::new(prior), transform }
}

/// `sqrt(det G(theta))` and its Monte Carlo standard error (zero for the
/// analytic provider).
pub fn godambe_reference_prior(theta: &[f64], provider: &GProvider) -> Result<(f64, f64)> {
    match provider {
        GProvider::Analytic(g) => {
            let g = g(theta)?;
            crate::numerics::spd_factor(&g.symmetrized())?;
            Ok((g.det().sqrt(), 0.0))
        }
        GProvider::MonteCarlo { model, settings } => {
            let info = monte_carlo_information(model.as_ref(), theta, settings.replicates, settings.n, settings.seed)?;
            crate::numerics::spd_factor(&info.g)?;
            Ok((info.sqrt_det_g, info.stderr))
        }
    }
}

/// Scalar log-prior tabulated on a grid, with linear interpolation and no
/// extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPrior {
    nodes: Vec<f64>,
    log_values: Vec<f64>,
    stderr: Vec<f64>,
}

impl TabulatedPrior {
    /// Normalizes so the trapezoid mass of `exp(log_values)` is one.
    pub fn new(nodes: Vec<f64>, log_values: Vec<f64>, stderr: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("prior grid needs at least 3 strictly increasing nodes".into()));
        }
        if log_values.len() != nodes.len() || stderr.len() != nodes.len() {
            return Err(Error::DimensionMismatch { expected: nodes.len(), got: log_values.len().min(stderr.len()) });
        }
        if log_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite log prior value".into()));
        }
        let max = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let vals: Vec<f64> = log_values.iter().map(|v| (v - max).exp()).collect();
        let log_mass = trapezoid(&nodes, &vals).ln() + max;
        let log_values = log_values.iter().map(|v| v - log_mass).collect();
        Ok(Self { nodes, log_values, stderr })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn log_density(&self, theta: f64) -> Result<f64> {
        interpolate(&self.nodes, &self.log_values, theta)
    }

    /// CSV with header `theta,log_prior,mc_stderr`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,log_prior,mc_stderr\n");
        for ((t, l), e) in self.nodes.iter().zip(&self.log_values).zip(&self.stderr) {
            s.push_str(&format!("{t},{l},{e}\n"));
        }
        s
    }
}

/// Tabulates `log sqrt(det G)` on a scalar grid. Monte Carlo points use the
/// seeds `derive_seed(seed, index)`; the reported standard error is that of
/// the log value.
pub fn tabulate_reference_prior(nodes: &[f64], provider: &GProvider) -> Result<TabulatedPrior> {
    let rows: Vec<(f64, f64)> = nodes
        .par_iter()
        .enumerate()
        .map(|(idx, &t)| {
            let p = match provider {
                GProvider::MonteCarlo { model, settings } => GProvider::MonteCarlo {
                    model: model.clone(),
                    settings: McSettings { seed: derive_seed(settings.seed, idx as u64), ..*settings },
                },
                other => other.clone(),
            };
            let (v, se) = godambe_reference_prior(&[t], &p)?;
            Ok((v.ln(), se / v))
        })
        .collect::<Result<Vec<_>>>()?;
    TabulatedPrior::new(nodes.to_vec(), rows.iter().map(|r| r.0).collect(), rows.iter().map(|r| r.1).collect())
}

/// `A1(k)^2 / (k [2k - 3 A1(k)])`, the Godambe information of the Hyvarinen
/// concentration estimator; the reciprocal of its asymptotic variance.
pub fn vmf_godambe(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let a1 = bessel_ratio_a1(kappa)?;
    Ok(a1 * a1 / (kappa * (2.0 * kappa - 3.0 * a1)))
}

/// Reference prior of the von Mises concentration (unnormalized); tends to
/// `2^-1/2` as `kappa -> 0`.
pub fn vmf_reference_prior(kappa: f64) -> Result<f64> {
    Ok(vmf_godambe(kappa)?.sqrt())
}

/// Asymptotic variances `(v_beta, v_e)` of the Tsallis regression estimators
/// of `beta` (per unit of `(X^T X)^-1`) and of `sigma^2` (per unit of `1/n`).
pub fn tsallis_regression_variances(gamma: f64, sigma2: f64) -> (f64, f64) {
    let e = gamma - 1.0;
    let e2 = e * e;
    let base = 1.0 + e2 / (2.0 * gamma - 1.0);
    let vb = sigma2 * base.powf(1.5);
    let ve = 4.0 * sigma2 * sigma2 / ((2.0 + e2) * (2.0 + e2))
        * (2.0 * (1.0 + 2.0 * e2) * base.powf(2.5) - e2 * gamma * gamma);
    (vb, ve)
}

/// Reference prior for `theta = (beta_1..beta_p, sigma^2)` under the Tsallis
/// score: flat in `beta`, `(v_beta^p v_e)^-1/2` in `sigma^2`.
pub fn regression_reference_prior(gamma: f64, p: usize) -> Result<PriorSpec> {
    if !(gamma >= 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must be at least 1, got {gamma}")));
    }
    Ok(PriorSpec::closed_form("tsallis regression reference", move |theta: &[f64]| {
        let s2 = theta[p];
        if !(s2 > 0.0) {
            return Err(Error::OutsideSupport { value: s2, lo: 0.0, hi: f64::INFINITY });
        }
        let (vb, ve) = tsallis_regression_variances(gamma, s2);
        Ok(-0.5 * (p as f64 * vb.ln() + ve.ln()))
    }))
}

/// A scalar input of the chi-square prior: value and standard error at theta.
pub type ScalarInput = Arc<dyn Fn(f64) -> Result<(f64, f64)> + Send + Sync>;

pub fn exact_input(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarInput {
    Arc::new(move |t| Ok((f(t), 0.0)))
}

/// Inputs of the scalar chi-square prior, as functions of theta:
/// Godambe information `g`, Fisher information `i`, `sigma = n Cov(theta~, theta^)`,
/// and the third-order terms `a^S = B^S c^3 / g`, `a^l = B^l / i`.
#[derive(Clone)]
pub struct ChiSqPriorInputs {
    pub g: ScalarInput,
    pub i: ScalarInput,
    pub sigma: ScalarInput,
    pub a_s: ScalarInput,
    pub a_l: ScalarInput,
}

struct InputValues {
    g: f64,
    i: f64,
    sigma: f64,
    a_s: f64,
    a_l: f64,
    dg: f64,
    /// derivative of `5/g - 4 sigma`
    dw: f64,
}

fn chi_sq_slope(v: &InputValues, theta: f64) -> Result<f64> {
    let denom = 1.0 / v.g - 4.0 / v.i + 4.0 * v.sigma;
    if denom.abs() < 1e-12 {
        return Err(Error::SingularGamma { theta });
    }
    let w = 5.0 / v.g - 4.0 * v.sigma;
    Ok((6.0 * v.a_s / v.g + 4.0 * v.a_l / v.i + v.dg / v.g * w + 2.0 * v.dw) / (4.0 * denom))
}

fn value(f: &ScalarInput, t: f64) -> Result<f64> {
    Ok(f(t)?.0)
}

/// Scalar chi-square prior on `grid`: `d log pi / d theta` from the inputs,
/// integrated by the trapezoid rule outward from the central node.
pub fn chi_square_prior_scalar(grid: &[f64], inputs: &ChiSqPriorInputs) -> Result<TabulatedPrior> {
    if grid.len() < 3 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("prior grid needs at least 3 strictly increasing nodes".into()));
    }
    let mut slope = Vec::with_capacity(grid.len());
    let mut band_slope = Vec::with_capacity(grid.len());
    for &t in grid {
        let (g, sg) = (inputs.g)(t)?;
        let (i, si) = (inputs.i)(t)?;
        let (sigma, ss) = (inputs.sigma)(t)?;
        let (a_s, sas) = (inputs.a_s)(t)?;
        let (a_l, sal) = (inputs.a_l)(t)?;
        let dg = fd_derivative_1d(|x| value(&inputs.g, x), t, 1)?;
        let dw = fd_derivative_1d(|x| Ok(5.0 / value(&inputs.g, x)? - 4.0 * value(&inputs.sigma, x)?), t, 1)?;
        let base = InputValues { g, i, sigma, a_s, a_l, dg, dw };
        let y = chi_sq_slope(&base, t)?;
        let mut var = 0.0;
        for (k, se) in [sg, si, ss, sas, sal].into_iter().enumerate() {
            if se > 0.0 {
                let mut p = InputValues { ..base };
                match k {
                    0 => p.g += se,
                    1 => p.i += se,
                    2 => p.sigma += se,
                    3 => p.a_s += se,
                    _ => p.a_l += se,
                }
                let dy = chi_sq_slope(&p, t)? - y;
                var += dy * dy;
            }
        }
        slope.push(y);
        band_slope.push(var.sqrt());
    }
    let anchor = grid.len() / 2;
    let integrate_from_anchor = |ys: &[f64], absolute: bool| -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        for k in (anchor + 1)..grid.len() {
            out[k] = out[k - 1] + 0.5 * (grid[k] - grid[k - 1]) * (ys[k] + ys[k - 1]);
        }
        for k in (0..anchor).rev() {
            let step = 0.5 * (grid[k + 1] - grid[k]) * (ys[k] + ys[k + 1]);
            out[k] = if absolute { out[k + 1] + step } else { out[k + 1] - step };
        }
        out
    };
    let log_prior = integrate_from_anchor(&slope, false);
    let band = integrate_from_anchor(&band_slope, true);
    TabulatedPrior::new(grid.to_vec(), log_prior, band)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linspace;
    use crate::scoring::CoordTransform;

    #[test]
    fn vmf_prior_limit_and_identity() {
        assert!((vmf_reference_prior(1e-4).unwrap() - 0.5f64.sqrt()).abs() < 1e-3);
        let a1 = bessel_ratio_a1(3.0).unwrap();
        let v = 3.0 * (6.0 - 3.0 * a1) / (a1 * a1);
        assert!((vmf_reference_prior(3.0).unwrap() - (1.0 / v).sqrt()).abs() < 1e-12);
        assert!(vmf_reference_prior(0.0).is_err());
    }

    #[test]
    fn vmf_prior_bounded_while_inverse_kappa_diverges() {
        let mut prev_ratio = f64::INFINITY;
        for k in [1e-1, 1e-2, 1e-3, 1e-5, 1e-8] {
            let p = vmf_reference_prior(k).unwrap();
            assert!(p <= 0.75);
            let ratio = p * k;
            assert!(ratio < prev_ratio);
            prev_ratio = ratio;
        }
        assert!(prev_ratio < 1e-7);
    }

    #[test]
    fn tsallis_variances_at_one() {
        for s2 in [0.3, 1.0, 4.0] {
            let (vb, ve) = tsallis_regression_variances(1.0, s2);
            assert_eq!(vb, s2);
            assert_eq!(ve, 2.0 * s2 * s2);
        }
        let (vb, _) = tsallis_regression_variances(1.25, 1.0);
        assert!((vb - (1.0 + 0.0625 / 1.5f64).powf(1.5)).abs() < 1e-15);
        let eff = 1.0 / vb;
        assert!((0.93..=0.95).contains(&eff));
        // continuity from above
        let (vb2, ve2) = tsallis_regression_variances(1.0 + 1e-9, 2.0);
        assert!((vb2 - 2.0).abs() < 1e-12 && (ve2 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn regression_prior_at_log_limit() {
        let p = 3;
        let prior = regression_reference_prior(1.0, p).unwrap();
        let at = |s2: f64| prior.log_density(&[0.0, 1.0, -2.0, s2]).unwrap();
        for s2 in [0.01f64, 0.5, 7.0] {
            let expected = -((p + 2) as f64) * 0.5 * s2.ln();
            assert!((at(s2) - at(1.0) - expected).abs() < 1e-12);
        }
        let t = regression_reference_prior(1.25, p).unwrap();
        let a = t.log_density(&[5.0, -1.0, 0.0, 2.0]).unwrap();
        let b = t.log_density(&[0.0, 3.0, 9.0, 2.0]).unwrap();
        assert_eq!(a, b);
        for s2 in [1e-6, 1e-3, 1.0, 1e3, 1e6] {
            assert!(t.log_density(&[0.0, 0.0, 0.0, s2]).unwrap().is_finite());
        }
    }

    #[test]
    fn transform_identity_and_logistic() {
        let flat = PriorSpec::Flat;
        let id = transform_prior(flat.clone(), ParamTransform::identity(1));
        assert_eq!(id.log_density(&[0.3]).unwrap(), 0.0);
        let logit = transform_prior(flat, ParamTransform::new(vec![CoordTransform::Logistic { lo: 0.0, hi: 1.0 }]));
        for psi in [-3.0f64, 0.0, 1.5] {
            let logistic = -psi - 2.0 * (-psi).exp().ln_1p();
            assert!((logit.log_density(&[psi]).unwrap() - logistic).abs() < 1e-12);
        }
    }

    #[test]
    fn power_prior_domain() {
        let p = PriorSpec::Power { coord: 0, exponent: -1.0 };
        assert!((p.log_density(&[2.0]).unwrap() + 2f64.ln()).abs() < 1e-15);
        assert!(p.log_density(&[0.0]).is_err());
    }

    #[test]
    fn tabulated_prior_is_normalized_and_bounded() {
        let nodes = linspace(0.0, 2.0, 21);
        let t = TabulatedPrior::new(nodes.clone(), nodes.iter().map(|x| -x).collect(), vec![0.0; 21]).unwrap();
        let mass = trapezoid(&nodes, &t.log_values().iter().map(|v| v.exp()).collect::<Vec<_>>());
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(t.log_density(2.5).is_err());
        assert!(t.to_csv().starts_with("theta,log_prior,mc_stderr\n"));
    }

    #[test]
    fn chi_square_constant_inputs() {
        let inputs = ChiSqPriorInputs {
            g: exact_input(|_| 1.0),
            i: exact_input(|_| 1.0),
            sigma: exact_input(|_| 1.0),
            a_s: exact_input(|_| 0.0),
            a_l: exact_input(|_| 0.0),
        };
        let grid = linspace(-3.0, 3.0, 31);
        let t = chi_square_prior_scalar(&grid, &inputs).unwrap();
        let first = t.log_values()[0];
        assert!(t.log_values().iter().all(|v| (v - first).abs() < 1e-12));
        // constant third-order terms tilt the prior linearly
        let tilted = ChiSqPriorInputs { a_l: exact_input(|_| 0.5), ..inputs };
        let t = chi_square_prior_scalar(&grid, &tilted).unwrap();
        let d: Vec<f64> = t.log_values().windows(2).map(|w| w[1] - w[0]).collect();
        assert!(d.iter().all(|v| (v - d[0]).abs() < 1e-12));
    }

    #[test]
    fn chi_square_singular_gamma() {
        // 1/g - 4/i + 4 sigma = 1 - 2 + 1 = 0
        let inputs = ChiSqPriorInputs {
            g: exact_input(|_| 1.0),
            i: exact_input(|_| 2.0),
            sigma: exact_input(|_| 0.25),
            a_s: exact_input(|_| 0.0),
            a_l: exact_input(|_| 0.0),
        };
        assert!(matches!(chi_square_prior_scalar(&linspace(0.0, 1.0, 5), &inputs), Err(Error::SingularGamma { .. })));
    }
}
