use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use super::Simulate;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::SquareMatrix;
use crate::rng::{rng_from_seed, Rng};
use crate::scoring::{CoordTransform, ParamTransform, ScoreModel, ScoreRule};

/// Fixed `n x p` design matrix, stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinRegModel {
    rows: Vec<Vec<f64>>,
}

impl LinRegModel {
    /// Checks `n > p` and full column rank.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.first().map(|r| r.len()).ok_or(Error::EmptyDataset)?;
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidArgument("design rows have unequal lengths".into()));
        }
        if rows.len() <= p {
            return Err(Error::InvalidArgument(format!("need n > p, got n = {}, p = {p}", rows.len())));
        }
        let model = Self { rows };
        let xtx = model.gram();
        if crate::numerics::spd_factor(&xtx).is_err() {
            return Err(Error::InvalidArgument("design is not of full column rank".into()));
        }
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `X^T X`.
    pub fn gram(&self) -> SquareMatrix {
        let p = self.rows[0].len();
        let mut g = SquareMatrix::zeros(p);
        for r in &self.rows {
            for i in 0..p {
                for j in 0..p {
                    g[(i, j)] += r[i] * r[j];
                }
            }
        }
        g
    }

    pub fn mean(&self, beta: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, beta)).collect()
    }

    /// Rows `[x_1, ..., x_p, y]`.
    pub fn dataset(&self, y: &[f64]) -> Result<Dataset> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: y.len() });
        }
        let rows: Vec<Vec<f64>> = self.rows.iter().zip(y).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
        Dataset::from_rows(&rows)
    }

    /// Design with an intercept column and `p - 1` standard normal covariates,
    /// each centred and scaled to unit sample variance.
    pub fn synthetic(seed: u64, n: usize, p: usize) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
        cols.push(vec![1.0; n]);
        for _ in 1..p {
            let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let m = raw.iter().sum::<f64>() / n as f64;
            let sd = (raw.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
            cols.push(raw.iter().map(|v| (v - m) / sd).collect());
        }
        Self::new((0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Responses and the indices that received the outlier shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ContaminatedSample {
    pub y: Vec<f64>,
    pub outliers: Vec<usize>,
}

/// `y = X beta + sigma z`, with `round(eps n)` randomly chosen responses
/// further shifted by `delta sigma`.
pub fn sample_linreg_contaminated(
    seed: u64,
    design: &LinRegModel,
    beta: &[f64],
    sigma2: f64,
    eps: f64,
    delta: f64,
) -> Result<ContaminatedSample> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::InvalidArgument(format!("contamination fraction must lie in [0, 0.5), got {eps}")));
    }
    if beta.len() != design.p() {
        return Err(Error::DimensionMismatch { expected: design.p(), got: beta.len() });
    }
    let mut rng = rng_from_seed(seed);
    let sigma = sigma2.sqrt();
    let n = design.n();
    let mut y: Vec<f64> = design
        .mean(beta)
        .into_iter()
        .map(|m| m + sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    let k = (eps * n as f64).round() as usize;
    let mut outliers = index::sample(&mut rng, n, k).into_vec();
    outliers.sort_unstable();
    for &i in &outliers {
        y[i] += delta * sigma;
    }
    Ok(ContaminatedSample { y, outliers })
}

/// Least squares fit: coefficients and the unbiased residual variance.
pub fn ols(design: &LinRegModel, y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let p = design.p();
    let mut xty = vec![0.0; p];
    for (r, &v) in design.rows().iter().zip(y) {
        for j in 0..p {
            xty[j] += r[j] * v;
        }
    }
    let beta = design.gram().solve(&xty)?;
    let rss: f64 = design.mean(&beta).iter().zip(y).map(|(m, v)| (v - m) * (v - m)).sum();
    Ok((beta, rss / (design.n() - p) as f64))
}

/// Linear regression scored by the log or Tsallis rule, `theta = (beta, sigma^2)`.
///
/// Observations are rows `[x_1, ..., x_p, y]`. The unconstrained coordinates
/// are `(beta, log sigma)`.
#[derive(Debug, Clone)]
pub struct RegressionScoreModel {
    p: usize,
    rule: ScoreRule,
    design: Option<Arc<LinRegModel>>,
}

impl RegressionScoreModel {
    pub fn new(p: usize, rule: ScoreRule) -> Result<Self> {
        if rule == ScoreRule::Hyvarinen {
            return Err(Error::InvalidArgument("regression supports the log and Tsallis scores".into()));
        }
        Ok(Self { p, rule, design: None })
    }

    /// Attaches a design used when simulating new responses.
    pub fn with_design(mut self, design: Arc<LinRegModel>) -> Self {
        self.design = Some(design);
        self
    }

    pub fn rule(&self) -> ScoreRule {
        self.rule
    }

    /// `(d S / d mu, d S / d sigma^2)` at residual `r`.
    fn partials(&self, r: f64, s2: f64) -> (f64, f64) {
        match self.rule {
            ScoreRule::Tsallis(cfg) => {
                let g = cfg.gamma();
                let integral = (2.0 * PI * s2).powf(0.5 * (1.0 - g)) / g.sqrt();
                let e = (2.0 * PI * s2).powf(-0.5 * (g - 1.0)) * (-(g - 1.0) * r * r / (2.0 * s2)).exp();
                let de_dmu = e * (g - 1.0) * r / s2;
                let de_ds2 = e * (g - 1.0) * (-0.5 / s2 + r * r / (2.0 * s2 * s2));
                (-g * de_dmu, (g - 1.0) * (1.0 - g) * integral / (2.0 * s2) - g * de_ds2)
            }
            _ => (-r / s2, 0.5 / s2 - r * r / (2.0 * s2 * s2)),
        }
    }
}

impl ScoreModel for RegressionScoreModel {
    fn name(&self) -> &str {
        match self.rule {
            ScoreRule::Tsallis(_) => "linear regression, Tsallis score",
            _ => "linear regression, log score",
        }
    }
    fn param_dim(&self) -> usize {
        self.p + 1
    }
    fn obs_dim(&self) -> usize {
        self.p + 1
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        let s2 = theta[self.p];
        if !(s2 > 0.0) {
            return Err(Error::Domain(format!("sigma^2 must be positive, got {s2}")));
        }
        let r = x[self.p] - dot(&x[..self.p], &theta[..self.p]);
        Ok(match self.rule {
            ScoreRule::Tsallis(cfg) => {
                let g = cfg.gamma();
                let integral = (2.0 * PI * s2).powf(0.5 * (1.0 - g)) / g.sqrt();
                let e = (2.0 * PI * s2).powf(-0.5 * (g - 1.0)) * (-(g - 1.0) * r * r / (2.0 * s2)).exp();
                (g - 1.0) * integral - g * e
            }
            _ => 0.5 * (2.0 * PI * s2).ln() + r * r / (2.0 * s2),
        })
    }
    fn has_analytic_gradient(&self) -> bool {
        true
    }
    fn score_gradient(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        let s2 = theta[self.p];
        if !(s2 > 0.0) {
            return Err(Error::Domain(format!("sigma^2 must be positive, got {s2}")));
        }
        let r = x[self.p] - dot(&x[..self.p], &theta[..self.p]);
        let (dmu, ds2) = self.partials(r, s2);
        let mut g: Vec<f64> = x[..self.p].iter().map(|v| dmu * v).collect();
        g.push(ds2);
        Ok(g)
    }
    fn in_domain(&self, theta: &[f64]) -> bool {
        theta.iter().all(|v| v.is_finite()) && theta[self.p] > 0.0
    }
    fn transform(&self) -> ParamTransform {
        let mut coords = vec![CoordTransform::Identity; self.p];
        coords.push(CoordTransform::Exp { rate: 2.0 });
        ParamTransform::new(coords)
    }
}

impl Simulate for RegressionScoreModel {
    /// Cycles through the attached design rows.
    fn simulate(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Result<Dataset> {
        let design = self.design.as_ref().ok_or_else(|| Error::InvalidArgument("no design attached".into()))?;
        let sigma = theta[self.p].sqrt();
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let x = &design.rows()[i % design.n()];
            let y = dot(x, &theta[..self.p]) + sigma * Distribution::<f64>::sample(&StandardNormal, rng);
            rows.push(x.iter().copied().chain([y]).collect::<Vec<f64>>());
        }
        if rows.is_empty() {
            return Ok(Dataset::empty(self.p + 1));
        }
        Dataset::from_rows(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fd_gradient;
    use crate::scoring::TsallisConfig;

    #[test]
    fn contamination_bookkeeping() {
        let x = LinRegModel::synthetic(1, 30, 3).unwrap();
        let s = sample_linreg_contaminated(2, &x, &[1.0, 0.5, -0.5], 1.0, 0.1, 8.0).unwrap();
        assert_eq!(s.outliers.len(), 3);
        assert_eq!(s, sample_linreg_contaminated(2, &x, &[1.0, 0.5, -0.5], 1.0, 0.1, 8.0).unwrap());
        assert!(sample_linreg_contaminated(2, &x, &[1.0, 0.5, -0.5], 1.0, 0.5, 8.0).is_err());
    }

    #[test]
    fn ols_recovers_coefficients() {
        let x = LinRegModel::synthetic(3, 400, 3).unwrap();
        let beta = [2.0, -1.0, 0.5];
        let s = sample_linreg_contaminated(4, &x, &beta, 0.25, 0.0, 0.0).unwrap();
        assert!(s.outliers.is_empty());
        let (b, s2) = ols(&x, &s.y).unwrap();
        let cov = x.gram().inverse().unwrap().scale(s2);
        for j in 0..3 {
            assert!((b[j] - beta[j]).abs() < 3.0 * cov[(j, j)].sqrt());
        }
    }

    #[test]
    fn synthetic_design_is_standardized() {
        let x = LinRegModel::synthetic(9, 30, 3).unwrap();
        for j in 1..3 {
            let col: Vec<f64> = x.rows().iter().map(|r| r[j]).collect();
            let m = col.iter().sum::<f64>() / 30.0;
            let v = col.iter().map(|c| (c - m) * (c - m)).sum::<f64>() / 29.0;
            assert!(m.abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
        }
        assert!(LinRegModel::new(vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        for rule in [ScoreRule::Log, ScoreRule::Tsallis(TsallisConfig::new(1.25).unwrap())] {
            let m = RegressionScoreModel::new(2, rule).unwrap();
            let obs = [1.0, 0.3, 1.7];
            for theta in [[0.5, 1.0, 0.8], [-0.2, 2.0, 2.5]] {
                let a = m.score_gradient(&obs, &theta).unwrap();
                let f = fd_gradient(|t| m.score(&obs, t).unwrap(), &theta).unwrap();
                for (u, v) in a.iter().zip(&f) {
                    assert!((u - v).abs() < 1e-6 * u.abs().max(1.0));
                }
            }
        }
    }
}
