use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{spd_factor, SquareMatrix};
use crate::rng::rng_from_seed;

use super::target::{is_support_error, CalibratedTarget};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhOptions {
    /// Post-burn-in iterations.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Multiplier of the default proposal covariance.
    pub scale: f64,
    /// Robbins-Monro adaptation of the proposal scale during burn-in.
    pub adapt: bool,
}

impl Default for MhOptions {
    fn default() -> Self {
        Self { iterations: 10_000, burn_in: 2_000, thin: 1, scale: 1.0, adapt: true }
    }
}

impl MhOptions {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1000 {
            return Err(Error::InvalidArgument(format!(
                "need at least 1000 post-burn-in iterations, got {}",
                self.iterations
            )));
        }
        if self.thin == 0 || self.thin > self.iterations {
            return Err(Error::InvalidArgument(format!("thinning {} out of range", self.thin)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("proposal scale {} must be positive", self.scale)));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        self.iterations / self.thin
    }
}

/// Retained draws of a random-walk Metropolis-Hastings run.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// One row per retained draw.
    pub draws: Vec<Vec<f64>>,
    pub log_target: Vec<f64>,
    /// Post-burn-in acceptance rate.
    pub acceptance_rate: f64,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Proposal scale multiplier after adaptation.
    pub final_scale: f64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.draws.first().map_or(0, Vec::len)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|r| r[j]).collect()
    }

    /// CSV with columns `draw,<names...>,log_target`.
    pub fn to_csv(&self, names: &[&str]) -> String {
        let mut s = String::from("draw");
        for n in names {
            s.push(',');
            s.push_str(n);
        }
        s.push_str(",log_target\n");
        for (i, (row, lt)) in self.draws.iter().zip(&self.log_target).enumerate() {
            s.push_str(&i.to_string());
            for v in row {
                s.push_str(&format!(",{v}"));
            }
            s.push_str(&format!(",{lt}\n"));
        }
        s
    }
}

fn eval<F: Fn(&[f64]) -> Result<f64>>(f: &F, x: &[f64]) -> Result<f64> {
    match f(x) {
        Ok(v) if v.is_nan() => Ok(f64::NEG_INFINITY),
        Ok(v) => Ok(v),
        Err(e) if is_support_error(&e) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// Random-walk Metropolis-Hastings on an arbitrary log density with Gaussian
/// proposals `N(0, scale^2 cov)`. Draws and log densities are reported in the
/// coordinates of `log_target`.
pub fn mh_sample_fn<F>(log_target: F, start: &[f64], cov: &SquareMatrix, opts: MhOptions, seed: u64) -> Result<Chain>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    opts.validate()?;
    let d = start.len();
    if cov.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: cov.dim() });
    }
    let lower = spd_factor(&cov.symmetrized())?.matrix().transpose();
    let mut rng = rng_from_seed(seed);
    let mut x = start.to_vec();
    let mut lx = eval(&log_target, &x)?;
    if !lx.is_finite() {
        return Err(Error::NonFiniteEvaluation { point: x });
    }
    let target_rate = if d == 1 { 0.44 } else { 0.234 };
    let mut log_scale = opts.scale.ln();
    let mut accepted = 0usize;
    let mut draws = Vec::with_capacity(opts.retained());
    let mut lts = Vec::with_capacity(opts.retained());
    let total = opts.burn_in + opts.iterations;
    let mut z = vec![0.0; d];
    for t in 0..total {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let step = lower.matvec(&z);
        let s = log_scale.exp();
        let y: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + s * b).collect();
        let ly = eval(&log_target, &y)?;
        let u: f64 = rng.random();
        let accept = ly.is_finite() && u.ln() < ly - lx;
        if accept {
            x = y;
            lx = ly;
        }
        if t < opts.burn_in {
            if opts.adapt {
                let a = if accept { 1.0 } else { 0.0 };
                log_scale += (a - target_rate) / ((t + 1) as f64).powf(0.6);
            }
        } else {
            if accept {
                accepted += 1;
            }
            if (t - opts.burn_in + 1) % opts.thin == 0 {
                draws.push(x.clone());
                lts.push(lx);
            }
        }
    }
    let rate = accepted as f64 / opts.iterations as f64;
    if rate < 0.001 {
        return Err(Error::ZeroAcceptance { rate });
    }
    Ok(Chain {
        draws,
        log_target: lts,
        acceptance_rate: rate,
        burn_in: opts.burn_in,
        thin: opts.thin,
        seed,
        final_scale: log_scale.exp(),
    })
}

/// Default proposal covariance `(2.38^2 / d) H^-1 / n`, mapped to sampling
/// coordinates at `theta~` by the inverse Jacobian of the sampling transform.
pub fn default_proposal(target: &CalibratedTarget) -> Result<SquareMatrix> {
    let d = target.dim();
    let h_inv = target.curvature().inverse()?;
    let u0 = target.sampling_transform().to_unconstrained(target.theta_tilde())?;
    let jac = target.sampling_transform().jacobian_diag(&u0);
    let mut cov = h_inv.scale(2.38 * 2.38 / d as f64 / target.n() as f64);
    for a in 0..d {
        for b in 0..d {
            cov[(a, b)] /= jac[a] * jac[b];
        }
    }
    Ok(cov)
}

/// Samples the target in its sampling coordinates starting at `theta~`; draws
/// are returned in model coordinates with the log posterior (no Jacobian).
pub fn mh_sample(target: &CalibratedTarget, opts: MhOptions, seed: u64) -> Result<Chain> {
    let cov = default_proposal(target)?;
    let t = target.sampling_transform();
    let u0 = t.to_unconstrained(target.theta_tilde())?;
    let mut chain = mh_sample_fn(|u| target.log_posterior_sampling(u), &u0, &cov, opts, seed)?;
    for (row, lt) in chain.draws.iter_mut().zip(chain.log_target.iter_mut()) {
        let theta = t.to_natural(row);
        *lt -= t.log_abs_det_jacobian(row);
        *row = theta;
    }
    Ok(chain)
}
