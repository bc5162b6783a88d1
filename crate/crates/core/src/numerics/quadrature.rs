//! One-dimensional grids, trapezoid rules and adaptive Simpson integration.

use crate::error::{Error, Result};

/// Sum with pairwise (cascade) reduction; the order depends only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { b } else { a + step * i as f64 }).collect()
        }
    }
}

/// Trapezoid rule on arbitrary (sorted) nodes.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let parts: Vec<f64> = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .collect();
    pairwise_sum(&parts)
}

/// Nonnegative function values on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl Grid1D {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {}", nodes.len())));
        }
        if nodes.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: nodes.len(), got: values.len() });
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be finite and strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidGrid(format!("value {v} is negative or not finite")));
        }
        Ok(Self { nodes, values })
    }

    /// Builds a grid from log-values, shifting by the maximum before
    /// exponentiating. Entries of `-inf` become zero.
    pub fn from_log_values(nodes: Vec<f64>, log_values: &[f64]) -> Result<Self> {
        let max = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::ZeroMass);
        }
        let values = log_values.iter().map(|l| (l - max).exp()).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> f64 {
        trapezoid(&self.nodes, &self.values)
    }

    fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        let y: Vec<f64> = self.nodes.iter().zip(&self.values).map(|(&x, &v)| f(x) * v).collect();
        trapezoid(&self.nodes, &y) / self.mass()
    }

    pub fn mean(&self) -> f64 {
        self.moment(|x| x)
    }

    pub fn sd(&self) -> f64 {
        let m = self.mean();
        self.moment(|x| (x - m) * (x - m)).sqrt()
    }

    /// Node with the largest value (first one on ties).
    pub fn argmax(&self) -> f64 {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        self.nodes[best]
    }

    /// Cumulative trapezoid mass at each node, normalized to end at 1.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.len());
        let mut total = 0.0;
        acc.push(0.0);
        for i in 1..self.len() {
            total += 0.5 * (self.nodes[i] - self.nodes[i - 1]) * (self.values[i] + self.values[i - 1]);
            acc.push(total);
        }
        acc.iter().map(|c| c / total).collect()
    }

    /// Quantile of the normalized density, linear between nodes of the CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        let cdf = self.cdf();
        let idx = cdf.partition_point(|&c| c < p);
        if idx == 0 {
            return self.nodes[0];
        }
        if idx >= cdf.len() {
            return self.nodes[self.len() - 1];
        }
        let (c0, c1) = (cdf[idx - 1], cdf[idx]);
        let t = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.0 };
        self.nodes[idx - 1] + t * (self.nodes[idx] - self.nodes[idx - 1])
    }

    /// Linear interpolation; points outside the node range are an error.
    pub fn interpolate(&self, x: f64) -> Result<f64> {
        interpolate(&self.nodes, &self.values, x)
    }
}

/// Linear interpolation of `(xs, ys)` at `x`; no extrapolation.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if !(x >= lo && x <= hi) {
        return Err(Error::OutsideSupport { value: x, lo, hi });
    }
    let idx = xs.partition_point(|&v| v < x);
    if idx == 0 {
        return Ok(ys[0]);
    }
    let t = (x - xs[idx - 1]) / (xs[idx] - xs[idx - 1]);
    Ok(ys[idx - 1] + t * (ys[idx] - ys[idx - 1]))
}

/// Rescales a grid so its trapezoid mass is one.
///
/// A grid whose mass is already one to within a few ulps is returned as is,
/// which makes the operation idempotent.
pub fn grid_normalize(g: &Grid1D) -> Result<Grid1D> {
    let mass = g.mass();
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    if (mass - 1.0).abs() <= 1e-14 {
        return Ok(g.clone());
    }
    Ok(Grid1D { nodes: g.nodes.clone(), values: g.values.iter().map(|v| v / mass).collect() })
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        (a, fa): (f64, f64),
        (m, fm): (f64, f64),
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let (flm, frm) = (f(lm), f(rm));
        if !(flm.is_finite() && frm.is_finite()) {
            return Err(Error::NonFiniteEvaluation { point: vec![if flm.is_finite() { rm } else { lm }] });
        }
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(recurse(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth - 1)?
            + recurse(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth - 1)?)
    }

    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::InvalidArgument(format!("bad integration interval [{a}, {b}]")));
    }
    // Start from a fixed partition so narrow features are not missed.
    const PIECES: usize = 16;
    let edges = linspace(a, b, PIECES + 1);
    let mut parts = Vec::with_capacity(PIECES);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        for (x, v) in [(lo, flo), (mid, fmid), (hi, fhi)] {
            if !v.is_finite() {
                return Err(Error::NonFiniteEvaluation { point: vec![x] });
            }
        }
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        parts.push(recurse(&f, (lo, flo), (mid, fmid), (hi, fhi), whole, tol / PIECES as f64, 40)?);
    }
    Ok(pairwise_sum(&parts))
}
