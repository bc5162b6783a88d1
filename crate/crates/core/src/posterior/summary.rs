use crate::numerics::Grid1D;

use super::mh::Chain;

/// Mode, mean, sd and equal-tailed 95% interval of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSummary {
    pub mode: f64,
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn summarize_grid(g: &Grid1D) -> PosteriorSummary {
    PosteriorSummary { mode: g.argmax(), mean: g.mean(), sd: g.sd(), lower: g.quantile(0.025), upper: g.quantile(0.975) }
}

/// Type-7 sample quantile of sorted values.
pub fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-coordinate summaries; the mode is the coordinate of the draw with the
/// highest log target.
pub fn summarize_chain(chain: &Chain) -> Vec<PosteriorSummary> {
    let mut best = 0;
    for (i, v) in chain.log_target.iter().enumerate() {
        if *v > chain.log_target[best] {
            best = i;
        }
    }
    (0..chain.dim())
        .map(|j| {
            let mut col = chain.column(j);
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
            col.sort_by(f64::total_cmp);
            PosteriorSummary {
                mode: chain.draws[best][j],
                mean,
                sd,
                lower: sample_quantile(&col, 0.025),
                upper: sample_quantile(&col, 0.975),
            }
        })
        .collect()
}

/// Summaries of either a grid posterior or a chain.
pub enum PosteriorSource<'a> {
    Grid(&'a Grid1D),
    Chain(&'a Chain),
}

pub fn posterior_summaries(source: PosteriorSource<'_>) -> Vec<PosteriorSummary> {
    match source {
        PosteriorSource::Grid(g) => vec![summarize_grid(g)],
        PosteriorSource::Chain(c) => summarize_chain(c),
    }
}

/// CSV with columns `theta,density`.
pub fn grid_to_csv(g: &Grid1D) -> String {
    let mut s = String::from("theta,density\n");
    for (t, v) in g.nodes().iter().zip(g.values()) {
        s.push_str(&format!("{t},{v}\n"));
    }
    s
}
