//! The calibrated scoring-rule posterior: target, sampler, grid and
//! asymptotic approximations, summaries.

mod approx;
mod mh;
mod summary;
mod target;

pub use approx::{expansion_density, grid_posterior_1d, normal_approx, ExpansionDensity, NormalApprox};
pub use mh::{default_proposal, mh_sample, mh_sample_fn, Chain, MhOptions};
pub use summary::{grid_to_csv, posterior_summaries, sample_quantile, summarize_chain, summarize_grid, PosteriorSource, PosteriorSummary};
pub use target::{log_sr_posterior, CalibratedTarget};
