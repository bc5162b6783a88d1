//! Minimum-score estimation, closed-form estimators and Godambe information.

mod closed_form;
mod godambe;
mod mc;
mod optimize;

pub use closed_form::{
    circular_normal_equations, nef_theta_closed_form, vmf_kappa_closed_form, vmf_kappa_known_direction,
    CircularMoments,
};
pub use godambe::{assemble_godambe, estimate_j, estimate_k, godambe_at, information_identity_gap, GodambeEstimate};
pub use mc::{monte_carlo_information, McInformation};
pub use optimize::{
    minimize_multistart, minimize_total_score, minimize_total_score_with, nelder_mead, MinScoreResult,
    NelderMeadOptions, NelderMeadResult,
};
