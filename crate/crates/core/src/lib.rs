pub mod data;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod models;
pub mod numerics;
pub mod posterior;
pub mod priors;
pub mod rng;
pub mod scoring;

pub use data::Dataset;
pub use error::{Error, Result};
pub use estimation::GodambeEstimate;
pub use numerics::{Grid1D, SquareMatrix, TriangularFactor};
pub use scoring::{ScoreModel, TotalScoreEval};
