//! Dense small-dimension linear algebra, finite differences, Bessel
//! functions and one-dimensional quadrature.

mod diff;
mod matrix;
mod quadrature;
mod special;

pub use diff::{fd_derivative_1d, fd_gradient, fd_hessian, fd_third_tensor, try_fd_gradient, try_fd_hessian};
pub use matrix::{spd_factor, SquareMatrix, TriangularFactor, MAX_DIM};
pub use quadrature::{grid_normalize, integrate, interpolate, linspace, pairwise_sum, trapezoid, Grid1D};
pub use special::{bessel_ratio_a1, log_bessel_i0};
