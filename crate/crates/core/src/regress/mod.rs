//! Least-squares fitting primitives behind the temperature components.

mod isotonic;
mod ols;
mod piecewise;
mod quantile;
mod spline;

pub use isotonic::{isotonic_fit, IsotonicBlock, IsotonicFit};
pub use ols::{ols_fit, LinearModel};
pub use piecewise::{piecewise_fit, PiecewiseLinear};
pub use quantile::{quantile, quantile_breakpoints, sorted_quantile};
pub use spline::{spline_fit, CubicSpline};

use crate::scalar::Scalar;

/// Sum of squared residuals of `f` over paired samples.
pub fn sse<S: Scalar>(x: &[S], y: &[S], f: impl Fn(S) -> S) -> S {
    x.iter().zip(y).map(|(&xi, &yi)| (yi - f(xi)).powi(2)).sum()
}
