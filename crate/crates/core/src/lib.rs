//! District-heating demand forecasting.
//!
//! The crate bundles the temperature/social decomposition forecasters, the
//! hour-of-week autoregressive regressors, two small neural networks and a
//! moving-average baseline, together with a rolling-origin benchmark that
//! scores forecast quality against training and prediction cost.
//!
//! Regression and network code is generic over [`Scalar`] (`f32` or `f64`);
//! the forecasters themselves work in `f64` and the aliases below name the
//! double-precision instantiations they use.

// Index loops mirror the matrix formulas; `!(x > 0)` style checks are
// there to reject NaN as well.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod calendar;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod models;
pub mod neural;
pub mod regress;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::{
    moving_average, weather_features, DayType, FeatureSet, ForecastWindow, HourlySeries, Season, WeatherFrame,
    WeatherRecord, HORIZON,
};

pub type Matrix = linalg::Matrix<f64>;
pub type LinearModel = regress::LinearModel<f64>;
pub type PiecewiseLinear = regress::PiecewiseLinear<f64>;
pub type CubicSpline = regress::CubicSpline<f64>;
pub type IsotonicFit = regress::IsotonicFit<f64>;
