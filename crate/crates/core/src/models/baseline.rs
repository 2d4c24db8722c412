//! Flat forecast at the recent moving average.

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{finish_window, ForecastContext, Forecaster};
use crate::series::{valid_moving_average, ForecastWindow, HORIZON};

/// Window of the C-100 reference forecaster.
pub const C100_WINDOW: usize = 100;

/// Repeats the mean of the last `window` readings over the whole horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovingAverageBaseline {
    pub window: usize,
}

impl MovingAverageBaseline {
    pub fn new(window: usize) -> Self {
        Self { window }
    }
}

impl Default for MovingAverageBaseline {
    fn default() -> Self {
        Self::new(C100_WINDOW)
    }
}

/// C-100 forecast from readings ending at `origin`.
pub fn c100_predict(history: &[f64], valid: &[bool], origin: NaiveDateTime) -> Result<ForecastWindow> {
    if history.is_empty() {
        return Err(Error::WarmUp { needed: C100_WINDOW, available: 0 });
    }
    let mean = valid_moving_average(history, valid, history.len() - 1, C100_WINDOW)?;
    finish_window(origin, vec![mean; HORIZON])
}

impl Forecaster for MovingAverageBaseline {
    fn warmup(&self) -> usize {
        self.window
    }

    fn predict(&self, ctx: &ForecastContext<'_>) -> Result<ForecastWindow> {
        let mean = valid_moving_average(ctx.history, ctx.valid, ctx.origin_index(), self.window)?;
        finish_window(ctx.origin, vec![mean; HORIZON])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn t0() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2019, 1, 2).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    #[test]
    fn constant_history() {
        let w = c100_predict(&[7.0; 150], &[true; 150], t0()).unwrap();
        assert_eq!(w.values(), &[7.0; 72][..]);
    }

    #[test]
    fn arithmetic_mean_of_last_hundred() {
        let h: Vec<f64> = (1..=100).map(f64::from).collect();
        let w = c100_predict(&h, &[true; 100], t0()).unwrap();
        assert!(w.values().iter().all(|&v| v == 50.5));
    }

    #[test]
    fn short_history_is_a_warm_up_error() {
        assert!(matches!(c100_predict(&[1.0; 99], &[true; 99], t0()), Err(Error::WarmUp { needed: 100, .. })));
        let mut valid = [true; 120];
        valid[110] = false;
        assert!(matches!(c100_predict(&[1.0; 120], &valid, t0()), Err(Error::WarmUp { .. })));
    }
}
