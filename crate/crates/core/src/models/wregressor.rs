//! Hour-of-week linear regressors on the weekly moving average plus weather.

use serde::{Deserialize, Serialize};

use crate::calendar::{hour_of_week, HOURS_PER_WEEK};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::models::{finish_window, CounterView, ForecastContext, Forecaster, HistoryMode};
use crate::regress::{ols_fit, LinearModel};
use crate::series::{valid_moving_average, weather_features, FeatureSet, ForecastWindow, HORIZON};

/// Moving-average window of the regressors, one week.
pub const WR_WINDOW: usize = HOURS_PER_WEEK;

/// Bank of linear models over `[a, W]`.
///
/// Without history there is one model per hour of week of the target hour.
/// With history there is one per (hour of week of the origin, lead), stored
/// at `origin_hour * 72 + lead - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WRegressor {
    pub history: HistoryMode,
    pub features: FeatureSet,
    pub window: usize,
    models: Vec<LinearModel<f64>>,
}

impl WRegressor {
    pub fn new(history: HistoryMode, features: FeatureSet, models: Vec<LinearModel<f64>>) -> Result<Self> {
        let want = Self::model_count_for(history);
        if models.len() != want {
            return Err(Error::Shape(format!("{history:?} regressor needs {want} models, got {}", models.len())));
        }
        let width = 1 + features.width();
        if let Some(m) = models.iter().find(|m| m.coefficients().len() != width) {
            return Err(Error::Shape(format!(
                "regressor model has {} coefficients, feature set {} needs {width}",
                m.coefficients().len(),
                features.name()
            )));
        }
        Ok(Self { history, features, window: WR_WINDOW, models })
    }

    pub fn model_count_for(history: HistoryMode) -> usize {
        match history {
            HistoryMode::NoHistory => HOURS_PER_WEEK,
            HistoryMode::WithHistory => HOURS_PER_WEEK * HORIZON,
        }
    }

    pub fn model_count(&self) -> usize {
        self.models.len()
    }

    pub fn models(&self) -> &[LinearModel<f64>] {
        &self.models
    }

    /// Model used for lead `p` (1-based) from an origin at hour of week `origin_how`.
    pub fn model_for(&self, origin_how: usize, p: usize) -> &LinearModel<f64> {
        match self.history {
            HistoryMode::NoHistory => &self.models[(origin_how + p) % HOURS_PER_WEEK],
            HistoryMode::WithHistory => &self.models[origin_how * HORIZON + p - 1],
        }
    }
}

/// Fit the regressor bank on one counter.
///
/// Tuples whose moving-average window or target contains an invalid hour are
/// dropped. A bucket with fewer than two tuples predicts its own mean, and an
/// empty bucket the mean over all tuples.
pub fn wr_fit(train: &CounterView<'_>, history: HistoryMode, features: FeatureSet) -> Result<WRegressor> {
    let n = train.len();
    let averages: Vec<Option<f64>> =
        (0..n).map(|j| valid_moving_average(train.values, train.valid, j, WR_WINDOW).ok()).collect();
    let weather: Vec<Vec<f64>> = train.weather.iter().map(|w| weather_features(w, features)).collect();
    let width = 1 + features.width();

    let buckets = WRegressor::model_count_for(history);
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); buckets];
    let mut targets: Vec<Vec<f64>> = vec![Vec::new(); buckets];
    let mut push = |bucket: usize, a: f64, w: &[f64], y: f64| {
        rows[bucket].push(a);
        rows[bucket].extend_from_slice(w);
        targets[bucket].push(y);
    };
    for (j, a) in averages.iter().enumerate() {
        let Some(a) = *a else { continue };
        let how = train.week_hour(j);
        match history {
            HistoryMode::NoHistory => push(how, a, &weather[j], train.values[j]),
            HistoryMode::WithHistory => {
                for p in 1..=HORIZON {
                    let q = j + p;
                    if q < n && train.valid[q] {
                        push(how * HORIZON + p - 1, a, &weather[q], train.values[q]);
                    }
                }
            }
        }
    }

    let total: usize = targets.iter().map(Vec::len).sum();
    if total == 0 {
        return Err(Error::InsufficientData(format!(
            "counter {} has no {WR_WINDOW}-hour window of valid readings",
            train.counter_id
        )));
    }
    let overall = targets.iter().flatten().sum::<f64>() / total as f64;
    let constant = |mean: f64| LinearModel::new(vec![0.0; width], mean);

    let models = rows
        .into_iter()
        .zip(targets)
        .map(|(x, y)| match y.len() {
            0 => Ok(constant(overall)),
            1 => Ok(constant(y[0])),
            m => ols_fit(&Matrix::from_vec(m, width, x)?, &y),
        })
        .collect::<Result<Vec<_>>>()?;
    WRegressor::new(history, features, models)
}

/// Forecast from the moving average at the origin and the forecast weather.
pub fn wr_predict(model: &WRegressor, ctx: &ForecastContext<'_>) -> Result<ForecastWindow> {
    ctx.check_forecast()?;
    let a = valid_moving_average(ctx.history, ctx.valid, ctx.origin_index(), model.window)?;
    let how = hour_of_week(ctx.origin)?;
    let mut x = Vec::with_capacity(1 + model.features.width());
    let values = (1..=HORIZON)
        .map(|p| {
            x.clear();
            x.push(a);
            x.extend(weather_features(&ctx.forecast[p - 1], model.features));
            model.model_for(how, p).predict(&x)
        })
        .collect();
    finish_window(ctx.origin, values)
}

impl Forecaster for WRegressor {
    fn warmup(&self) -> usize {
        self.window
    }

    fn predict(&self, ctx: &ForecastContext<'_>) -> Result<ForecastWindow> {
        wr_predict(self, ctx)
    }
}
