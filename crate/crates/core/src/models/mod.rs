//! Forecaster families behind a common fit/predict interface.

mod algorithm;
mod baseline;
mod dotzauer;
mod format;
mod wregressor;

pub use algorithm::{Algorithm, Family, HistoryMode, SocialMode, TemperatureKind};
pub use baseline::{c100_predict, MovingAverageBaseline, C100_WINDOW};
pub use dotzauer::{dotzauer_fit, dotzauer_predict, DotzauerModel, SocialComponent, TemperatureComponent};
pub use format::{read_model, write_model, ModelFile, MODEL_FORMAT, MODEL_FORMAT_VERSION};
pub use wregressor::{wr_fit, wr_predict, WRegressor, WR_WINDOW};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::calendar::{add_hours, hour_of_week, HOURS_PER_WEEK};
use crate::error::{Error, Result};
use crate::ingest::CleanDataset;
use crate::neural::{NeuralForecaster, TrainConfig};
use crate::series::{ForecastWindow, WeatherRecord, HORIZON};

/// One counter's readings, validity and weather on a contiguous hour grid.
#[derive(Debug, Clone, Copy)]
pub struct CounterView<'a> {
    pub counter_id: &'a str,
    pub start: NaiveDateTime,
    pub values: &'a [f64],
    pub valid: &'a [bool],
    pub weather: &'a [WeatherRecord],
}

impl<'a> CounterView<'a> {
    pub fn new(ds: &'a CleanDataset, counter_id: &str) -> Result<Self> {
        let c =
            ds.counter(counter_id).ok_or_else(|| Error::Config(format!("dataset has no counter {counter_id:?}")))?;
        Ok(Self {
            counter_id: c.id(),
            start: ds.start(),
            values: c.series.values(),
            valid: &c.valid,
            weather: ds.weather().records(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        add_hours(self.start, index as i64)
    }

    /// Hour of week of grid index `index`.
    pub fn week_hour(&self, index: usize) -> usize {
        (hour_of_week(self.start).expect("grid start is aligned") + index) % HOURS_PER_WEEK
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Everything a forecaster may see when issuing a forecast at `origin`:
    /// readings up to and including it and the weather for the next 72 hours.
    pub fn context(&self, origin: usize) -> Result<ForecastContext<'a>> {
        if origin >= self.len() {
            return Err(Error::Shape(format!("origin {origin} beyond {} hours of data", self.len())));
        }
        let available = self.len() - origin - 1;
        if available < HORIZON {
            return Err(Error::MissingWeather { needed: HORIZON, available });
        }
        Ok(ForecastContext {
            origin: self.timestamp(origin),
            history: &self.values[..=origin],
            valid: &self.valid[..=origin],
            weather_now: &self.weather[origin],
            forecast: &self.weather[origin + 1..=origin + HORIZON],
        })
    }
}

/// Inputs for one 72-hour forecast issued at `origin`.
#[derive(Debug, Clone, Copy)]
pub struct ForecastContext<'a> {
    pub origin: NaiveDateTime,
    /// Readings ending with the one at `origin`.
    pub history: &'a [f64],
    pub valid: &'a [bool],
    pub weather_now: &'a WeatherRecord,
    /// Weather for `origin + 1 ..= origin + 72`.
    pub forecast: &'a [WeatherRecord],
}

impl ForecastContext<'_> {
    pub(crate) fn check_forecast(&self) -> Result<()> {
        if self.forecast.len() < HORIZON {
            return Err(Error::MissingWeather { needed: HORIZON, available: self.forecast.len() });
        }
        Ok(())
    }

    pub(crate) fn origin_index(&self) -> usize {
        self.history.len() - 1
    }
}

/// A fitted model that issues 72-hour forecasts.
pub trait Forecaster: Send + Sync {
    /// Trailing valid hours needed before a forecast can be issued.
    fn warmup(&self) -> usize;

    fn predict(&self, ctx: &ForecastContext<'_>) -> Result<ForecastWindow>;
}

#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    pub neural: TrainConfig,
}

/// Any fitted forecaster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum TrainedModel {
    Dotzauer(DotzauerModel),
    WRegressor(WRegressor),
    Neural(NeuralForecaster),
    MovingAverage(MovingAverageBaseline),
}

impl Forecaster for TrainedModel {
    fn warmup(&self) -> usize {
        match self {
            TrainedModel::Dotzauer(m) => m.warmup(),
            TrainedModel::WRegressor(m) => m.warmup(),
            TrainedModel::Neural(m) => m.warmup(),
            TrainedModel::MovingAverage(m) => m.warmup(),
        }
    }

    fn predict(&self, ctx: &ForecastContext<'_>) -> Result<ForecastWindow> {
        match self {
            TrainedModel::Dotzauer(m) => m.predict(ctx),
            TrainedModel::WRegressor(m) => m.predict(ctx),
            TrainedModel::Neural(m) => m.predict(ctx),
            TrainedModel::MovingAverage(m) => m.predict(ctx),
        }
    }
}

impl Algorithm {
    /// Fit this algorithm on one counter's training data.
    pub fn fit(&self, train: &CounterView<'_>, opts: &FitOptions) -> Result<TrainedModel> {
        match *self {
            Algorithm::Dotzauer { temperature, social } => {
                dotzauer_fit(train, temperature, social).map(TrainedModel::Dotzauer)
            }
            Algorithm::WRegressor { history, features } => {
                wr_fit(train, history, features).map(TrainedModel::WRegressor)
            }
            Algorithm::Ffnn => NeuralForecaster::fit_ffnn(train, &opts.neural).map(TrainedModel::Neural),
            Algorithm::Rbfnn => NeuralForecaster::fit_rbfnn(train, &opts.neural).map(TrainedModel::Neural),
            Algorithm::C100 => Ok(TrainedModel::MovingAverage(MovingAverageBaseline::new(C100_WINDOW))),
        }
    }
}

/// Clamp predictions at zero and wrap them in a window.
pub(crate) fn finish_window(origin: NaiveDateTime, mut values: Vec<f64>) -> Result<ForecastWindow> {
    for v in &mut values {
        *v = v.max(0.0);
    }
    ForecastWindow::new(origin, values)
}
