//! Network input rows built from past readings, weather and calendar.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::calendar::HOURS_PER_WEEK;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::models::CounterView;
use crate::series::{weather_features, FeatureSet, WeatherRecord, HORIZON};

/// Hours of trailing history every network row requires.
pub const NN_HISTORY: usize = 144;

/// Hour shifts into the past used by the feed-forward network.
pub const FFNN_INDICES: [usize; 85] = [
    0, 1, 2, 6, 7, 8, 9, 11, 12, 17, 19, 20, 21, 22, 23, 25, 26, 28, 29, 30, 32, 33, 35, 36, 37, 39, 40, 41, 42, 44,
    46, 47, 48, 50, 53, 54, 56, 59, 60, 62, 67, 69, 71, 74, 75, 77, 82, 84, 85, 86, 92, 94, 97, 98, 100, 103, 105, 106,
    107, 109, 110, 112, 114, 116, 117, 118, 119, 121, 122, 125, 126, 127, 128, 129, 130, 131, 132, 134, 135, 136, 137,
    139, 140, 142, 143,
];

/// Hour shifts into the past used by the RBF network.
pub const RBFNN_INDICES: [usize; 50] = [
    1, 2, 4, 5, 10, 14, 15, 19, 21, 23, 27, 28, 29, 41, 44, 45, 46, 47, 48, 51, 56, 57, 58, 60, 65, 67, 72, 73, 75, 76,
    79, 81, 86, 87, 90, 91, 93, 96, 104, 112, 116, 121, 124, 128, 131, 132, 135, 139, 140, 142,
];

/// Columns of one input row: readings at the listed shifts before the
/// origin, the origin's weather features, and optionally sine/cosine
/// encodings of the origin's hour of day and hour of week.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    pub past_indices: Vec<usize>,
    pub weather: Option<FeatureSet>,
    pub calendar: bool,
}

impl InputSpec {
    /// 85 shifts, all ten weather columns and 4 calendar columns: 99 inputs.
    pub fn ffnn() -> Self {
        Self { past_indices: FFNN_INDICES.to_vec(), weather: Some(FeatureSet::FS3), calendar: true }
    }

    /// The 50 RBF shifts alone.
    pub fn rbfnn() -> Self {
        Self { past_indices: RBFNN_INDICES.to_vec(), weather: None, calendar: false }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&i) = self.past_indices.iter().find(|&&i| i >= NN_HISTORY) {
            return Err(Error::Config(format!("past index {i} outside 0..{NN_HISTORY}")));
        }
        if self.width() == 0 {
            return Err(Error::Config("network input spec selects no columns".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.past_indices.len() + self.weather.map_or(0, FeatureSet::width) + if self.calendar { 4 } else { 0 }
    }

    /// Append the row for an origin at `at` to `out`. `week_hour` is the
    /// origin's hour of week; the caller guarantees `at >= 143`.
    pub fn push_row(&self, values: &[f64], at: usize, now: &WeatherRecord, week_hour: usize, out: &mut Vec<f64>) {
        out.extend(self.past_indices.iter().map(|&i| values[at - i]));
        if let Some(fs) = self.weather {
            out.extend(weather_features(now, fs));
        }
        if self.calendar {
            let day = (week_hour % 24) as f64 / 24.0;
            let week = week_hour as f64 / HOURS_PER_WEEK as f64;
            out.extend([(TAU * day).sin(), (TAU * day).cos(), (TAU * week).sin(), (TAU * week).cos()]);
        }
    }
}

/// Training rows for a counter: every origin with 144 valid trailing hours
/// and 72 valid following hours.
pub struct RowSet {
    pub origins: Vec<usize>,
    pub inputs: Matrix<f64>,
    pub targets: Matrix<f64>,
}

/// Whether the `len` hours ending at `end` are all valid, from a prefix count.
fn all_valid(prefix: &[usize], end: usize, len: usize) -> bool {
    end + 1 >= len && prefix[end + 1] - prefix[end + 1 - len] == len
}

pub fn training_rows(view: &CounterView<'_>, spec: &InputSpec) -> Result<RowSet> {
    spec.validate()?;
    let n = view.len();
    let mut prefix = vec![0usize; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + usize::from(view.valid[i]);
    }
    let width = spec.width();
    let mut origins = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for t in NN_HISTORY - 1..n.saturating_sub(HORIZON) {
        if all_valid(&prefix, t, NN_HISTORY) && all_valid(&prefix, t + HORIZON, HORIZON) {
            origins.push(t);
            spec.push_row(view.values, t, &view.weather[t], view.week_hour(t), &mut x);
            y.extend_from_slice(&view.values[t + 1..=t + HORIZON]);
        }
    }
    let rows = origins.len();
    Ok(RowSet { origins, inputs: Matrix::from_vec(rows, width, x)?, targets: Matrix::from_vec(rows, HORIZON, y)? })
}
