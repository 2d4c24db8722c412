//! Benchmark report: scorecards, per-algorithm summaries, nondominated sets.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::metrics::{quartiles, Quartiles};
use crate::bench::pareto::nondominated;
use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineInfo {
    pub os: String,
    pub arch: String,
    pub cpus: usize,
    pub heatcast_version: String,
}

impl MachineInfo {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            heatcast_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Result of one (algorithm, counter) pair. Metric and time fields are
/// `null` when fitting or forecasting failed; `error` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub algorithm: String,
    pub counter: String,
    /// Percent.
    pub mape: Option<f64>,
    /// kWh squared.
    pub mse: Option<f64>,
    /// Seconds, one fit.
    pub train_time_s: Option<f64>,
    /// Microseconds per 72-hour forecast, median over calls.
    pub predict_time_us: Option<f64>,
    /// Origins forecast from (those with a full valid warm-up window).
    pub origins: usize,
    pub scored_cells: usize,
    /// Cells skipped because the actual reading was invalid or not positive.
    pub excluded_cells: usize,
    pub timing_calls: usize,
    pub error: Option<String>,
}

impl ScoreCard {
    pub fn failed(algorithm: String, counter: String, error: String) -> Self {
        Self {
            algorithm,
            counter,
            mape: None,
            mse: None,
            train_time_s: None,
            predict_time_us: None,
            origins: 0,
            scored_cells: 0,
            excluded_cells: 0,
            timing_calls: 0,
            error: Some(error),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Quartiles across the counters an algorithm fitted successfully.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub counters: usize,
    pub failures: usize,
    pub mape: Option<Quartiles>,
    pub mse: Option<Quartiles>,
    pub train_time_s: Option<Quartiles>,
    /// Over per-counter medians.
    pub predict_time_us: Option<Quartiles>,
    /// Median over every timed call of every counter.
    pub predict_time_pooled_us: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeAxis {
    Train,
    Predict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityAxis {
    Mape,
    Mse,
}

impl FromStr for TimeAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(TimeAxis::Train),
            "predict" => Ok(TimeAxis::Predict),
            _ => Err(Error::Config(format!("unknown time axis {s:?} (train or predict)"))),
        }
    }
}

impl FromStr for QualityAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mape" => Ok(QualityAxis::Mape),
            "mse" => Ok(QualityAxis::Mse),
            _ => Err(Error::Config(format!("unknown quality axis {s:?} (mape or mse)"))),
        }
    }
}

impl fmt::Display for TimeAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeAxis::Train => "train",
            TimeAxis::Predict => "predict",
        })
    }
}

impl fmt::Display for QualityAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QualityAxis::Mape => "mape",
            QualityAxis::Mse => "mse",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoSet {
    pub time: TimeAxis,
    pub quality: QualityAxis,
    pub algorithms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub machine: MachineInfo,
    pub train_interval: String,
    pub test_interval: String,
    pub grid_origins: usize,
    pub horizon: usize,
    pub scorecards: Vec<ScoreCard>,
    pub summaries: Vec<AlgorithmSummary>,
    pub nondominated: Vec<ParetoSet>,
    pub failures: usize,
    pub excluded_cells: usize,
}

fn quartiles_of(values: impl Iterator<Item = Option<f64>>) -> Option<Quartiles> {
    let v: Vec<f64> = values.flatten().collect();
    quartiles(&v).ok()
}

/// Per-algorithm summaries in first-appearance order of `cards`.
/// `pooled` gives the median over all prediction calls per algorithm.
pub fn summarize(cards: &[ScoreCard], pooled: &[(String, Option<f64>)]) -> Vec<AlgorithmSummary> {
    let mut names: Vec<&str> = Vec::new();
    for c in cards {
        if !names.contains(&c.algorithm.as_str()) {
            names.push(&c.algorithm);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let ok: Vec<&ScoreCard> = cards.iter().filter(|c| c.algorithm == name && c.is_ok()).collect();
            let failures = cards.iter().filter(|c| c.algorithm == name && !c.is_ok()).count();
            AlgorithmSummary {
                algorithm: name.to_string(),
                counters: ok.len(),
                failures,
                mape: quartiles_of(ok.iter().map(|c| c.mape)),
                mse: quartiles_of(ok.iter().map(|c| c.mse)),
                train_time_s: quartiles_of(ok.iter().map(|c| c.train_time_s)),
                predict_time_us: quartiles_of(ok.iter().map(|c| c.predict_time_us)),
                predict_time_pooled_us: pooled.iter().find(|(n, _)| n == name).and_then(|(_, v)| *v),
            }
        })
        .collect()
}

/// Algorithms no other algorithm beats on both median time and median quality.
pub fn pareto_set(summaries: &[AlgorithmSummary], time: TimeAxis, quality: QualityAxis) -> Vec<String> {
    let points: Vec<(String, f64, f64)> = summaries
        .iter()
        .filter_map(|s| {
            let t = match time {
                TimeAxis::Train => s.train_time_s,
                TimeAxis::Predict => s.predict_time_us,
            }?;
            let q = match quality {
                QualityAxis::Mape => s.mape,
                QualityAxis::Mse => s.mse,
            }?;
            Some((s.algorithm.clone(), t.median, q.median))
        })
        .collect();
    nondominated(&points)
}

impl BenchReport {
    pub fn assemble(
        machine: MachineInfo,
        train_interval: String,
        test_interval: String,
        grid_origins: usize,
        scorecards: Vec<ScoreCard>,
        pooled: &[(String, Option<f64>)],
    ) -> Self {
        let summaries = summarize(&scorecards, pooled);
        let nondominated = [TimeAxis::Train, TimeAxis::Predict]
            .into_iter()
            .flat_map(|t| [QualityAxis::Mape, QualityAxis::Mse].map(|q| (t, q)))
            .map(|(time, quality)| ParetoSet { time, quality, algorithms: pareto_set(&summaries, time, quality) })
            .collect();
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            machine,
            train_interval,
            test_interval,
            grid_origins,
            horizon: crate::series::HORIZON,
            failures: scorecards.iter().filter(|c| !c.is_ok()).count(),
            excluded_cells: scorecards.iter().map(|c| c.excluded_cells).sum(),
            scorecards,
            summaries,
            nondominated,
        }
    }

    /// The nondominated set stored in the report for the given axes.
    pub fn embedded_set(&self, time: TimeAxis, quality: QualityAxis) -> Option<&[String]> {
        self.nondominated.iter().find(|p| p.time == time && p.quality == quality).map(|p| p.algorithms.as_slice())
    }

    /// Recompute a nondominated set from the summaries.
    pub fn pareto(&self, time: TimeAxis, quality: QualityAxis) -> Vec<String> {
        pareto_set(&self.summaries, time, quality)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: BenchReport = serde_json::from_str(text)?;
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<()> {
        if self.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Format(format!("report schema version {} is not supported", self.schema_version)));
        }
        Ok(())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let r: BenchReport = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        r.check()?;
        Ok(r)
    }

    /// One row per algorithm with quartiles of each time and quality axis.
    pub fn write_plot_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["algorithm".to_string(), "counters".to_string(), "failures".to_string()];
        for axis in ["train_time_s", "predict_time_us", "mape", "mse"] {
            for q in ["q1", "median", "q3"] {
                header.push(format!("{axis}_{q}"));
            }
        }
        w.write_record(&header)?;
        for s in &self.summaries {
            let mut row = vec![s.algorithm.clone(), s.counters.to_string(), s.failures.to_string()];
            for q in [s.train_time_s, s.predict_time_us, s.mape, s.mse] {
                match q {
                    Some(q) => row.extend([q.q1, q.median, q.q3].map(|v| v.to_string())),
                    None => row.extend([String::new(), String::new(), String::new()]),
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
