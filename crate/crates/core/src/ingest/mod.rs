//! Loading, cleaning, splitting and synthesizing counter/weather datasets.

mod clean;
mod csv_io;
mod split;
mod synth;

pub use clean::{clean, CleanDataset, CounterData};
pub use csv_io::{load_csv, parse_timestamp, write_csv, write_rejects, ColumnMapping, LoadOptions, TIMESTAMP_FORMAT};
pub use split::{split, Interval, TestView};
pub use synth::{generate_synthetic, SynthConfig, SynthTruth};

use std::collections::BTreeSet;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::series::WeatherRecord;

/// Identifier of the network-total counter.
pub const SUM_COUNTER: &str = "sum";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub timestamp: NaiveDateTime,
    pub counter_id: String,
    pub energy_kwh: f64,
    pub weather: WeatherRecord,
}

/// A malformed input line that was set aside instead of loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawDataset {
    pub rows: Vec<RawRow>,
    pub counters: BTreeSet<String>,
    pub rejects: Vec<Reject>,
}

impl RawDataset {
    pub fn from_rows(rows: Vec<RawRow>) -> Self {
        let counters = rows.iter().map(|r| r.counter_id.clone()).collect();
        Self { rows, counters, rejects: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
