use std::fmt;
use std::str::FromStr;

use chrono::{FixedOffset, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::calendar::{add_hours, ensure_aligned, hours_between};
use crate::error::{Error, Result};
use crate::ingest::csv_io::{parse_timestamp, TIMESTAMP_FORMAT};
use crate::ingest::CleanDataset;
use crate::series::HORIZON;

/// Inclusive hour range `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl Interval {
    pub fn new(start: NaiveDateTime, end: NaiveDateTime) -> Result<Self> {
        ensure_aligned(start)?;
        ensure_aligned(end)?;
        if end < start {
            return Err(Error::Interval(format!("end {end} precedes start {start}")));
        }
        Ok(Self { start, end })
    }

    pub fn hours(&self) -> usize {
        hours_between(self.start, self.end) as usize + 1
    }

    pub fn contains(&self, ts: NaiveDateTime) -> bool {
        self.start <= ts && ts <= self.end
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// `start/end`, both ISO-8601.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once('/').ok_or_else(|| Error::Interval(format!("{s:?} is not of the form start/end")))?;
        let utc = FixedOffset::east_opt(0).unwrap();
        let parse =
            |v: &str| parse_timestamp(v, &utc).ok_or_else(|| Error::Interval(format!("unparsable timestamp {v:?}")));
        Interval::new(parse(a)?, parse(b)?)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.start.format(TIMESTAMP_FORMAT), self.end.format(TIMESTAMP_FORMAT))
    }
}

/// Test-period data: the scored interval plus `warmup` hours of history
/// before it and the forecast horizon after it.
#[derive(Debug, Clone, PartialEq)]
pub struct TestView {
    pub data: CleanDataset,
    pub interval: Interval,
    pub warmup: usize,
}

impl TestView {
    /// Hours of the test interval itself.
    pub fn interval_len(&self) -> usize {
        self.interval.hours()
    }
}

/// Cut training and test views out of `ds`.
pub fn split(ds: &CleanDataset, train: Interval, test: Interval, warmup: usize) -> Result<(CleanDataset, TestView)> {
    if train.end >= test.start {
        return Err(Error::Interval(format!("training interval {train} must end before test interval {test} starts")));
    }
    let train_view = ds.slice(train.start, train.end);
    let data = ds.slice(add_hours(test.start, -(warmup as i64)), add_hours(test.end, HORIZON as i64));
    Ok((train_view, TestView { data, interval: test, warmup }))
}
