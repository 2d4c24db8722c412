//! Calendar indexing on local wall-clock hours.
//!
//! Timestamps are naive local times of the dataset's single configured
//! timezone. Daylight-saving transitions are not modelled: a repeated or
//! skipped wall-clock hour is simply a repeated or missing sample.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::error::{Error, Result};

pub const HOURS_PER_WEEK: usize = 168;
/// Slots in the yearly index; Feb 29 owns slots 1416..1440 in every year.
pub const HOURS_PER_LEAP_YEAR: usize = 8784;

pub fn ensure_aligned(ts: NaiveDateTime) -> Result<()> {
    if ts.minute() != 0 || ts.second() != 0 || ts.nanosecond() != 0 {
        return Err(Error::Alignment(ts));
    }
    Ok(())
}

/// Hour of the week, 0 at Monday 00:00.
pub fn hour_of_week(ts: NaiveDateTime) -> Result<usize> {
    ensure_aligned(ts)?;
    Ok(ts.weekday().num_days_from_monday() as usize * 24 + ts.hour() as usize)
}

/// Hour of the year on a fixed 366-day calendar.
///
/// Days after February in a common year are shifted by one so that a given
/// calendar date always lands on the same slot; the Feb 29 slots are then
/// never produced by common years.
pub fn hour_of_year(ts: NaiveDateTime) -> Result<usize> {
    ensure_aligned(ts)?;
    let mut day = ts.ordinal0() as usize;
    if !is_leap(ts.year()) && ts.month() > 2 {
        day += 1;
    }
    Ok(day * 24 + ts.hour() as usize)
}

pub fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn add_hours(ts: NaiveDateTime, hours: i64) -> NaiveDateTime {
    ts + Duration::hours(hours)
}

/// Signed whole hours from `from` to `to`.
pub fn hours_between(from: NaiveDateTime, to: NaiveDateTime) -> i64 {
    (to - from).num_hours()
}

/// Daylight hours at `latitude_deg` on `date`, from the solar declination.
///
/// The result is kept strictly inside (0, 24) so polar day/night still
/// satisfies the weather-record invariant.
pub fn day_length(date: NaiveDate, latitude_deg: f64) -> f64 {
    let n = date.ordinal() as f64;
    let decl = 23.44_f64.to_radians() * (2.0 * std::f64::consts::PI * (284.0 + n) / 365.0).sin();
    let x = (-latitude_deg.to_radians().tan() * decl.tan()).clamp(-1.0, 1.0);
    let hours = 24.0 / std::f64::consts::PI * x.acos();
    hours.clamp(1e-3, 24.0 - 1e-3)
}
