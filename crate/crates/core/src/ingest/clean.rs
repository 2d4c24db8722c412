use std::collections::BTreeMap;

use chrono::NaiveDateTime;

use crate::calendar::{add_hours, hours_between};
use crate::ingest::{RawDataset, RawRow};
use crate::series::{DayType, HourlySeries, Season, WeatherFrame, WeatherRecord};

/// One counter on the dataset's hour grid. Hours without a reading hold 0
/// and are invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterData {
    pub series: HourlySeries,
    pub valid: Vec<bool>,
}

impl CounterData {
    pub fn id(&self) -> &str {
        self.series.counter_id()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Counters and weather on one contiguous hour grid, with per-reading
/// validity. Hours without weather carry a placeholder record with zero
/// humidity, which the cleaning rules always reject.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanDataset {
    start: NaiveDateTime,
    len: usize,
    counters: Vec<CounterData>,
    weather: WeatherFrame,
}

impl CleanDataset {
    pub(crate) fn from_parts(start: NaiveDateTime, counters: Vec<CounterData>, weather: WeatherFrame) -> Self {
        let len = weather.len();
        debug_assert!(counters.iter().all(|c| c.series.len() == len && c.valid.len() == len));
        Self { start, len, counters, weather }
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    /// Last hour on the grid, or `None` for an empty dataset.
    pub fn end(&self) -> Option<NaiveDateTime> {
        (self.len > 0).then(|| add_hours(self.start, self.len as i64 - 1))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn counters(&self) -> &[CounterData] {
        &self.counters
    }

    pub fn counter(&self, id: &str) -> Option<&CounterData> {
        self.counters.iter().find(|c| c.id() == id)
    }

    pub fn weather(&self) -> &WeatherFrame {
        &self.weather
    }

    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        add_hours(self.start, index as i64)
    }

    /// Grid index of `ts`, if it falls inside the dataset.
    pub fn index_of(&self, ts: NaiveDateTime) -> Option<usize> {
        let h = hours_between(self.start, ts);
        (h >= 0 && (h as usize) < self.len && add_hours(self.start, h) == ts).then_some(h as usize)
    }

    /// Sub-grid covering `from..=to`, clipped to the available hours.
    pub fn slice(&self, from: NaiveDateTime, to: NaiveDateTime) -> CleanDataset {
        let lo = hours_between(self.start, from).max(0) as usize;
        let hi = (hours_between(self.start, to) + 1).clamp(0, self.len as i64) as usize;
        let (lo, hi) = if lo >= hi { (0, 0) } else { (lo, hi) };
        let start = if hi > lo { self.timestamp(lo) } else { from.max(self.start) };
        let counters = self
            .counters
            .iter()
            .map(|c| CounterData {
                series: HourlySeries::new(c.id(), start, c.series.values()[lo..hi].to_vec())
                    .expect("sub-slice of a valid series"),
                valid: c.valid[lo..hi].to_vec(),
            })
            .collect();
        let weather =
            WeatherFrame::new(start, self.weather.records()[lo..hi].to_vec()).expect("sub-slice of a valid frame");
        CleanDataset::from_parts(start, counters, weather)
    }

    /// Valid readings only, as raw rows in time order.
    pub fn to_raw(&self) -> RawDataset {
        let mut rows = Vec::new();
        for h in 0..self.len {
            for c in &self.counters {
                if c.valid[h] {
                    rows.push(RawRow {
                        timestamp: self.timestamp(h),
                        counter_id: c.id().to_string(),
                        energy_kwh: c.series.values()[h],
                        weather: self.weather.records()[h],
                    });
                }
            }
        }
        RawDataset::from_rows(rows)
    }
}

fn placeholder_weather(ts: NaiveDateTime) -> WeatherRecord {
    WeatherRecord {
        temperature: 0.0,
        wind_speed: 0.0,
        humidity: 0.0,
        overcast: 0,
        day_type: DayType::of_date(ts.date()),
        season: Season::of_date(ts.date()),
        day_length: 12.0,
    }
}

/// Build the hour grid and apply the validity rules.
///
/// An hour is usable only if its humidity is non-zero and at least one
/// counter reads non-zero at it. Over each counter's readings at usable
/// hours, a zero counts only when both neighbouring readings are non-zero;
/// the first and last readings have a missing neighbour, so a zero there is
/// invalid.
pub fn clean(raw: &RawDataset) -> CleanDataset {
    let Some(start) = raw.rows.iter().map(|r| r.timestamp).min() else {
        let start = NaiveDateTime::default();
        return CleanDataset::from_parts(start, Vec::new(), WeatherFrame::new(start, Vec::new()).unwrap());
    };
    let end = raw.rows.iter().map(|r| r.timestamp).max().unwrap();
    let len = hours_between(start, end) as usize + 1;

    let mut weather: Vec<Option<WeatherRecord>> = vec![None; len];
    let mut readings: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    for r in &raw.rows {
        let h = hours_between(start, r.timestamp) as usize;
        weather[h].get_or_insert(r.weather);
        readings.entry(r.counter_id.as_str()).or_insert_with(|| vec![None; len])[h] = Some(r.energy_kwh);
    }
    let weather: Vec<WeatherRecord> = weather
        .into_iter()
        .enumerate()
        .map(|(h, w)| w.unwrap_or_else(|| placeholder_weather(add_hours(start, h as i64))))
        .collect();

    let usable: Vec<bool> = (0..len)
        .map(|h| weather[h].humidity > 0.0 && readings.values().any(|v| v[h].is_some_and(|x| x != 0.0)))
        .collect();

    let counters = readings
        .into_iter()
        .map(|(id, vals)| {
            let surviving: Vec<usize> = (0..len).filter(|&h| usable[h] && vals[h].is_some()).collect();
            let mut valid = vec![false; len];
            for (k, &h) in surviving.iter().enumerate() {
                let v = vals[h].unwrap();
                valid[h] = if v != 0.0 {
                    true
                } else {
                    let nonzero = |i: usize| vals[surviving[i]].is_some_and(|x| x != 0.0);
                    k > 0 && k + 1 < surviving.len() && nonzero(k - 1) && nonzero(k + 1)
                };
            }
            let values: Vec<f64> = vals.iter().map(|v| v.unwrap_or(0.0)).collect();
            CounterData { series: HourlySeries::new(id, start, values).expect("loaded readings are >= 0"), valid }
        })
        .collect();
    let weather = WeatherFrame::new(start, weather).expect("loaded weather satisfies its invariants");
    CleanDataset::from_parts(start, counters, weather)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn t(h: i64) -> NaiveDateTime {
        add_hours(NaiveDate::from_ymd_opt(2019, 1, 7).unwrap().and_hms_opt(0, 0, 0).unwrap(), h)
    }

    fn weather(humidity: f64) -> WeatherRecord {
        WeatherRecord { humidity, ..placeholder_weather(t(0)) }
    }

    fn raw(counters: &[(&str, &[f64])], humidity: &[f64]) -> RawDataset {
        let mut rows = Vec::new();
        for (h, &hum) in humidity.iter().enumerate() {
            for (id, vals) in counters {
                rows.push(RawRow {
                    timestamp: t(h as i64),
                    counter_id: id.to_string(),
                    energy_kwh: vals[h],
                    weather: weather(hum),
                });
            }
        }
        RawDataset::from_rows(rows)
    }

    #[test]
    fn zero_between_nonzeros_is_valid() {
        let ds = clean(&raw(&[("a", &[5.0, 0.0, 7.0]), ("b", &[1.0, 1.0, 1.0])], &[50.0; 3]));
        assert_eq!(ds.counter("a").unwrap().valid, vec![true, true, true]);
    }

    #[test]
    fn trailing_zeros_are_invalid() {
        let ds = clean(&raw(&[("a", &[5.0, 0.0, 0.0]), ("b", &[1.0, 1.0, 1.0])], &[50.0; 3]));
        assert_eq!(ds.counter("a").unwrap().valid, vec![true, false, false]);
    }

    #[test]
    fn all_zero_hour_is_invalid_everywhere() {
        let ds = clean(&raw(&[("a", &[5.0, 0.0, 7.0]), ("b", &[2.0, 0.0, 3.0])], &[50.0; 3]));
        assert_eq!(ds.counter("a").unwrap().valid, vec![true, false, true]);
        assert_eq!(ds.counter("b").unwrap().valid, vec![true, false, true]);
    }

    #[test]
    fn zero_humidity_hour_is_invalid() {
        let ds = clean(&raw(&[("a", &[5.0, 6.0, 7.0])], &[50.0, 0.0, 50.0]));
        assert_eq!(ds.counter("a").unwrap().valid, vec![true, false, true]);
    }

    #[test]
    fn missing_hours_are_invalid_gaps() {
        let mut r = raw(&[("a", &[5.0, 6.0, 7.0])], &[50.0; 3]);
        r.rows[2].timestamp = t(4);
        let ds = clean(&r);
        assert_eq!(ds.len(), 5);
        assert_eq!(ds.counter("a").unwrap().valid, vec![true, true, false, false, true]);
        assert_eq!(ds.weather().records()[2].humidity, 0.0);
    }

    #[test]
    fn empty_input_gives_empty_dataset() {
        let ds = clean(&RawDataset::default());
        assert!(ds.is_empty());
        assert!(ds.counters().is_empty());
    }

    #[test]
    fn slice_clips_and_preserves_values() {
        let ds = clean(&raw(&[("a", &[1.0, 2.0, 3.0, 4.0])], &[50.0; 4]));
        let s = ds.slice(t(1), t(10));
        assert_eq!(s.start(), t(1));
        assert_eq!(s.counter("a").unwrap().series.values(), &[2.0, 3.0, 4.0]);
        assert!(ds.slice(t(10), t(12)).is_empty());
        assert_eq!(ds.index_of(t(3)), Some(3));
        assert_eq!(ds.index_of(t(4)), None);
    }
}
