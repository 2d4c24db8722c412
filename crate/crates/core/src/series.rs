//! Hourly energy series, weather records and forecast windows.

use chrono::{Datelike, NaiveDate, NaiveDateTime, Weekday};
use serde::{Deserialize, Serialize};

use crate::calendar::{add_hours, ensure_aligned};
use crate::error::{Error, Result};

/// Forecast horizon in hours.
pub const HORIZON: usize = 72;

/// Contiguous hourly readings of one counter; `values[k]` is hour `start + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    start: NaiveDateTime,
    values: Vec<f64>,
    counter_id: String,
}

impl HourlySeries {
    pub fn new(counter_id: impl Into<String>, start: NaiveDateTime, values: Vec<f64>) -> Result<Self> {
        ensure_aligned(start)?;
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Config(format!("energy readings must be finite and >= 0, got {v}")));
        }
        Ok(Self { start, values, counter_id: counter_id.into() })
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counter_id(&self) -> &str {
        &self.counter_id
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
}

/// Mean of `series.values[at + 1 - window ..= at]`.
pub fn moving_average(series: &HourlySeries, at: usize, window: usize) -> Result<f64> {
    let values = series.values();
    if window == 0 {
        return Err(Error::Config("moving-average window must be at least 1".into()));
    }
    if at >= values.len() {
        return Err(Error::Shape(format!("index {at} outside series of length {}", values.len())));
    }
    if at + 1 < window {
        return Err(Error::WarmUp { needed: window, available: at + 1 });
    }
    let sum: f64 = values[at + 1 - window..=at].iter().sum();
    Ok(sum / window as f64)
}

/// Moving average that also requires every reading in the window to be valid.
pub fn valid_moving_average(values: &[f64], valid: &[bool], at: usize, window: usize) -> Result<f64> {
    debug_assert_eq!(values.len(), valid.len());
    if at >= values.len() || at + 1 < window {
        return Err(Error::WarmUp { needed: window, available: (at + 1).min(values.len()) });
    }
    let lo = at + 1 - window;
    let trailing = valid[lo..=at].iter().rev().take_while(|v| **v).count();
    if trailing < window {
        return Err(Error::WarmUp { needed: window, available: trailing });
    }
    Ok(values[lo..=at].iter().sum::<f64>() / window as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DayType {
    MonThu = 1,
    Fri = 2,
    Sat = 3,
    Sun = 4,
}

impl DayType {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Self::MonThu),
            2 => Some(Self::Fri),
            3 => Some(Self::Sat),
            4 => Some(Self::Sun),
            _ => None,
        }
    }

    pub fn of_date(date: NaiveDate) -> Self {
        match date.weekday() {
            Weekday::Fri => Self::Fri,
            Weekday::Sat => Self::Sat,
            Weekday::Sun => Self::Sun,
            _ => Self::MonThu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Season {
    Spring = 1,
    Summer = 2,
    Autumn = 3,
    Winter = 4,
}

impl Season {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Self::Spring),
            2 => Some(Self::Summer),
            3 => Some(Self::Autumn),
            4 => Some(Self::Winter),
            _ => None,
        }
    }

    /// Astronomical season, switching on the 21st of Mar/Jun/Sep/Dec.
    pub fn of_date(date: NaiveDate) -> Self {
        let md = date.month() * 100 + date.day();
        match md {
            321..=620 => Self::Spring,
            621..=920 => Self::Summer,
            921..=1220 => Self::Autumn,
            _ => Self::Winter,
        }
    }
}

/// Exogenous conditions for one hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    pub temperature: f64,
    pub wind_speed: f64,
    pub humidity: f64,
    pub overcast: u8,
    pub day_type: DayType,
    pub season: Season,
    pub day_length: f64,
}

impl WeatherRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("weather record: {what}")));
        if !self.temperature.is_finite() {
            return bad("temperature must be finite");
        }
        if !(self.wind_speed >= 0.0 && self.wind_speed.is_finite()) {
            return bad("wind speed must be >= 0");
        }
        if !(0.0..=100.0).contains(&self.humidity) {
            return bad("humidity must lie in [0, 100]");
        }
        if self.overcast > 8 {
            return bad("overcast must lie in 0..=8 oktas");
        }
        if !(self.day_length > 0.0 && self.day_length < 24.0) {
            return bad("day length must lie in (0, 24)");
        }
        Ok(())
    }
}

/// Hourly weather aligned to `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherFrame {
    start: NaiveDateTime,
    records: Vec<WeatherRecord>,
}

impl WeatherFrame {
    pub fn new(start: NaiveDateTime, records: Vec<WeatherRecord>) -> Result<Self> {
        ensure_aligned(start)?;
        for r in &records {
            r.validate()?;
        }
        Ok(Self { start, records })
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn records(&self) -> &[WeatherRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Weather column subsets used by the regressors.
///
/// Column order is fixed: T, DL, DT, V, sqrt(V), T*V, T*sqrt(V), pY, Oc, H,
/// with unselected columns skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    FS0,
    FS1,
    FS2,
    FS3,
    FS4,
    FSM,
}

#[derive(Clone, Copy)]
enum Column {
    T,
    DL,
    DT,
    V,
    SqrtV,
    TV,
    TSqrtV,
    PY,
    Oc,
    H,
}

const ALL_COLUMNS: [Column; 10] = [
    Column::T,
    Column::DL,
    Column::DT,
    Column::V,
    Column::SqrtV,
    Column::TV,
    Column::TSqrtV,
    Column::PY,
    Column::Oc,
    Column::H,
];

impl FeatureSet {
    fn columns(self) -> &'static [Column] {
        use Column::*;
        match self {
            FeatureSet::FS0 => &[T, DL],
            FeatureSet::FS1 => &[T, DL, SqrtV, TSqrtV],
            FeatureSet::FS2 => &[T, DL, V, SqrtV, TV, TSqrtV, PY],
            FeatureSet::FS3 | FeatureSet::FSM => &ALL_COLUMNS,
            FeatureSet::FS4 => &[],
        }
    }

    pub fn width(self) -> usize {
        self.columns().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::FS0 => "FS0",
            FeatureSet::FS1 => "FS1",
            FeatureSet::FS2 => "FS2",
            FeatureSet::FS3 => "FS3",
            FeatureSet::FS4 => "FS4",
            FeatureSet::FSM => "FSM",
        }
    }
}

/// Selected raw and derived weather columns; DT and pY as codes 1-4.
pub fn weather_features(rec: &WeatherRecord, fs: FeatureSet) -> Vec<f64> {
    let mut out = Vec::with_capacity(fs.width());
    push_weather_features(rec, fs, &mut out);
    out
}

pub(crate) fn push_weather_features(rec: &WeatherRecord, fs: FeatureSet, out: &mut Vec<f64>) {
    let t = rec.temperature;
    let v = rec.wind_speed;
    for col in fs.columns() {
        out.push(match col {
            Column::T => t,
            Column::DL => rec.day_length,
            Column::DT => rec.day_type.code() as f64,
            Column::V => v,
            Column::SqrtV => v.sqrt(),
            Column::TV => t * v,
            Column::TSqrtV => t * v.sqrt(),
            Column::PY => rec.season.code() as f64,
            Column::Oc => rec.overcast as f64,
            Column::H => rec.humidity,
        });
    }
}

/// 72 predicted readings for hours `origin + 1 ..= origin + 72`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastWindow {
    origin: NaiveDateTime,
    values: Vec<f64>,
}

impl ForecastWindow {
    pub fn new(origin: NaiveDateTime, values: Vec<f64>) -> Result<Self> {
        if values.len() != HORIZON {
            return Err(Error::Shape(format!("forecast window needs {HORIZON} values, got {}", values.len())));
        }
        Ok(Self { origin, values })
    }

    pub fn origin(&self) -> NaiveDateTime {
        self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t0() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2019, 1, 7).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn series(values: &[f64]) -> HourlySeries {
        HourlySeries::new("c", t0(), values.to_vec()).unwrap()
    }

    fn record(t: f64, v: f64, dl: f64) -> WeatherRecord {
        WeatherRecord {
            temperature: t,
            wind_speed: v,
            humidity: 80.0,
            overcast: 5,
            day_type: DayType::Sat,
            season: Season::Winter,
            day_length: dl,
        }
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&series(&[2.0, 4.0, 6.0]), 2, 3).unwrap(), 4.0);
        assert_eq!(moving_average(&series(&[1.0, 2.0, 3.0, 4.0]), 3, 2).unwrap(), 3.5);
        let flat = series(&[5.0; 20]);
        for w in 1..=20 {
            assert_eq!(moving_average(&flat, 19, w).unwrap(), 5.0);
        }
    }

    #[test]
    fn moving_average_needs_full_window() {
        let s = series(&[1.0, 2.0, 3.0]);
        assert!(matches!(moving_average(&s, 1, 3), Err(Error::WarmUp { needed: 3, available: 2 })));
        assert!(moving_average(&s, 2, 0).is_err());
    }

    #[test]
    fn valid_moving_average_rejects_gaps() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(valid_moving_average(&v, &[true; 4], 3, 2).unwrap(), 3.5);
        let err = valid_moving_average(&v, &[true, true, false, true], 3, 2).unwrap_err();
        assert!(matches!(err, Error::WarmUp { needed: 2, available: 1 }));
    }

    #[test]
    fn series_rejects_negative_readings() {
        assert!(HourlySeries::new("c", t0(), vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn feature_examples() {
        assert_eq!(weather_features(&record(10.0, 3.0, 8.0), FeatureSet::FS0), vec![10.0, 8.0]);
        assert!(weather_features(&record(10.0, 3.0, 8.0), FeatureSet::FS4).is_empty());
        assert_eq!(weather_features(&record(-2.0, 4.0, 7.5), FeatureSet::FS1), vec![-2.0, 7.5, 2.0, -4.0]);
        let all = weather_features(&record(-2.0, 4.0, 7.5), FeatureSet::FS3);
        assert_eq!(all, vec![-2.0, 7.5, 3.0, 4.0, 2.0, -8.0, -4.0, 4.0, 5.0, 80.0]);
    }

    #[test]
    fn calendar_codes() {
        let fri = NaiveDate::from_ymd_opt(2019, 1, 11).unwrap();
        assert_eq!(DayType::of_date(fri), DayType::Fri);
        assert_eq!(Season::of_date(NaiveDate::from_ymd_opt(2019, 1, 11).unwrap()), Season::Winter);
        assert_eq!(Season::of_date(NaiveDate::from_ymd_opt(2019, 7, 1).unwrap()), Season::Summer);
    }

    #[test]
    fn window_length_is_enforced() {
        assert!(ForecastWindow::new(t0(), vec![0.0; 71]).is_err());
        assert_eq!(ForecastWindow::new(t0(), vec![0.0; 72]).unwrap().values().len(), 72);
    }

    proptest::proptest! {
        #[test]
        fn moving_average_is_translation_invariant(
            vals in proptest::collection::vec(0.0f64..1e3, 1..64),
            c in 0.0f64..1e3,
            w in 1usize..64,
        ) {
            let at = vals.len() - 1;
            let w = w.min(vals.len());
            let base = moving_average(&series(&vals), at, w).unwrap();
            let shifted: Vec<f64> = vals.iter().map(|v| v + c).collect();
            let moved = moving_average(&series(&shifted), at, w).unwrap();
            proptest::prop_assert!((moved - base - c).abs() <= 1e-9 * (1.0 + moved.abs()));
        }

        #[test]
        fn feature_width_is_fixed(t in -30.0f64..35.0, v in 0.0f64..30.0, dl in 0.1f64..23.9) {
            let rec = record(t, v, dl);
            for (fs, n) in [(FeatureSet::FS0, 2), (FeatureSet::FS1, 4), (FeatureSet::FS2, 7),
                            (FeatureSet::FS3, 10), (FeatureSet::FS4, 0), (FeatureSet::FSM, 10)] {
                proptest::prop_assert_eq!(weather_features(&rec, fs).len(), n);
            }
            proptest::prop_assert_eq!(
                weather_features(&rec, FeatureSet::FS3),
                weather_features(&rec, FeatureSet::FSM)
            );
        }
    }
}
