use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDateTime};
use csv::StringRecord;

use crate::calendar::{day_length, ensure_aligned};
use crate::error::{Error, Result};
use crate::ingest::{RawDataset, RawRow, Reject};
use crate::series::{DayType, Season, WeatherRecord};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// Header names for each field. `day_length_h` is optional in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub timestamp: String,
    pub counter_id: String,
    pub energy_kwh: String,
    pub temperature_c: String,
    pub wind_speed_ms: String,
    pub humidity_pct: String,
    pub overcast_oktas: String,
    pub day_type: String,
    pub season: String,
    pub day_length_h: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            counter_id: "counter_id".into(),
            energy_kwh: "energy_kwh".into(),
            temperature_c: "temperature_c".into(),
            wind_speed_ms: "wind_speed_ms".into(),
            humidity_pct: "humidity_pct".into(),
            overcast_oktas: "overcast_oktas".into(),
            day_type: "day_type".into(),
            season: "season".into(),
            day_length_h: "day_length_h".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub mapping: ColumnMapping,
    /// Site latitude for day lengths missing from the file.
    pub latitude: f64,
    /// Zone of the dataset's wall clock; timestamps carrying an explicit
    /// offset are converted into it.
    pub timezone: FixedOffset,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { mapping: ColumnMapping::default(), latitude: 52.7, timezone: FixedOffset::east_opt(0).unwrap() }
    }
}

struct Columns {
    timestamp: usize,
    counter_id: usize,
    energy: usize,
    temperature: usize,
    wind: usize,
    humidity: usize,
    overcast: usize,
    day_type: usize,
    season: usize,
    day_length: Option<usize>,
}

impl Columns {
    fn resolve(header: &StringRecord, m: &ColumnMapping) -> Result<Self> {
        let find = |name: &str| header.iter().position(|h| h.trim() == name);
        let need = |name: &str| find(name).ok_or_else(|| Error::Config(format!("header has no column named {name:?}")));
        Ok(Self {
            timestamp: need(&m.timestamp)?,
            counter_id: need(&m.counter_id)?,
            energy: need(&m.energy_kwh)?,
            temperature: need(&m.temperature_c)?,
            wind: need(&m.wind_speed_ms)?,
            humidity: need(&m.humidity_pct)?,
            overcast: need(&m.overcast_oktas)?,
            day_type: need(&m.day_type)?,
            season: need(&m.season)?,
            day_length: find(&m.day_length_h),
        })
    }
}

/// Parse an ISO-8601 timestamp. Offsets are converted to `tz` wall-clock
/// time; naive timestamps are taken as already in `tz`.
pub fn parse_timestamp(s: &str, tz: &FixedOffset) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(tz).naive_local());
    }
    for fmt in [TIMESTAMP_FORMAT, "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(ts) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(ts);
        }
    }
    None
}

fn parse_day_type(s: &str) -> Option<DayType> {
    let s = s.trim();
    if let Ok(code) = s.parse::<u8>() {
        return DayType::from_code(code);
    }
    match s.to_ascii_lowercase().as_str() {
        "monthu" | "mon-thu" | "weekday" => Some(DayType::MonThu),
        "fri" | "friday" => Some(DayType::Fri),
        "sat" | "saturday" => Some(DayType::Sat),
        "sun" | "sunday" | "holiday" => Some(DayType::Sun),
        _ => None,
    }
}

fn parse_season(s: &str) -> Option<Season> {
    let s = s.trim();
    if let Ok(code) = s.parse::<u8>() {
        return Season::from_code(code);
    }
    match s.to_ascii_lowercase().as_str() {
        "spring" => Some(Season::Spring),
        "summer" => Some(Season::Summer),
        "autumn" | "fall" => Some(Season::Autumn),
        "winter" => Some(Season::Winter),
        _ => None,
    }
}

fn season_name(s: Season) -> &'static str {
    match s {
        Season::Spring => "spring",
        Season::Summer => "summer",
        Season::Autumn => "autumn",
        Season::Winter => "winter",
    }
}

fn parse_row(rec: &StringRecord, cols: &Columns, opts: &LoadOptions) -> Result<RawRow, String> {
    let field = |i: usize, name: &str| -> Result<&str, String> {
        match rec.get(i).map(str::trim) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(format!("empty {name}")),
        }
    };
    let number = |i: usize, name: &str| -> Result<f64, String> {
        let v = field(i, name)?;
        v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("unparsable {name} {v:?}"))
    };

    let energy = number(cols.energy, "energy_kwh")?;
    if energy < 0.0 {
        return Err(format!("negative energy_kwh {energy}"));
    }
    let timestamp = {
        let raw = field(cols.timestamp, "timestamp")?;
        parse_timestamp(raw, &opts.timezone).ok_or_else(|| format!("unparsable timestamp {raw:?}"))?
    };
    if ensure_aligned(timestamp).is_err() {
        return Err(format!("timestamp {timestamp} not on a whole hour"));
    }
    let overcast = {
        let raw = field(cols.overcast, "overcast_oktas")?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.fract() == 0.0 && (0.0..=8.0).contains(v))
            .map(|v| v as u8)
            .ok_or_else(|| format!("overcast_oktas {raw:?} not an integer in 0..=8"))?
    };
    let day_type = {
        let raw = field(cols.day_type, "day_type")?;
        parse_day_type(raw).ok_or_else(|| format!("unknown day_type {raw:?}"))?
    };
    let season = {
        let raw = field(cols.season, "season")?;
        parse_season(raw).ok_or_else(|| format!("unknown season {raw:?}"))?
    };
    let day_length = match cols.day_length.and_then(|i| rec.get(i)).map(str::trim) {
        Some(v) if !v.is_empty() => v.parse::<f64>().map_err(|_| format!("unparsable day_length_h {v:?}"))?,
        _ => day_length(timestamp.date(), opts.latitude),
    };
    let weather = WeatherRecord {
        temperature: number(cols.temperature, "temperature_c")?,
        wind_speed: number(cols.wind, "wind_speed_ms")?,
        humidity: number(cols.humidity, "humidity_pct")?,
        overcast,
        day_type,
        season,
        day_length,
    };
    weather.validate().map_err(|e| e.to_string())?;
    let counter_id = field(cols.counter_id, "counter_id")?.to_string();
    Ok(RawRow { timestamp, counter_id, energy_kwh: energy, weather })
}

/// Read a counter/weather CSV.
///
/// Malformed rows are collected in [`RawDataset::rejects`]; a counter whose
/// timestamps are not strictly increasing aborts the load.
pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<RawDataset> {
    let file = File::open(path.as_ref())?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(file);
    let header = reader.headers()?.clone();
    let cols = Columns::resolve(&header, &opts.mapping)?;

    let mut ds = RawDataset::default();
    let mut last_seen: std::collections::HashMap<String, NaiveDateTime> = Default::default();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        match parse_row(&rec, &cols, opts) {
            Ok(row) => {
                if let Some(prev) = last_seen.get(&row.counter_id) {
                    if row.timestamp <= *prev {
                        return Err(Error::Ordering { counter: row.counter_id, line });
                    }
                }
                last_seen.insert(row.counter_id.clone(), row.timestamp);
                ds.counters.insert(row.counter_id.clone());
                ds.rows.push(row);
            }
            Err(reason) => ds.rejects.push(Reject { line, reason }),
        }
    }
    Ok(ds)
}

/// Write rows in the default column layout.
pub fn write_csv(ds: &RawDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    let m = ColumnMapping::default();
    w.write_record([
        &m.timestamp,
        &m.counter_id,
        &m.energy_kwh,
        &m.temperature_c,
        &m.wind_speed_ms,
        &m.humidity_pct,
        &m.overcast_oktas,
        &m.day_type,
        &m.season,
        &m.day_length_h,
    ])?;
    for r in &ds.rows {
        let wr = &r.weather;
        w.write_record([
            r.timestamp.format(TIMESTAMP_FORMAT).to_string(),
            r.counter_id.clone(),
            r.energy_kwh.to_string(),
            wr.temperature.to_string(),
            wr.wind_speed.to_string(),
            wr.humidity.to_string(),
            wr.overcast.to_string(),
            wr.day_type.code().to_string(),
            season_name(wr.season).to_string(),
            wr.day_length.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rejects as `line_number,reason`.
pub fn write_rejects(rejects: &[Reject], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["line_number", "reason"])?;
    for r in rejects {
        w.write_record([r.line.to_string(), r.reason.clone()])?;
    }
    w.flush()?;
    let mut inner = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    inner.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "timestamp,counter_id,energy_kwh,temperature_c,wind_speed_ms,humidity_pct,overcast_oktas,day_type,season,day_length_h";

    fn write(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{HEADER}").unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_well_formed_rows() {
        let f = write(
            "2019-01-07T00:00:00,1,10.5,-2,4,80,5,1,winter,7.9\n\
             2019-01-07T01:00:00,1,11,-2.5,3,81,6,1,winter,7.9\n\
             2019-01-07T02:00:00,1,9.5,-3,2,82,8,1,winter,\n",
        );
        let ds = load_csv(f.path(), &LoadOptions::default()).unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.rejects.is_empty());
        let dl = ds.rows[2].weather.day_length;
        assert!(dl > 7.0 && dl < 8.5, "computed day length {dl}");
    }

    #[test]
    fn empty_energy_goes_to_rejects() {
        let f = write(
            "2019-01-07T00:00:00,1,10.5,-2,4,80,5,1,winter,7.9\n\
             2019-01-07T01:00:00,1,,-2.5,3,81,6,1,winter,7.9\n\
             2019-01-07T02:00:00,1,9.5,-3,2,82,9,1,winter,7.9\n\
             2019-01-07T03:00:00,1,9.5,-3,2,82,1,1,winter,7.9\n",
        );
        let ds = load_csv(f.path(), &LoadOptions::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.rejects.len(), 2);
        assert_eq!(ds.rejects[0].line, 3);
        assert!(ds.rejects[0].reason.contains("energy"));
        assert!(ds.rejects[1].reason.contains("overcast"));
    }

    #[test]
    fn out_of_order_timestamps_fail() {
        let f = write(
            "2019-01-07T01:00:00,1,10.5,-2,4,80,5,1,winter,7.9\n\
             2019-01-07T01:00:00,2,10.5,-2,4,80,5,1,winter,7.9\n\
             2019-01-07T00:00:00,1,11,-2.5,3,81,6,1,winter,7.9\n",
        );
        let err = load_csv(f.path(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Ordering { ref counter, line: 4 } if counter == "1"));
    }

    #[test]
    fn unmappable_header_fails() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "time,counter,energy").unwrap();
        assert!(matches!(load_csv(f.path(), &LoadOptions::default()), Err(Error::Config(_))));
        assert!(matches!(load_csv("/nonexistent/file.csv", &LoadOptions::default()), Err(Error::Io(_))));
    }

    #[test]
    fn custom_mapping_and_offsets() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "T,when,id,kwh,wind,hum,oc,dt,season").unwrap();
        writeln!(f, "1.5,2019-01-07T00:00:00+01:00,a,3,1,50,2,sun,4").unwrap();
        let mapping = ColumnMapping {
            timestamp: "when".into(),
            counter_id: "id".into(),
            energy_kwh: "kwh".into(),
            temperature_c: "T".into(),
            wind_speed_ms: "wind".into(),
            humidity_pct: "hum".into(),
            overcast_oktas: "oc".into(),
            day_type: "dt".into(),
            season: "season".into(),
            day_length_h: "dl".into(),
        };
        let opts = LoadOptions { mapping, ..Default::default() };
        let ds = load_csv(f.path(), &opts).unwrap();
        assert_eq!(ds.rows[0].timestamp.format(TIMESTAMP_FORMAT).to_string(), "2019-01-06T23:00:00");
        assert_eq!(ds.rows[0].weather.day_type, DayType::Sun);
        assert_eq!(ds.rows[0].weather.season, Season::Winter);
    }
}
