use std::f64::consts::PI;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::calendar::{add_hours, day_length, ensure_aligned, hour_of_week, HOURS_PER_WEEK};
use crate::error::{Error, Result};
use crate::ingest::{RawDataset, RawRow, SUM_COUNTER};
use crate::regress::PiecewiseLinear;
use crate::series::{DayType, Season, WeatherRecord};

/// Synthetic dataset shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Individual counters; a `sum` counter is added on top.
    pub counters: usize,
    pub hours: usize,
    /// Standard deviation of the additive Gaussian energy noise, kWh.
    pub sigma: f64,
    pub latitude: f64,
    pub start: NaiveDateTime,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            counters: 3,
            hours: 2 * 8784,
            sigma: 0.0,
            latitude: 52.7,
            start: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.counters == 0 {
            return Err(Error::Config("counters must be at least 1".into()));
        }
        if self.hours == 0 {
            return Err(Error::Config("hours must be at least 1".into()));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::Config(format!("latitude {} outside [-90, 90]", self.latitude)));
        }
        ensure_aligned(self.start)
    }

    /// Overlay `key=value` lines (`counters`, `hours`, `sigma`, `latitude`,
    /// `start`) onto `self`. Blank lines and `#` comments are ignored.
    pub fn apply_kv(mut self, text: &str) -> Result<Self> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key=value", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |what: &str| Error::Config(format!("line {}: invalid {what} {v:?}", no + 1));
            match k {
                "counters" => self.counters = v.parse().map_err(|_| bad(k))?,
                "hours" => self.hours = v.parse().map_err(|_| bad(k))?,
                "sigma" => self.sigma = v.parse().map_err(|_| bad(k))?,
                "latitude" => self.latitude = v.parse().map_err(|_| bad(k))?,
                "start" => {
                    let utc = chrono::FixedOffset::east_opt(0).unwrap();
                    self.start = super::csv_io::parse_timestamp(v, &utc).ok_or_else(|| bad(k))?
                }
                _ => return Err(Error::Config(format!("line {}: unknown key {k:?}", no + 1))),
            }
        }
        Ok(self)
    }
}

/// The noiseless model the generator draws energy from:
/// `scale(counter) * (f(T) + g(hour_of_week))`.
#[derive(Debug, Clone)]
pub struct SynthTruth {
    temperature: PiecewiseLinear<f64>,
    social: [f64; HOURS_PER_WEEK],
}

impl Default for SynthTruth {
    fn default() -> Self {
        // A large base load under a mildly convex heating curve: slopes
        // -6.5, -6.1, -5.7, -5.3, -4.9 kWh/degC between breakpoints.
        let temperature = PiecewiseLinear::new(vec![-5.0, 2.0, 9.0, 16.0], 250.0, -6.5, vec![0.4; 4])
            .expect("static breakpoints are increasing");
        let mut social = [0.0; HOURS_PER_WEEK];
        for (how, g) in social.iter_mut().enumerate() {
            let hod = (how % 24) as f64;
            let day = how / 24;
            let daily = 8.0 * (2.0 * PI * (hod - 3.0) / 24.0).sin() + 3.0 * (4.0 * PI * (hod - 6.0) / 24.0).cos();
            let weekend = if day >= 5 {
                -4.0
            } else if day == 4 {
                -1.5
            } else {
                0.0
            };
            *g = daily + weekend;
        }
        let mean = social.iter().sum::<f64>() / HOURS_PER_WEEK as f64;
        social.iter_mut().for_each(|g| *g -= mean);
        Self { temperature, social }
    }
}

impl SynthTruth {
    pub fn temperature_component(&self) -> &PiecewiseLinear<f64> {
        &self.temperature
    }

    pub fn social_component(&self) -> &[f64; HOURS_PER_WEEK] {
        &self.social
    }

    /// Multiplier of counter `k` (0-based); the sum counter uses the total.
    pub fn counter_scale(k: usize) -> f64 {
        1.0 + 0.25 * k as f64
    }

    pub fn unit_value(&self, ts: NaiveDateTime, temperature: f64) -> f64 {
        let how = hour_of_week(ts).expect("generator timestamps are aligned");
        self.temperature.evaluate(temperature) + self.social[how]
    }

    /// Noiseless reading of counter `id` (`"1"`, `"2"`, ... or `"sum"`).
    pub fn expected(&self, id: &str, counters: usize, ts: NaiveDateTime, temperature: f64) -> Option<f64> {
        let scale = if id == SUM_COUNTER {
            (0..counters).map(Self::counter_scale).sum()
        } else {
            let k: usize = id.parse().ok()?;
            if k == 0 || k > counters {
                return None;
            }
            Self::counter_scale(k - 1)
        };
        Some(scale * self.unit_value(ts, temperature))
    }
}

/// Deterministic synthetic counters and weather.
///
/// Temperature follows a yearly and a daily sinusoid plus a slowly varying
/// AR(1) anomaly; counter `k` reads `scale_k * (f(T) + g(how)) + noise`
/// (clamped at zero), and `sum` is the total of the individual counters.
pub fn generate_synthetic(cfg: &SynthConfig, seed: u64) -> Result<RawDataset> {
    cfg.validate()?;
    let truth = SynthTruth::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut anomaly = 0.0;
    let mut rows = Vec::with_capacity(cfg.hours * (cfg.counters + 1));

    for h in 0..cfg.hours {
        let ts = add_hours(cfg.start, h as i64);
        let date = ts.date();
        let doy = date.ordinal0() as f64;
        let hod = ts.hour() as f64;
        anomaly = 0.98 * anomaly + 0.5 * noise.sample(&mut rng);
        let temperature = (8.5 - 11.0 * (2.0 * PI * (doy - 20.0) / 365.25).cos()
            + 4.0 * (2.0 * PI * (hod - 9.0) / 24.0).sin()
            + anomaly)
            .clamp(-35.0, 40.0);
        let wind_speed = (4.0 + 2.5 * noise.sample(&mut rng)).abs();
        let humidity =
            (75.0 - 15.0 * (2.0 * PI * (hod - 9.0) / 24.0).sin() + 5.0 * noise.sample(&mut rng)).clamp(5.0, 100.0);
        let weather = WeatherRecord {
            temperature,
            wind_speed,
            humidity,
            overcast: rng.random_range(0..=8u8),
            day_type: DayType::of_date(date),
            season: Season::of_date(date),
            day_length: day_length(date, cfg.latitude),
        };

        let base = truth.unit_value(ts, temperature);
        let mut total = 0.0;
        for k in 0..cfg.counters {
            let eps = if cfg.sigma > 0.0 { cfg.sigma * noise.sample(&mut rng) } else { 0.0 };
            let energy = (SynthTruth::counter_scale(k) * base + eps).max(0.0);
            total += energy;
            rows.push(RawRow { timestamp: ts, counter_id: (k + 1).to_string(), energy_kwh: energy, weather });
        }
        rows.push(RawRow { timestamp: ts, counter_id: SUM_COUNTER.to_string(), energy_kwh: total, weather });
    }
    Ok(RawDataset::from_rows(rows))
}
