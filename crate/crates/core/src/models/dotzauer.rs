//! Temperature component plus calendar-indexed social correction.

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::calendar::{add_hours, hour_of_week, hour_of_year, HOURS_PER_LEAP_YEAR, HOURS_PER_WEEK};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::models::{finish_window, CounterView, ForecastContext, Forecaster, SocialMode, TemperatureKind};
use crate::regress::{
    isotonic_fit, ols_fit, piecewise_fit, quantile_breakpoints, spline_fit, CubicSpline, IsotonicFit, LinearModel,
    PiecewiseLinear,
};
use crate::series::{weather_features, FeatureSet, ForecastWindow, WeatherRecord, HORIZON};

/// Temperature segments of the piecewise and spline components.
const SEGMENTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemperatureComponent {
    Linear {
        model: LinearModel<f64>,
    },
    Piecewise {
        model: PiecewiseLinear<f64>,
    },
    Spline {
        model: CubicSpline<f64>,
    },
    Isotonic {
        model: IsotonicFit<f64>,
    },
    /// Linear in the full weather feature vector.
    Multivariate {
        model: LinearModel<f64>,
    },
}

impl TemperatureComponent {
    pub fn fit(kind: TemperatureKind, weather: &[WeatherRecord], y: &[f64]) -> Result<Self> {
        let t: Vec<f64> = weather.iter().map(|w| w.temperature).collect();
        Ok(match kind {
            TemperatureKind::Linear => {
                let x = Matrix::from_vec(t.len(), 1, t)?;
                TemperatureComponent::Linear { model: ols_fit(&x, y)? }
            }
            TemperatureKind::Piecewise => {
                let bp = quantile_breakpoints(&t, SEGMENTS);
                TemperatureComponent::Piecewise { model: piecewise_fit(&t, y, &bp)? }
            }
            TemperatureKind::Spline => {
                let knots = quantile_breakpoints(&t, SEGMENTS);
                TemperatureComponent::Spline { model: spline_fit(&t, y, &knots)? }
            }
            TemperatureKind::Isotonic => TemperatureComponent::Isotonic { model: isotonic_fit(&t, y)? },
            TemperatureKind::Multivariate => {
                let width = FeatureSet::FSM.width();
                let data: Vec<f64> = weather.iter().flat_map(|w| weather_features(w, FeatureSet::FSM)).collect();
                let x = Matrix::from_vec(weather.len(), width, data)?;
                TemperatureComponent::Multivariate { model: ols_fit(&x, y)? }
            }
        })
    }

    pub fn evaluate(&self, w: &WeatherRecord) -> f64 {
        match self {
            TemperatureComponent::Linear { model } => model.predict(&[w.temperature]),
            TemperatureComponent::Piecewise { model } => model.evaluate(w.temperature),
            TemperatureComponent::Spline { model } => model.evaluate(w.temperature),
            TemperatureComponent::Isotonic { model } => model.evaluate(w.temperature),
            TemperatureComponent::Multivariate { model } => model.predict(&weather_features(w, FeatureSet::FSM)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SocialRepr {
    mode: SocialMode,
    corrections: Vec<Option<f64>>,
}

/// Mean residual per hour of week (168 slots) or hour of year (8784 slots).
///
/// Slots without training data hold `None` and borrow the correction of the
/// nearest earlier populated slot, wrapping around the cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SocialRepr", into = "SocialRepr")]
pub struct SocialComponent {
    mode: SocialMode,
    corrections: Vec<Option<f64>>,
    resolved: Vec<f64>,
}

impl From<SocialComponent> for SocialRepr {
    fn from(s: SocialComponent) -> Self {
        SocialRepr { mode: s.mode, corrections: s.corrections }
    }
}

impl TryFrom<SocialRepr> for SocialComponent {
    type Error = Error;

    fn try_from(r: SocialRepr) -> Result<Self> {
        SocialComponent::new(r.mode, r.corrections)
    }
}

impl SocialComponent {
    pub fn slots(mode: SocialMode) -> usize {
        match mode {
            SocialMode::Weekly => HOURS_PER_WEEK,
            SocialMode::Yearly => HOURS_PER_LEAP_YEAR,
        }
    }

    pub fn new(mode: SocialMode, corrections: Vec<Option<f64>>) -> Result<Self> {
        if corrections.len() != Self::slots(mode) {
            return Err(Error::Shape(format!(
                "{mode:?} social component needs {} slots, got {}",
                Self::slots(mode),
                corrections.len()
            )));
        }
        let n = corrections.len();
        let mut resolved = vec![0.0; n];
        if let Some(first) = corrections.iter().position(Option::is_some) {
            let mut current = corrections[first].unwrap();
            for k in 0..n {
                let i = (first + k) % n;
                if let Some(v) = corrections[i] {
                    current = v;
                }
                resolved[i] = current;
            }
        }
        Ok(Self { mode, corrections, resolved })
    }

    pub fn mode(&self) -> SocialMode {
        self.mode
    }

    /// Raw per-slot corrections; `None` marks a slot never seen in training.
    pub fn corrections(&self) -> &[Option<f64>] {
        &self.corrections
    }

    pub fn slot(&self, ts: NaiveDateTime) -> usize {
        match self.mode {
            SocialMode::Weekly => hour_of_week(ts).expect("grid timestamps are aligned"),
            SocialMode::Yearly => hour_of_year(ts).expect("grid timestamps are aligned"),
        }
    }

    pub fn at_slot(&self, slot: usize) -> f64 {
        self.resolved[slot]
    }

    pub fn at(&self, ts: NaiveDateTime) -> f64 {
        self.resolved[self.slot(ts)]
    }

    /// Max minus min over populated slots.
    pub fn range(&self) -> f64 {
        let vals = self.corrections.iter().flatten();
        let max = vals.clone().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.copied().fold(f64::INFINITY, f64::min);
        if max >= min {
            max - min
        } else {
            0.0
        }
    }
}

/// `Y = f(weather) + g(calendar slot)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotzauerModel {
    pub temperature: TemperatureComponent,
    pub social: SocialComponent,
}

impl DotzauerModel {
    /// Model value before clamping.
    pub fn fitted_value(&self, ts: NaiveDateTime, w: &WeatherRecord) -> f64 {
        self.temperature.evaluate(w) + self.social.at(ts)
    }

    /// Squared error of the full model over the valid training hours.
    pub fn training_sse(&self, train: &CounterView<'_>) -> f64 {
        (0..train.len())
            .filter(|&i| train.valid[i])
            .map(|i| (train.values[i] - self.fitted_value(train.timestamp(i), &train.weather[i])).powi(2))
            .sum()
    }

    /// Squared error of the temperature component alone.
    pub fn temperature_sse(&self, train: &CounterView<'_>) -> f64 {
        (0..train.len())
            .filter(|&i| train.valid[i])
            .map(|i| (train.values[i] - self.temperature.evaluate(&train.weather[i])).powi(2))
            .sum()
    }
}

/// Two-stage fit: the temperature component on every valid hour, then the
/// social correction as the mean residual per calendar slot.
pub fn dotzauer_fit(train: &CounterView<'_>, kind: TemperatureKind, mode: SocialMode) -> Result<DotzauerModel> {
    let idx: Vec<usize> = (0..train.len()).filter(|&i| train.valid[i]).collect();
    let needed = 2 * HOURS_PER_WEEK;
    if idx.len() < needed {
        return Err(Error::InsufficientData(format!(
            "counter {} has {} valid training hours, need {needed}",
            train.counter_id,
            idx.len()
        )));
    }
    let weather: Vec<WeatherRecord> = idx.iter().map(|&i| train.weather[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| train.values[i]).collect();
    let temperature = TemperatureComponent::fit(kind, &weather, &y)?;

    let slots = SocialComponent::slots(mode);
    let mut sum = vec![0.0; slots];
    let mut count = vec![0usize; slots];
    for (k, &i) in idx.iter().enumerate() {
        let slot = match mode {
            SocialMode::Weekly => train.week_hour(i),
            SocialMode::Yearly => hour_of_year(train.timestamp(i))?,
        };
        sum[slot] += y[k] - temperature.evaluate(&weather[k]);
        count[slot] += 1;
    }
    let corrections = sum.iter().zip(&count).map(|(&s, &c)| (c > 0).then(|| s / c as f64)).collect();
    Ok(DotzauerModel { temperature, social: SocialComponent::new(mode, corrections)? })
}

/// `f(T) + g(slot)` for each of the 72 hours after `origin`, clamped at zero.
pub fn dotzauer_predict(
    model: &DotzauerModel,
    origin: NaiveDateTime,
    forecast: &[WeatherRecord],
) -> Result<ForecastWindow> {
    if forecast.len() < HORIZON {
        return Err(Error::MissingWeather { needed: HORIZON, available: forecast.len() });
    }
    let values = match model.social.mode() {
        SocialMode::Weekly => {
            let base = hour_of_week(origin)?;
            (1..=HORIZON)
                .map(|p| {
                    model.temperature.evaluate(&forecast[p - 1]) + model.social.at_slot((base + p) % HOURS_PER_WEEK)
                })
                .collect()
        }
        SocialMode::Yearly => {
            (1..=HORIZON).map(|p| model.fitted_value(add_hours(origin, p as i64), &forecast[p - 1])).collect()
        }
    };
    finish_window(origin, values)
}

impl Forecaster for DotzauerModel {
    fn warmup(&self) -> usize {
        0
    }

    fn predict(&self, ctx: &ForecastContext<'_>) -> Result<ForecastWindow> {
        dotzauer_predict(self, ctx.origin, ctx.forecast)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{clean, generate_synthetic, SynthConfig};
    use crate::series::{DayType, Season};
    use chrono::NaiveDate;

    fn monday() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2018, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn rec(t: f64) -> WeatherRecord {
        WeatherRecord {
            temperature: t,
            wind_speed: 2.0,
            humidity: 70.0,
            overcast: 4,
            day_type: DayType::MonThu,
            season: Season::Winter,
            day_length: 8.0,
        }
    }

    fn weekly(values: impl Fn(usize) -> f64) -> SocialComponent {
        SocialComponent::new(SocialMode::Weekly, (0..168).map(|i| Some(values(i))).collect()).unwrap()
    }

    #[test]
    fn linear_component_without_social() {
        let model = DotzauerModel {
            temperature: TemperatureComponent::Linear { model: LinearModel::new(vec![2.0], 1.0) },
            social: weekly(|_| 0.0),
        };
        let w = dotzauer_predict(&model, monday(), &[rec(5.0); 72]).unwrap();
        assert!(w.values().iter().all(|&v| v == 11.0));
    }

    #[test]
    fn social_index_follows_target_hour() {
        let model = DotzauerModel {
            temperature: TemperatureComponent::Linear { model: LinearModel::new(vec![0.0], 0.0) },
            social: weekly(|i| if i == 0 { 3.0 } else { 0.5 }),
        };
        // Sunday 23:00: the first target hour is Monday 00:00.
        let origin = add_hours(monday(), -1);
        let w = dotzauer_predict(&model, origin, &[rec(0.0); 72]).unwrap();
        assert_eq!(w.values()[0], 3.0);
        assert_eq!(w.values()[1], 0.5);
    }

    #[test]
    fn negative_predictions_clamp_to_zero() {
        let model = DotzauerModel {
            temperature: TemperatureComponent::Linear { model: LinearModel::new(vec![0.0], -10.0) },
            social: weekly(|_| 2.0),
        };
        let w = dotzauer_predict(&model, monday(), &[rec(0.0); 72]).unwrap();
        assert!(w.values().iter().all(|&v| v == 0.0));
        assert!(matches!(dotzauer_predict(&model, monday(), &[rec(0.0); 10]), Err(Error::MissingWeather { .. })));
    }

    #[test]
    fn yearly_fallback_uses_previous_slot() {
        let mut corr = vec![None; HOURS_PER_LEAP_YEAR];
        corr[10] = Some(1.0);
        corr[20] = Some(2.0);
        let s = SocialComponent::new(SocialMode::Yearly, corr).unwrap();
        assert_eq!(s.at_slot(15), 1.0);
        assert_eq!(s.at_slot(25), 2.0);
        assert_eq!(s.at_slot(5), 2.0);
        assert!(SocialComponent::new(SocialMode::Weekly, vec![None; 10]).is_err());
    }

    fn synthetic(hours: usize, sigma: f64) -> crate::ingest::CleanDataset {
        let cfg = SynthConfig { counters: 1, hours, sigma, ..Default::default() };
        clean(&generate_synthetic(&cfg, 17).unwrap())
    }

    #[test]
    fn piecewise_weekly_recovers_noiseless_truth() {
        // Temperature is constant within each week, so every hour of week sees
        // the same temperatures and a zero-mean weekly pattern separates
        // exactly from any function of temperature.
        let weeks = 40;
        let n = weeks * 168;
        let weather: Vec<WeatherRecord> =
            (0..n).map(|i| rec(-12.0 + 28.0 * ((i / 168) as f64 * 0.61).sin().abs())).collect();
        let temps: Vec<f64> = weather.iter().map(|w| w.temperature).collect();
        let bp = quantile_breakpoints(&temps, SEGMENTS);
        assert_eq!(bp.len(), 4);
        let f = PiecewiseLinear::new(bp, 120.0, -6.0, vec![2.0, 1.5, 1.0, 1.0]).unwrap();
        let raw: Vec<f64> = (0..168).map(|i| ((i % 24) as f64 * 0.26).sin() * 8.0 + (i / 24) as f64).collect();
        let mean = raw.iter().sum::<f64>() / 168.0;
        let g: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let values: Vec<f64> = (0..n).map(|i| f.evaluate(temps[i]) + g[i % 168]).collect();
        let valid = vec![true; n];
        let view = CounterView { counter_id: "x", start: monday(), values: &values, valid: &valid, weather: &weather };
        let m = dotzauer_fit(&view, TemperatureKind::Piecewise, SocialMode::Weekly).unwrap();
        for i in (0..n).step_by(5) {
            let got = m.fitted_value(view.timestamp(i), &weather[i]);
            assert!((got - values[i]).abs() < 1e-6, "hour {i}: {got} vs {}", values[i]);
        }
        let origin = add_hours(monday(), 1000);
        let w = dotzauer_predict(&m, origin, &weather[1001..1073]).unwrap();
        for (p, v) in w.values().iter().enumerate() {
            assert!((v - values[1001 + p]).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_energy_has_flat_social_part() {
        let ds = synthetic(24 * 30, 0.0);
        let mut view = CounterView::new(&ds, "1").unwrap();
        let flat = vec![42.0; view.len()];
        view.values = &flat;
        for kind in [
            TemperatureKind::Linear,
            TemperatureKind::Piecewise,
            TemperatureKind::Spline,
            TemperatureKind::Isotonic,
            TemperatureKind::Multivariate,
        ] {
            let m = dotzauer_fit(&view, kind, SocialMode::Weekly).unwrap();
            assert!(m.social.corrections().iter().flatten().all(|g| g.abs() < 1e-8), "{kind:?}");
            assert!((m.temperature.evaluate(&view.weather[0]) - 42.0).abs() < 1e-8);
        }
    }

    #[test]
    fn social_range_is_about_a_tenth_of_temperature_range() {
        let ds = synthetic(8784, 5.0);
        let view = CounterView::new(&ds, "1").unwrap();
        let m = dotzauer_fit(&view, TemperatureKind::Piecewise, SocialMode::Weekly).unwrap();
        let temps: Vec<f64> = view.weather.iter().map(|w| w.temperature).collect();
        let f_vals: Vec<f64> = temps.iter().map(|&t| m.temperature.evaluate(&rec(t))).collect();
        let f_range = f_vals.iter().cloned().fold(f64::MIN, f64::max) - f_vals.iter().cloned().fold(f64::MAX, f64::min);
        let ratio = m.social.range() / f_range;
        assert!(ratio > 0.05 && ratio < 0.2, "ratio {ratio}");
    }

    #[test]
    fn too_little_data_fails() {
        let ds = synthetic(300, 0.0);
        let view = CounterView::new(&ds, "1").unwrap();
        assert!(matches!(
            dotzauer_fit(&view, TemperatureKind::Linear, SocialMode::Weekly),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn week_shifted_calendar_gives_same_fit() {
        let ds = synthetic(24 * 60, 2.0);
        let view = CounterView::new(&ds, "1").unwrap();
        let mut shifted = view;
        shifted.start = add_hours(view.start, 168 * 3);
        let a = dotzauer_fit(&view, TemperatureKind::Piecewise, SocialMode::Weekly).unwrap();
        let b = dotzauer_fit(&shifted, TemperatureKind::Piecewise, SocialMode::Weekly).unwrap();
        assert_eq!(a, b);
    }
}
