use chrono::{NaiveDate, NaiveDateTime};

use super::*;
use crate::ingest::{clean, generate_synthetic, RawDataset, RawRow, SynthConfig};
use crate::models::ForecastContext;
use crate::series::{DayType, ForecastWindow, Season, WeatherRecord};

fn ts(y: i32, m: u32, d: u32, h: u32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(h, 0, 0).unwrap()
}

#[test]
fn winter_test_interval_has_1320_origins() {
    let test: Interval = "2019-01-02T00:00/2019-02-25T23:00".parse().unwrap();
    let grid = EvalGrid::new(ts(2016, 1, 1, 0), ts(2019, 3, 31, 23), test, BENCH_WARMUP);
    assert_eq!(grid.len(), 1320);
    // Data stopping at the interval end leaves no room for the last horizon.
    let short = EvalGrid::new(ts(2016, 1, 1, 0), ts(2019, 2, 25, 23), test, BENCH_WARMUP);
    assert_eq!(short.len(), 1320 - 72);
    // Data starting at the interval start leaves no warm-up for the first week.
    let late = EvalGrid::new(ts(2019, 1, 2, 0), ts(2019, 3, 31, 23), test, BENCH_WARMUP);
    assert_eq!(late.len(), 1320 - 167);
}

/// Returns the recorded readings, a perfect forecaster.
struct Oracle {
    start: NaiveDateTime,
    values: Vec<f64>,
}

impl Forecaster for Oracle {
    fn warmup(&self) -> usize {
        0
    }

    fn predict(&self, ctx: &ForecastContext<'_>) -> crate::Result<ForecastWindow> {
        let i = crate::calendar::hours_between(self.start, ctx.origin) as usize;
        ForecastWindow::new(ctx.origin, self.values[i + 1..=i + 72].to_vec())
    }
}

#[test]
fn perfect_predictor_scores_zero() {
    let cfg = SynthConfig { counters: 2, hours: 24 * 30, ..Default::default() };
    let ds = clean(&generate_synthetic(&cfg, 5).unwrap());
    let view = CounterView::new(&ds, "2").unwrap();
    let oracle = Oracle { start: ds.start(), values: view.values.to_vec() };
    let all: Vec<usize> = (0..view.len() - 72).collect();
    let origins = scorable_origins(&view, &all, BENCH_WARMUP);
    assert_eq!(origins.first(), Some(&167));
    let s = score_forecaster(&oracle, &view, &origins, MIN_TIMING_CALLS).unwrap();
    assert_eq!(s.errors.mape().unwrap().value, 0.0);
    assert_eq!(s.errors.mse().unwrap().value, 0.0);
    assert_eq!(s.errors.scored, origins.len() * 72);
    assert!(s.call_times.len() >= MIN_TIMING_CALLS);
}

fn constant_dataset(hours: usize, value: f64) -> CleanDataset {
    let w = WeatherRecord {
        temperature: 3.0,
        wind_speed: 2.0,
        humidity: 80.0,
        overcast: 5,
        day_type: DayType::MonThu,
        season: Season::Winter,
        day_length: 8.0,
    };
    let rows = (0..hours)
        .map(|k| RawRow {
            timestamp: crate::calendar::add_hours(ts(2018, 1, 1, 0), k as i64),
            counter_id: "c".into(),
            energy_kwh: value,
            weather: w,
        })
        .collect();
    clean(&RawDataset::from_rows(rows))
}

#[test]
fn c100_on_constant_data_is_exact() {
    let ds = constant_dataset(24 * 40, 7.0);
    let cfg = BenchConfig::new(
        vec![Algorithm::C100],
        "2018-01-01T00:00/2018-01-20T23:00".parse().unwrap(),
        "2018-01-28T00:00/2018-02-02T23:00".parse().unwrap(),
    );
    let r = evaluate(&ds, &cfg).unwrap();
    assert_eq!(r.scorecards.len(), 1);
    assert_eq!(r.scorecards[0].mape, Some(0.0));
    assert_eq!(r.scorecards[0].mse, Some(0.0));
    assert!(r.scorecards[0].predict_time_us.unwrap() > 0.0);
}

fn small_bench(algorithms: Vec<Algorithm>, counters: Option<Vec<String>>) -> BenchReport {
    let cfg = SynthConfig { counters: 2, hours: 24 * 7 * 8, sigma: 3.0, ..Default::default() };
    let ds = clean(&generate_synthetic(&cfg, 9).unwrap());
    let mut b = BenchConfig::new(
        algorithms,
        "2016-01-01T00:00/2016-02-07T23:00".parse().unwrap(),
        "2016-02-08T00:00/2016-02-15T23:00".parse().unwrap(),
    );
    b.counters = counters;
    b.jobs = 2;
    evaluate(&ds, &b).unwrap()
}

#[test]
fn report_has_a_card_per_pair_and_a_fair_mask() {
    let algos: Vec<Algorithm> = Algorithm::parse_list("DPLW,WRWH0,C100").unwrap();
    let r = small_bench(algos, None);
    assert_eq!(r.scorecards.len(), 3 * 3);
    assert_eq!(r.grid_origins, 192);
    for counter in ["1", "2", "sum"] {
        let cells: Vec<usize> = r.scorecards.iter().filter(|c| c.counter == counter).map(|c| c.scored_cells).collect();
        assert!(cells.iter().all(|&c| c == cells[0] && c > 0), "{counter}: {cells:?}");
    }
    assert_eq!(r.summaries.len(), 3);
    assert_eq!(r.nondominated.len(), 4);
    for set in &r.nondominated {
        assert!(!set.algorithms.is_empty());
        assert_eq!(r.pareto(set.time, set.quality), set.algorithms);
    }
    let back = BenchReport::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.csv");
    r.write_plot_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("algorithm,counters,failures,train_time_s_q1"));
}

#[test]
fn scores_do_not_depend_on_evaluation_order() {
    let a = small_bench(Algorithm::parse_list("DLW,WRNH1,C100").unwrap(), None);
    let b =
        small_bench(Algorithm::parse_list("C100,WRNH1,DLW").unwrap(), Some(vec!["sum".into(), "2".into(), "1".into()]));
    for card in &a.scorecards {
        let other = b.scorecards.iter().find(|c| c.algorithm == card.algorithm && c.counter == card.counter).unwrap();
        assert_eq!((card.mape, card.mse, card.scored_cells), (other.mape, other.mse, other.scored_cells));
    }
}

#[test]
fn fit_failures_give_null_cards() {
    let ds = constant_dataset(24 * 20, 5.0);
    let cfg = BenchConfig::new(
        Algorithm::parse_list("DLW,C100").unwrap(),
        "2018-01-01T00:00/2018-01-10T23:00".parse().unwrap(),
        "2018-01-14T00:00/2018-01-16T23:00".parse().unwrap(),
    );
    let r = evaluate(&ds, &cfg).unwrap();
    let dlw = &r.scorecards[0];
    assert!(dlw.mape.is_none() && dlw.train_time_s.is_none());
    assert!(dlw.error.as_deref().unwrap().contains("insufficient"));
    assert!(r.scorecards[1].is_ok());
    assert_eq!(r.failures, 1);
    assert_eq!(r.summaries[0].failures, 1);
    assert!(r.summaries[0].mape.is_none());
    let json = r.to_json().unwrap();
    assert!(json.contains("\"mape\": null"));
}

#[test]
fn short_test_interval_is_rejected() {
    let ds = constant_dataset(24 * 20, 5.0);
    let cfg = BenchConfig::new(
        vec![Algorithm::C100],
        "2018-01-01T00:00/2018-01-10T23:00".parse().unwrap(),
        "2018-01-14T00:00/2018-01-15T12:00".parse().unwrap(),
    );
    assert!(matches!(evaluate(&ds, &cfg), Err(Error::Interval(_))));
}
