//! Rolling-origin evaluation, scoring, timing and nondominated sets.

mod metrics;
mod pareto;
mod report;
mod timing;

pub use metrics::{mape, mse, quartiles, ErrorAccumulator, Metric, Quartiles};
pub use pareto::{nondominated, nondominated_brute_force};
pub use report::{
    pareto_set, summarize, AlgorithmSummary, BenchReport, MachineInfo, ParetoSet, QualityAxis, ScoreCard, TimeAxis,
    REPORT_SCHEMA_VERSION,
};
pub use timing::{median_duration, time_fit, time_predict};

use std::time::{Duration, Instant};

use chrono::NaiveDateTime;
use rayon::prelude::*;

use crate::calendar::add_hours;
use crate::error::{Error, Result};
use crate::ingest::{split, CleanDataset, Interval};
use crate::models::{Algorithm, CounterView, FitOptions, Forecaster};
use crate::series::HORIZON;

/// Trailing history every origin must have, the longest warm-up of any algorithm.
pub const BENCH_WARMUP: usize = 168;
/// Minimum number of timed prediction calls per (algorithm, counter).
pub const MIN_TIMING_CALLS: usize = 100;

/// Forecast origins: the hours of the test interval with enough data before
/// them for the warm-up and after them for the full horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalGrid {
    pub origins: Vec<NaiveDateTime>,
    pub horizon: usize,
}

impl EvalGrid {
    /// `data_end` is the last hour with data.
    pub fn new(data_start: NaiveDateTime, data_end: NaiveDateTime, test: Interval, warmup: usize) -> Self {
        let first = add_hours(data_start, warmup as i64 - 1);
        let last = add_hours(data_end, -(HORIZON as i64));
        let origins =
            (0..test.hours() as i64).map(|h| add_hours(test.start, h)).filter(|t| *t >= first && *t <= last).collect();
        Self { origins, horizon: HORIZON }
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }
}

/// Origins (as indices into `view`) whose trailing `warmup` hours are all valid.
pub fn scorable_origins(view: &CounterView<'_>, origins: &[usize], warmup: usize) -> Vec<usize> {
    origins
        .iter()
        .copied()
        .filter(|&o| o + 1 >= warmup && o + HORIZON < view.len() && view.valid[o + 1 - warmup..=o].iter().all(|v| *v))
        .collect()
}

/// Errors and per-call prediction times of one forecaster on one counter.
#[derive(Debug, Clone)]
pub struct ForecastScore {
    pub errors: ErrorAccumulator,
    pub call_times: Vec<Duration>,
}

/// Forecast from every origin and score cells whose actual reading is valid
/// and positive. Timing cycles over the origins until at least
/// `timing_calls` calls have been measured.
pub fn score_forecaster(
    model: &dyn Forecaster,
    view: &CounterView<'_>,
    origins: &[usize],
    timing_calls: usize,
) -> Result<ForecastScore> {
    if origins.is_empty() {
        return Err(Error::EmptyInput("no forecast origins with a complete warm-up window"));
    }
    let mut errors = ErrorAccumulator::default();
    let mut call_times = Vec::with_capacity(origins.len().max(timing_calls));
    for &o in origins {
        let ctx = view.context(o)?;
        let start = Instant::now();
        let window = model.predict(&ctx)?;
        call_times.push(start.elapsed());
        for (p, pred) in window.values().iter().enumerate() {
            let cell = o + 1 + p;
            if view.valid[cell] {
                errors.push(*pred, view.values[cell]);
            } else {
                errors.skip();
            }
        }
    }
    let mut k = 0;
    while call_times.len() < timing_calls {
        let ctx = view.context(origins[k % origins.len()])?;
        let start = Instant::now();
        std::hint::black_box(model.predict(&ctx)?);
        call_times.push(start.elapsed());
        k += 1;
    }
    Ok(ForecastScore { errors, call_times })
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub train: Interval,
    pub test: Interval,
    /// Counters to evaluate; all counters when `None`.
    pub counters: Option<Vec<String>>,
    /// Worker threads; counters are spread over them.
    pub jobs: usize,
    pub timing_calls: usize,
    pub fit: FitOptions,
}

impl BenchConfig {
    pub fn new(algorithms: Vec<Algorithm>, train: Interval, test: Interval) -> Self {
        Self {
            algorithms,
            train,
            test,
            counters: None,
            jobs: 1,
            timing_calls: MIN_TIMING_CALLS,
            fit: FitOptions::default(),
        }
    }
}

fn run_pair(
    algo: Algorithm,
    train: &CounterView<'_>,
    test: &CounterView<'_>,
    origins: &[usize],
    cfg: &BenchConfig,
) -> (ScoreCard, Vec<Duration>) {
    let name = algo.name();
    let counter = train.counter_id.to_string();
    let (fitted, fit_time) = time_fit(|| algo.fit(train, &cfg.fit));
    let model = match fitted {
        Ok(m) => m,
        Err(e) => return (ScoreCard::failed(name, counter, format!("fit failed: {e}")), Vec::new()),
    };
    let score = match score_forecaster(&model, test, origins, cfg.timing_calls) {
        Ok(s) => s,
        Err(e) => return (ScoreCard::failed(name, counter, format!("forecast failed: {e}")), Vec::new()),
    };
    let (mape, mse) = match (score.errors.mape(), score.errors.mse()) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return (ScoreCard::failed(name, counter, e.to_string()), Vec::new()),
    };
    let mut samples = score.call_times.clone();
    let median = median_duration(&mut samples);
    let card = ScoreCard {
        algorithm: name,
        counter,
        mape: Some(mape.value),
        mse: Some(mse.value),
        train_time_s: Some(fit_time.as_secs_f64()),
        predict_time_us: Some(median.as_secs_f64() * 1e6),
        origins: origins.len(),
        scored_cells: mape.scored,
        excluded_cells: mape.excluded,
        timing_calls: score.call_times.len(),
        error: None,
    };
    (card, score.call_times)
}

/// Fit every algorithm on every counter's training interval and score its
/// forecasts from every origin of the test interval.
pub fn evaluate(ds: &CleanDataset, cfg: &BenchConfig) -> Result<BenchReport> {
    evaluate_with_progress(ds, cfg, &|_| {})
}

/// [`evaluate`], reporting each finished (algorithm, counter) pair.
pub fn evaluate_with_progress(
    ds: &CleanDataset,
    cfg: &BenchConfig,
    progress: &(dyn Fn(&ScoreCard) + Sync),
) -> Result<BenchReport> {
    if cfg.algorithms.is_empty() {
        return Err(Error::Config("no algorithms selected".into()));
    }
    if cfg.test.hours() < HORIZON {
        return Err(Error::Interval(format!("test interval {} is shorter than {HORIZON} hours", cfg.test)));
    }
    let (train_ds, test_view) = split(ds, cfg.train, cfg.test, BENCH_WARMUP)?;
    let test_ds = &test_view.data;
    let Some(data_end) = test_ds.end() else {
        return Err(Error::InsufficientData(format!("no data in the test interval {}", cfg.test)));
    };
    let grid = EvalGrid::new(test_ds.start(), data_end, cfg.test, BENCH_WARMUP);
    if grid.is_empty() {
        return Err(Error::InsufficientData(format!(
            "test interval {} has no origin with {BENCH_WARMUP} hours of history and {HORIZON} hours ahead",
            cfg.test
        )));
    }
    let grid_idx: Vec<usize> =
        grid.origins.iter().map(|t| test_ds.index_of(*t).expect("grid lies inside the test data")).collect();

    let counters: Vec<String> = match &cfg.counters {
        Some(list) => {
            for id in list {
                if ds.counter(id).is_none() {
                    return Err(Error::Config(format!("dataset has no counter {id:?}")));
                }
            }
            list.clone()
        }
        None => ds.counters().iter().map(|c| c.id().to_string()).collect(),
    };

    let run_counter = |id: &String| -> Result<Vec<(ScoreCard, Vec<Duration>)>> {
        let train = CounterView::new(&train_ds, id)?;
        let test = CounterView::new(test_ds, id)?;
        let origins = scorable_origins(&test, &grid_idx, BENCH_WARMUP);
        Ok(cfg
            .algorithms
            .iter()
            .map(|&algo| {
                let out = run_pair(algo, &train, &test, &origins, cfg);
                progress(&out.0);
                out
            })
            .collect())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
    let per_counter: Vec<Vec<(ScoreCard, Vec<Duration>)>> =
        pool.install(|| counters.par_iter().map(run_counter).collect::<Result<_>>())?;

    // Report order: algorithms as configured, then counters as listed.
    let mut cards = Vec::new();
    let mut pooled = Vec::new();
    for (a, algo) in cfg.algorithms.iter().enumerate() {
        let mut samples = Vec::new();
        for runs in &per_counter {
            let (card, times) = &runs[a];
            cards.push(card.clone());
            samples.extend_from_slice(times);
        }
        let pooled_median = (!samples.is_empty()).then(|| median_duration(&mut samples).as_secs_f64() * 1e6);
        pooled.push((algo.name(), pooled_median));
    }
    Ok(BenchReport::assemble(
        MachineInfo::current(),
        cfg.train.to_string(),
        cfg.test.to_string(),
        grid.len(),
        cards,
        &pooled,
    ))
}

#[cfg(test)]
mod tests;
