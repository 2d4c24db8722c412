//! `heatcast`: generate, clean, fit, forecast and benchmark from the shell.
//!
//! Exit status is 0 on success, 1 when flags or inputs fail validation and
//! 2 when the work itself fails. Progress goes to stderr; every machine
//! readable result goes to the file named by the command's output flag.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{FixedOffset, NaiveDateTime};
use clap::{Args, Parser, Subcommand};

use heatcast::bench::{evaluate_with_progress, BenchConfig, BenchReport, QualityAxis, TimeAxis};
use heatcast::ingest::{
    clean, generate_synthetic, load_csv, parse_timestamp, write_csv, write_rejects, CleanDataset, Interval,
    LoadOptions, SynthConfig,
};
use heatcast::models::{
    read_model, write_model, Algorithm, CounterView, FitOptions, Forecaster, ModelFile, TrainedModel,
};
use heatcast::neural::{write_training_curve, TrainConfig};
use heatcast::Error;

#[derive(Parser)]
#[command(name = "heatcast", version, about = "District-heating demand forecasting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset with a known ground truth.
    Gen(GenArgs),
    /// Apply the cleaning rules and write the valid readings.
    Clean(CleanArgs),
    /// Fit one algorithm on one counter.
    Fit(FitArgs),
    /// Issue one 72-hour forecast from a fitted model.
    Forecast(ForecastArgs),
    /// Rolling-origin benchmark of several algorithms over all counters.
    Bench(BenchArgs),
    /// Nondominated algorithms of a benchmark report.
    Pareto(ParetoArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    hours: Option<usize>,
    /// Individual counters; a `sum` counter is always added.
    #[arg(long)]
    counters: Option<usize>,
    /// Noise standard deviation in kWh.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, env = "HEATCAST_LATITUDE")]
    latitude: Option<f64>,
    /// First hour, ISO-8601.
    #[arg(long)]
    start: Option<String>,
    /// `key=value` generator settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    /// Counter/weather CSV.
    #[arg(long)]
    data: PathBuf,
    /// Fixed UTC offset of the dataset's wall clock, e.g. `+01:00`.
    #[arg(long, env = "HEATCAST_TZ", default_value = "+00:00")]
    tz: String,
    /// Site latitude for day lengths missing from the data.
    #[arg(long, env = "HEATCAST_LATITUDE", default_value_t = 52.7)]
    latitude: f64,
}

#[derive(Args)]
struct CleanArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
    /// Where to write rows rejected while parsing.
    #[arg(long)]
    rejects: Option<PathBuf>,
}

#[derive(Args)]
struct NeuralArgs {
    /// Seed for network initialization, shuffling and dropout.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    max_epochs: usize,
}

impl NeuralArgs {
    fn options(&self) -> FitOptions {
        FitOptions { neural: TrainConfig { seed: self.seed, max_epochs: self.max_epochs, ..TrainConfig::default() } }
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    algo: String,
    #[arg(long)]
    counter: String,
    #[command(flatten)]
    data: DataArgs,
    /// Training interval, `start/end`.
    #[arg(long)]
    train: String,
    #[arg(long)]
    out: PathBuf,
    /// Training-curve CSV for the network algorithms.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[command(flatten)]
    neural: NeuralArgs,
}

#[derive(Args)]
struct ForecastArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Forecast origin; the forecast covers the following 72 hours.
    #[arg(long)]
    origin: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated algorithm names, or `all`.
    #[arg(long)]
    algos: String,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    train: String,
    #[arg(long)]
    test: String,
    #[arg(long)]
    report: PathBuf,
    /// Per-algorithm quartile CSV for plotting.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Comma-separated counters; all when omitted.
    #[arg(long)]
    counters: Option<String>,
    /// Worker threads, one counter at a time each.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Minimum timed prediction calls per algorithm and counter.
    #[arg(long, default_value_t = heatcast::bench::MIN_TIMING_CALLS)]
    timing_calls: usize,
    #[command(flatten)]
    neural: NeuralArgs,
}

#[derive(Args)]
struct ParetoArgs {
    #[arg(long)]
    report: PathBuf,
    /// `train` or `predict`.
    #[arg(long)]
    time: String,
    /// `mape` or `mse`.
    #[arg(long)]
    quality: String,
    /// File for the nondominated algorithms, one per line.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Interval(_) | Error::Alignment(_) | Error::Ordering { .. } | Error::Format(_) => {
                Failure::Validation(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn invalid(flag: &str, msg: impl fmt::Display) -> Failure {
    Failure::Validation(format!("--{flag}: {msg}"))
}

fn runtime(what: &str, e: impl fmt::Display) -> Failure {
    Failure::Runtime(format!("{what}: {e}"))
}

fn require_file(flag: &str, path: &Path) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(invalid(flag, format!("{} is not a readable file", path.display())))
    }
}

fn parse_tz(s: &str) -> Outcome<FixedOffset> {
    match s.trim() {
        "UTC" | "utc" | "Z" => Ok(FixedOffset::east_opt(0).unwrap()),
        other => other.parse().map_err(|_| invalid("tz", format!("{s:?} is not a fixed offset like +01:00"))),
    }
}

fn parse_interval(flag: &str, s: &str) -> Outcome<Interval> {
    s.parse().map_err(|e| invalid(flag, e))
}

fn parse_algorithms(s: &str) -> Outcome<Vec<Algorithm>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Algorithm::all());
    }
    Algorithm::parse_list(s).map_err(|e| invalid("algos", e))
}

impl DataArgs {
    fn options(&self) -> Outcome<LoadOptions> {
        require_file("data", &self.data)?;
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(invalid("latitude", format!("{} outside [-90, 90]", self.latitude)));
        }
        Ok(LoadOptions { latitude: self.latitude, timezone: parse_tz(&self.tz)?, ..LoadOptions::default() })
    }

    fn load(&self, opts: &LoadOptions) -> Outcome<CleanDataset> {
        let raw = load_csv(&self.data, opts)?;
        if !raw.rejects.is_empty() {
            eprintln!("{}: {} malformed rows rejected", self.data.display(), raw.rejects.len());
        }
        let ds = clean(&raw);
        eprintln!("{}: {} hours, {} counters", self.data.display(), ds.len(), ds.counters().len());
        Ok(ds)
    }
}

fn gen(args: GenArgs) -> Outcome {
    let mut cfg = SynthConfig::default();
    if let Some(path) = &args.config {
        require_file("config", path)?;
        let text = fs::read_to_string(path).map_err(|e| runtime("reading config", e))?;
        cfg = cfg.apply_kv(&text).map_err(|e| invalid("config", e))?;
    }
    if let Some(v) = args.hours {
        cfg.hours = v;
    }
    if let Some(v) = args.counters {
        cfg.counters = v;
    }
    if let Some(v) = args.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = args.latitude {
        cfg.latitude = v;
    }
    if let Some(s) = &args.start {
        cfg.start = parse_timestamp(s, &FixedOffset::east_opt(0).unwrap())
            .ok_or_else(|| invalid("start", format!("unparsable timestamp {s:?}")))?;
    }
    cfg.validate()?;
    let raw = generate_synthetic(&cfg, args.seed)?;
    write_csv(&raw, &args.out)?;
    eprintln!("wrote {} rows for {} counters to {}", raw.len(), raw.counters.len(), args.out.display());
    Ok(())
}

fn clean_cmd(args: CleanArgs) -> Outcome {
    let opts = args.data.options()?;
    let raw = load_csv(&args.data.data, &opts)?;
    if let Some(path) = &args.rejects {
        write_rejects(&raw.rejects, path)?;
    }
    let ds = clean(&raw);
    for c in ds.counters() {
        eprintln!("counter {}: {} of {} hours valid", c.id(), c.valid_count(), ds.len());
    }
    write_csv(&ds.to_raw(), &args.out)?;
    eprintln!("{} rejected rows; cleaned data written to {}", raw.rejects.len(), args.out.display());
    Ok(())
}

fn fit(args: FitArgs) -> Outcome {
    let algo: Algorithm = args.algo.parse().map_err(|e| invalid("algo", e))?;
    let train = parse_interval("train", &args.train)?;
    let opts = args.data.options()?;
    let ds = args.data.load(&opts)?;
    if ds.counter(&args.counter).is_none() {
        return Err(invalid("counter", format!("dataset has no counter {:?}", args.counter)));
    }
    let train_ds = ds.slice(train.start, train.end);
    let view = CounterView::new(&train_ds, &args.counter)?;
    eprintln!("fitting {algo} on counter {} ({} valid hours)", args.counter, view.valid_count());
    let model = algo.fit(&view, &args.neural.options())?;
    if let Some(path) = &args.curve {
        match &model {
            TrainedModel::Neural(n) => write_training_curve(&n.curve, path)?,
            _ => eprintln!("--curve ignored: {algo} is not a network"),
        }
    }
    write_model(&ModelFile::new(algo, args.counter.clone(), model), &args.out)?;
    eprintln!("model written to {}", args.out.display());
    Ok(())
}

fn forecast(args: ForecastArgs) -> Outcome {
    require_file("model", &args.model)?;
    let opts = args.data.options()?;
    let origin: NaiveDateTime = parse_timestamp(&args.origin, &opts.timezone)
        .ok_or_else(|| invalid("origin", format!("unparsable timestamp {:?}", args.origin)))?;
    let file = read_model(&args.model).map_err(|e| invalid("model", e))?;
    let ds = args.data.load(&opts)?;
    let view = CounterView::new(&ds, &file.counter_id).map_err(|e| invalid("data", e))?;
    let idx = ds.index_of(origin).ok_or_else(|| invalid("origin", format!("{origin} is outside the data")))?;
    let window = file.model.predict(&view.context(idx)?)?;
    let mut row = vec![origin.format(heatcast::ingest::TIMESTAMP_FORMAT).to_string()];
    row.extend(window.values().iter().map(|v| v.to_string()));
    let mut out = fs::File::create(&args.out).map_err(|e| runtime("creating output", e))?;
    writeln!(out, "{}", row.join(",")).map_err(|e| runtime("writing output", e))?;
    eprintln!(
        "{} forecast for counter {} from {origin} written to {}",
        file.algorithm,
        file.counter_id,
        args.out.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Outcome {
    let algorithms = parse_algorithms(&args.algos)?;
    let train = parse_interval("train", &args.train)?;
    let test = parse_interval("test", &args.test)?;
    if train.end >= test.start {
        return Err(invalid("test", "the test interval must start after the training interval ends"));
    }
    if args.jobs == 0 {
        return Err(invalid("jobs", "must be at least 1"));
    }
    let opts = args.data.options()?;
    let ds = args.data.load(&opts)?;
    let mut cfg = BenchConfig::new(algorithms, train, test);
    if let Some(list) = &args.counters {
        let ids: Vec<String> = list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if let Some(bad) = ids.iter().find(|id| ds.counter(id).is_none()) {
            return Err(invalid("counters", format!("dataset has no counter {bad:?}")));
        }
        cfg.counters = Some(ids);
    }
    cfg.jobs = args.jobs;
    cfg.timing_calls = args.timing_calls;
    cfg.fit = args.neural.options();
    let report = evaluate_with_progress(&ds, &cfg, &|card| match (&card.error, card.mape) {
        (None, Some(m)) => eprintln!("{:>6} counter {:<8} MAPE {m:8.3}%", card.algorithm, card.counter),
        (Some(e), _) => eprintln!("{:>6} counter {:<8} failed: {e}", card.algorithm, card.counter),
        _ => {}
    })?;
    report.write_json(&args.report)?;
    if let Some(path) = &args.plot {
        report.write_plot_csv(path)?;
    }
    eprintln!(
        "{} scorecards over {} origins ({} failed); report written to {}",
        report.scorecards.len(),
        report.grid_origins,
        report.failures,
        args.report.display()
    );
    Ok(())
}

fn pareto(args: ParetoArgs) -> Outcome {
    let time: TimeAxis = args.time.parse().map_err(|e| invalid("time", e))?;
    let quality: QualityAxis = args.quality.parse().map_err(|e| invalid("quality", e))?;
    require_file("report", &args.report)?;
    let report = BenchReport::read_json(&args.report).map_err(|e| invalid("report", e))?;
    let set = report.pareto(time, quality);
    if let Some(embedded) = report.embedded_set(time, quality) {
        if embedded != set.as_slice() {
            eprintln!("warning: report's stored set differs from the recomputed one");
        }
    }
    eprintln!("nondominated ({time} time, {quality}): {}", set.join(", "));
    if let Some(path) = &args.out {
        let mut text = set.join("\n");
        text.push('\n');
        fs::write(path, text).map_err(|e| runtime("writing output", e))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Clean(a) => clean_cmd(a),
        Command::Fit(a) => fit(a),
        Command::Forecast(a) => forecast(a),
        Command::Bench(a) => bench(a),
        Command::Pareto(a) => pareto(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
