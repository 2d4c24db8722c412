use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn heatcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatcast"))
        .args(args)
        .env_remove("HEATCAST_TZ")
        .env_remove("HEATCAST_LATITUDE")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Six weeks of noiseless synthetic data starting 2016-01-01.
fn dataset(dir: &TempDir) -> std::path::PathBuf {
    let path = dir.path().join("data.csv");
    let out = heatcast(&["gen", "--seed", "4", "--hours", "1008", "--counters", "2", "--out", s(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

const TRAIN: &str = "2016-01-01T00:00/2016-01-28T23:00";
const TEST: &str = "2016-01-29T00:00/2016-02-08T23:00";

#[test]
fn gen_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let paths: Vec<_> = ["a", "b", "c"].iter().map(|n| dir.path().join(n)).collect();
    for (p, seed) in paths.iter().zip(["1", "1", "2"]) {
        let out = heatcast(&["gen", "--seed", seed, "--hours", "200", "--sigma", "3", "--out", s(p)]);
        assert_eq!(code(&out), 0);
        assert!(out.stdout.is_empty());
    }
    let read = |p: &Path| fs::read(p).unwrap();
    assert_eq!(read(&paths[0]), read(&paths[1]));
    assert_ne!(read(&paths[0]), read(&paths[2]));
    // Header plus 200 hours for three counters and the sum.
    assert_eq!(String::from_utf8(read(&paths[0])).unwrap().lines().count(), 1 + 200 * 4);
}

#[test]
fn gen_reads_a_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("synth.conf");
    fs::write(&cfg, "counters = 1\nhours = 48\n").unwrap();
    let out_path = dir.path().join("d.csv");
    let out = heatcast(&["gen", "--seed", "1", "--config", s(&cfg), "--hours", "24", "--out", s(&out_path)]);
    assert_eq!(code(&out), 0);
    // The flag wins over the file; one counter plus the sum.
    assert_eq!(fs::read_to_string(&out_path).unwrap().lines().count(), 1 + 24 * 2);
    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(code(&heatcast(&["gen", "--seed", "1", "--config", s(&cfg), "--out", s(&out_path)])), 1);
}

#[test]
fn fit_then_forecast_gives_72_values() {
    let dir = TempDir::new().unwrap();
    let data = dataset(&dir);
    let model = dir.path().join("m.json");
    let out = heatcast(&[
        "fit",
        "--algo",
        "DPLW",
        "--counter",
        "1",
        "--data",
        s(&data),
        "--train",
        TRAIN,
        "--out",
        s(&model),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let forecast = dir.path().join("f.csv");
    let out = heatcast(&[
        "forecast",
        "--model",
        s(&model),
        "--data",
        s(&data),
        "--origin",
        "2016-02-01T06:00",
        "--out",
        s(&forecast),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&forecast).unwrap();
    let fields: Vec<&str> = text.trim_end().split(',').collect();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(fields.len(), 73);
    assert!(fields[0].starts_with("2016-02-01T06:00"));
    assert!(fields[1..].iter().all(|v| v.parse::<f64>().is_ok_and(|x| x >= 0.0)));
}

#[test]
fn neural_fit_writes_a_training_curve() {
    let dir = TempDir::new().unwrap();
    let data = dataset(&dir);
    let (model, curve) = (dir.path().join("n.json"), dir.path().join("curve.csv"));
    let out = heatcast(&[
        "fit",
        "--algo",
        "RBFNN",
        "--counter",
        "sum",
        "--data",
        s(&data),
        "--train",
        TRAIN,
        "--out",
        s(&model),
        "--curve",
        s(&curve),
        "--max-epochs",
        "3",
        "--seed",
        "5",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&curve).unwrap();
    assert_eq!(text.lines().next(), Some("epoch,train_mse,val_mse"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn validation_failures_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let data = dataset(&dir);
    let m = dir.path().join("m.json");
    let fit = |algo: &str, counter: &str, data: &str, train: &str| {
        code(&heatcast(&[
            "fit",
            "--algo",
            algo,
            "--counter",
            counter,
            "--data",
            data,
            "--train",
            train,
            "--out",
            s(&m),
        ]))
    };
    assert_eq!(fit("NOPE", "1", s(&data), TRAIN), 1);
    assert_eq!(fit("DLW", "9", s(&data), TRAIN), 1);
    assert_eq!(fit("DLW", "1", "/no/such/file.csv", TRAIN), 1);
    assert_eq!(fit("DLW", "1", s(&data), "2016-01-05T00:00/2016-01-01T00:00"), 1);
    assert_eq!(fit("DLW", "1", s(&data), "2016-01-01T00:30/2016-01-05T00:00"), 1);
    assert_eq!(code(&heatcast(&["fit", "--algo", "DLW"])), 1);
    assert_eq!(code(&heatcast(&["frobnicate"])), 1);

    fs::write(&m, r#"{"format":"something-else","version":1}"#).unwrap();
    let f = dir.path().join("f.csv");
    let out =
        heatcast(&["forecast", "--model", s(&m), "--data", s(&data), "--origin", "2016-02-01T00:00", "--out", s(&f)]);
    assert_eq!(code(&out), 1);
    assert!(!f.exists());
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let data = dataset(&dir);
    let m = dir.path().join("m.json");
    // Three days is far below the two weeks a Dotzauer fit needs.
    let out = heatcast(&[
        "fit",
        "--algo",
        "DLW",
        "--counter",
        "1",
        "--data",
        s(&data),
        "--train",
        "2016-01-01T00:00/2016-01-03T23:00",
        "--out",
        s(&m),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn help_and_version_exit_with_zero() {
    assert_eq!(code(&heatcast(&["--help"])), 0);
    assert_eq!(code(&heatcast(&["--version"])), 0);
    assert_eq!(code(&heatcast(&["bench", "--help"])), 0);
}

#[test]
fn bench_report_and_pareto_agree() {
    let dir = TempDir::new().unwrap();
    let data = dataset(&dir);
    let (report, plot, front) = (dir.path().join("r.json"), dir.path().join("p.csv"), dir.path().join("front.txt"));
    let out = heatcast(&[
        "bench",
        "--algos",
        "DLW,DPLW,WRNH0,C100",
        "--data",
        s(&data),
        "--train",
        TRAIN,
        "--test",
        TEST,
        "--report",
        s(&report),
        "--plot",
        s(&plot),
        "--jobs",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["scorecards"].as_array().unwrap().len(), 4 * 3);
    assert_eq!(fs::read_to_string(&plot).unwrap().lines().count(), 1 + 4);

    let out = heatcast(&["pareto", "--report", s(&report), "--time", "train", "--quality", "mape", "--out", s(&front)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let listed: Vec<String> = fs::read_to_string(&front).unwrap().lines().map(String::from).collect();
    let stored = json["nondominated"]
        .as_array()
        .unwrap()
        .iter()
        .find(|set| set["time"] == "train" && set["quality"] == "mape")
        .expect("report stores the train/mape set");
    let stored: Vec<String> =
        stored["algorithms"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect();
    assert!(!listed.is_empty());
    assert_eq!(listed, stored);
    assert!(!String::from_utf8_lossy(&out.stderr).contains("differs"));

    assert_eq!(code(&heatcast(&["pareto", "--report", s(&report), "--time", "wall", "--quality", "mape"])), 1);
}

#[test]
fn clean_writes_valid_readings_and_rejects() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("raw.csv");
    fs::write(
        &data,
        "timestamp,counter_id,energy_kwh,temperature_c,wind_speed_ms,humidity_pct,overcast_oktas,day_type,season,day_length_h\n\
         2019-01-07T00:00:00,a,5,1,3,80,4,1,winter,8\n\
         2019-01-07T01:00:00,a,0,1,3,80,4,1,winter,8\n\
         2019-01-07T02:00:00,a,7,1,3,0,4,1,winter,8\n\
         2019-01-07T03:00:00,a,not-a-number,1,3,80,4,1,winter,8\n\
         2019-01-07T04:00:00,a,6,1,3,80,4,1,winter,8\n",
    )
    .unwrap();
    let (out_path, rejects) = (dir.path().join("clean.csv"), dir.path().join("rejects.csv"));
    let out = heatcast(&["clean", "--data", s(&data), "--out", s(&out_path), "--rejects", s(&rejects)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let kept: Vec<String> = fs::read_to_string(&out_path).unwrap().lines().skip(1).map(String::from).collect();
    // The zero at 01:00 loses its right neighbour once 02:00 (no humidity)
    // is dropped, so only 00:00 and 04:00 remain.
    assert_eq!(kept.len(), 2, "{kept:?}");
    assert!(kept[0].starts_with("2019-01-07T00:00:00,a,5"));
    assert!(kept[1].starts_with("2019-01-07T04:00:00,a,6"));
    let rejected: Vec<String> = fs::read_to_string(&rejects).unwrap().lines().skip(1).map(String::from).collect();
    assert_eq!(rejected.len(), 1);
    assert!(rejected[0].starts_with("5,") && rejected[0].contains("not-a-number"));
}
