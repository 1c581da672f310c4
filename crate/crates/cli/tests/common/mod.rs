#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel).to_string_lossy().into_owned()
}

pub fn golden(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden").join(rel)
}

pub fn dmtl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmtl")).args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn weather_data() -> Vec<String> {
    [
        "--csv", &fixture("weather/weather.csv"),
        "--ingest", &fixture("weather/ingest.json"),
        "--metadata", &fixture("weather/metadata.csv"),
        "--metadata-config", &fixture("weather/metadata.json"),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

pub fn siemens_data() -> Vec<String> {
    [
        "--csv", &fixture("siemens/sensor.csv"),
        "--ingest", &fixture("siemens/ingest.json"),
        "--metadata", &fixture("siemens/turbines.csv"),
        "--metadata-config", &fixture("siemens/metadata.json"),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// `answer` through the library; returns exit code and output.
pub fn answer(program: &str, data: &[String], query: &str, extra: &[&str]) -> (i32, String) {
    let mut args: Vec<String> = vec!["answer".into(), "--program".into(), fixture(program)];
    args.extend(data.iter().cloned());
    args.extend(extra.iter().map(|s| s.to_string()));
    args.push(query.into());
    dmtl_cli::run_args(args).expect("answer runs")
}

/// `rewrite-sql --execute` on an in-memory database.
pub fn answer_sql(program: &str, mappings: &str, loads: &[String], query: &str, variant: &str) -> (i32, String) {
    let mut args: Vec<String> = vec![
        "rewrite-sql".into(),
        "--coalesce".into(),
        variant.into(),
        "--program".into(),
        fixture(program),
        "--mappings".into(),
        fixture(mappings),
        "--execute".into(),
        "sqlite::memory:".into(),
    ];
    for l in loads {
        args.push("--load".into());
        args.push(l.clone());
    }
    args.push(query.into());
    dmtl_cli::run_args(args).expect("rewrite runs")
}

pub fn weather_loads() -> Vec<String> {
    vec![
        format!("Weather={}:dateTime", fixture("weather/weather.csv")),
        format!("Metadata={}", fixture("weather/metadata.csv")),
    ]
}

pub fn siemens_loads() -> Vec<String> {
    vec![
        format!("TB_Sensor={}:dateTime", fixture("siemens/sensor.csv")),
        format!("TB_Turbine={}", fixture("siemens/turbines.csv")),
    ]
}
