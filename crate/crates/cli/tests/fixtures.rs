mod common;

use common::*;
use dmtl_cli::bench::{run_scaling, ScalingConfig};
use dmtl_cli::{fixture_health, load_data, load_program, DataArgs};
use std::path::PathBuf;
use std::time::Duration;

fn csv_args(csv: &str, ingest: &str, meta: &str, meta_cfg: &str) -> DataArgs {
    DataArgs {
        facts: vec![],
        csv: Some(fixture(csv).into()),
        ingest: Some(fixture(ingest).into()),
        metadata: Some(fixture(meta).into()),
        metadata_config: Some(fixture(meta_cfg).into()),
    }
}

fn facts_args(path: &str) -> DataArgs {
    DataArgs { facts: vec![PathBuf::from(fixture(path))], ..Default::default() }
}

fn siemens() -> DataArgs {
    csv_args("siemens/sensor.csv", "siemens/ingest.json", "siemens/turbines.csv", "siemens/metadata.json")
}

fn weather() -> DataArgs {
    csv_args("weather/weather.csv", "weather/ingest.json", "weather/metadata.csv", "weather/metadata.json")
}

fn healthy(program: &str, data: DataArgs, mappings: Option<&str>) -> Result<usize, String> {
    let m = mappings.map(|p| PathBuf::from(fixture(p)));
    fixture_health(&PathBuf::from(fixture(program)), &data, m.as_deref()).map_err(|e| format!("{e:#}"))
}

#[test]
fn siemens_fixture_is_healthy() {
    let n = healthy("siemens/ontology.dmtl", siemens(), Some("siemens/mappings.json")).unwrap();
    assert!(n > 0);
}

#[test]
fn weather_fixture_is_healthy() {
    assert!(healthy("weather/ontology.dmtl", weather(), Some("weather/mappings.json")).unwrap() > 0);
    assert!(healthy("weather/heat.dmtl", weather(), Some("weather/mappings.json")).unwrap() > 0);
}

#[test]
fn ballet_fixture_is_healthy() {
    assert!(healthy("ballet/program.dmtl", facts_args("ballet/data.facts"), None).unwrap() > 0);
    let (code, out) = answer("ballet/program.dmtl", &["--data".into(), fixture("ballet/data.facts")], "SupportBending", &[]);
    assert_eq!(code, 0);
    assert_eq!(out, "SupportBending@[0,12]\nSupportBending@[20,25]\n");
}

#[test]
fn hurricane_needs_an_hour_of_hurricane_force_wind() {
    let (code, out) = answer("weather/ontology.dmtl", &weather_data(), "HurricaneAffectedState(s)", &["--time-format", "datetime"]);
    assert_eq!(code, 0);
    // KJFK (NY) blows for 90 minutes; KLGA (NY) for 40 and KCHS (SC) for 30
    assert_eq!(out, "HurricaneAffectedState(NY)@(2013-02-15T14:51:00,2013-02-15T16:21:00]\n");
    let (_, sc) = answer("weather/ontology.dmtl", &weather_data(), "HurricaneAffectedState(SC)", &[]);
    assert_eq!(sc, "");
    let (_, wind) = answer("weather/ontology.dmtl", &weather_data(), "HurricaneForceWind(KCHS)", &[]);
    assert!(!wind.is_empty());
}

#[test]
fn heat_example_forms_agree() {
    let a = answer("weather/ontology.dmtl", &weather_data(), "HeatAffectedCounty(c)", &[]);
    let b = answer("weather/heat.dmtl", &weather_data(), "HeatAffectedCounty(c)", &[]);
    assert_eq!(a, b);
    assert!(a.1.starts_with("HeatAffectedCounty(Maricopa)@"));
}

#[test]
fn scaled_counts_are_proportional_and_deterministic() {
    let p = load_program(&PathBuf::from(fixture("siemens/ontology.dmtl"))).unwrap();
    let d = load_data(&siemens()).unwrap();
    let cfg = ScalingConfig { scales: vec![1, 2, 4], runs: 1, timeout: Duration::from_secs(300) };
    let r = run_scaling(&p, &d, &cfg).unwrap();
    let atemporal = d.facts.iter().filter(|f| !f.interval.lo().is_finite()).count();
    for x in &r {
        assert_eq!(x.interval_count, x.scale * r[0].interval_count);
        // infinite facts coalesce across copies
        assert_eq!(x.derived_count - atemporal, x.scale * (r[0].derived_count - atemporal));
    }
    let again = run_scaling(&p, &d, &ScalingConfig { scales: vec![1], ..cfg }).unwrap();
    assert_eq!((again[0].interval_count, again[0].derived_count), (r[0].interval_count, r[0].derived_count));
}
