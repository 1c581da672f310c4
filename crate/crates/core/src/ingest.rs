//! Threshold mappings from timestamped CSV logs to temporal tables.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{TemporalTable, Tuple};
use crate::language::{Constant, DataInstance, Fact};
use crate::temporal::{parse_decimal, Interval, TimePoint};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("config: {0}")]
    Config(String),
    #[error("line {line}: timestamp {time} does not increase on partition {partition}")]
    NonMonotone { line: u64, time: String, partition: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparator {
    fn holds(self, v: &BigRational, t: &BigRational) -> bool {
        match self {
            Comparator::Lt => v < t,
            Comparator::Le => v <= t,
            Comparator::Gt => v > t,
            Comparator::Ge => v >= t,
        }
    }
}

/// Which measurement governs the interval between two consecutive readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// The value at `t_i` holds on `[t_i, t_{i+1})`.
    #[default]
    CarryForward,
    /// The value at `t_{i+1}` holds on `(t_i, t_{i+1}]`.
    CarryBack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullPolicy {
    /// A missing value emits no fact for that interval.
    #[default]
    Skip,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub column: String,
    pub comparator: Comparator,
    /// Exact decimal, e.g. `"1.5"` or `"0.15"`.
    pub threshold: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub predicate: String,
    #[serde(flatten)]
    pub condition: Condition,
    /// Further conditions that must hold on the same row.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub and: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub timestamp: String,
    #[serde(default)]
    pub partition: Vec<String>,
    pub rules: Vec<ThresholdRule>,
    #[serde(default)]
    pub convention: Convention,
    #[serde(default)]
    pub nulls: NullPolicy,
    /// Rows are already in time order per partition; out-of-order rows are errors.
    #[serde(default)]
    pub presorted: bool,
}

impl IngestConfig {
    pub fn from_json(text: &str) -> Result<IngestConfig, IngestError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataPredicate {
    pub predicate: String,
    pub columns: Vec<String>,
}

/// Atemporal facts read from a lookup table; each holds on `(−∞,∞)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataConfig {
    pub predicates: Vec<MetadataPredicate>,
}

impl MetadataConfig {
    pub fn from_json(text: &str) -> Result<MetadataConfig, IngestError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Parses a decimal such as `-1.25` into an exact rational.
pub fn parse_value(s: &str) -> Option<BigRational> {
    let (n, d) = parse_decimal(s.trim())?;
    Some(BigRational::new(n, d))
}

/// `YYYY-MM-DD HH:MM[:SS]` (also with `T` or `;` between date and time) as
/// seconds since 1970-01-01, or anything `TimePoint::parse` accepts.
pub fn parse_timestamp(s: &str) -> Option<TimePoint> {
    let s = s.trim();
    if s.len() >= 10 && s.as_bytes().get(4) == Some(&b'-') {
        let (date, rest) = s.split_at(10);
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d").ok()?;
        let days = (date - NaiveDate::from_ymd_opt(1970, 1, 1)?).num_days();
        let rest = rest.trim_start_matches([' ', 'T', ';']);
        let clock = if rest.is_empty() { TimePoint::zero() } else { TimePoint::parse(rest).ok()? };
        if !rest.is_empty() && !rest.contains(':') {
            return None;
        }
        return TimePoint::int(days * 86400).checked_add(&clock).ok();
    }
    match TimePoint::parse(s) {
        Ok(t) if t.is_finite() => Some(t),
        _ => None,
    }
}

fn is_null(s: &str) -> bool {
    let s = s.trim();
    s.is_empty() || s.eq_ignore_ascii_case("null") || s.eq_ignore_ascii_case("na")
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, IngestError> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| IngestError::MissingColumn(name.to_string()))
}

struct Compiled {
    predicate: String,
    tests: Vec<(usize, Comparator, BigRational)>,
}

/// One reading: time, CSV line and the per-rule verdict (`None` on nulls).
struct Reading {
    time: TimePoint,
    line: u64,
    verdicts: Vec<Option<bool>>,
}

/// Reads a sensor log and emits one table per predicate, attributes being the
/// partition columns. Tables are sorted by tuple and then in time order.
pub fn ingest_csv(path: &Path, config: &IngestConfig) -> Result<BTreeMap<String, TemporalTable>, IngestError> {
    ingest_reader(std::fs::File::open(path)?, config)
}

pub fn ingest_reader<R: Read>(input: R, config: &IngestConfig) -> Result<BTreeMap<String, TemporalTable>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(input);
    let headers = rdr.headers()?.clone();
    let ts = column(&headers, &config.timestamp)?;
    let keys: Vec<usize> = config.partition.iter().map(|c| column(&headers, c)).collect::<Result<_, _>>()?;
    let mut rules = Vec::new();
    for r in &config.rules {
        let mut tests = Vec::new();
        for c in std::iter::once(&r.condition).chain(&r.and) {
            let t = parse_value(&c.threshold)
                .ok_or_else(|| IngestError::Config(format!("{}: bad threshold `{}`", r.predicate, c.threshold)))?;
            tests.push((column(&headers, &c.column)?, c.comparator, t));
        }
        rules.push(Compiled { predicate: r.predicate.clone(), tests });
    }

    let mut parts: BTreeMap<Vec<String>, Vec<Reading>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |m: String| IngestError::Row { line, message: m };
        let raw = rec.get(ts).unwrap_or("");
        let time = parse_timestamp(raw).ok_or_else(|| bad(format!("bad timestamp `{raw}`")))?;
        let key: Vec<String> = keys.iter().map(|&k| rec.get(k).unwrap_or("").trim().to_string()).collect();
        let mut verdicts = Vec::with_capacity(rules.len());
        for r in &rules {
            let mut v = Some(true);
            for (col, cmp, t) in &r.tests {
                let cell = rec.get(*col).unwrap_or("");
                if is_null(cell) {
                    if config.nulls == NullPolicy::Error {
                        return Err(bad(format!("null in column `{}`", &headers[*col])));
                    }
                    v = None;
                    break;
                }
                let x = parse_value(cell).ok_or_else(|| bad(format!("bad value `{cell}` in column `{}`", &headers[*col])))?;
                if !cmp.holds(&x, t) {
                    v = v.map(|_| false);
                }
            }
            verdicts.push(v);
        }
        let readings = parts.entry(key.clone()).or_default();
        if config.presorted {
            if let Some(prev) = readings.last() {
                if prev.time >= time {
                    return Err(IngestError::NonMonotone { line, time: raw.to_string(), partition: key.join(",") });
                }
            }
        }
        readings.push(Reading { time, line, verdicts });
    }

    let per_part: Vec<Result<Vec<Vec<Interval>>, IngestError>> = parts
        .par_iter_mut()
        .map(|(key, readings)| {
            if !config.presorted {
                readings.sort_by(|a, b| a.time.cmp(&b.time).then(a.line.cmp(&b.line)));
            }
            pair(key, readings, rules.len(), config.convention)
        })
        .collect();

    let attrs = config.partition.clone();
    let mut rows: Vec<Vec<(Tuple, Interval)>> = vec![Vec::new(); rules.len()];
    for ((key, _), ivs) in parts.iter().zip(per_part) {
        let tuple: Tuple = key.iter().map(|k| Constant::new(k)).collect();
        for (r, ivs) in ivs?.into_iter().enumerate() {
            rows[r].extend(ivs.into_iter().map(|iv| (tuple.clone(), iv)));
        }
    }
    let mut out: BTreeMap<String, TemporalTable> = BTreeMap::new();
    for (r, rows) in rules.iter().zip(rows) {
        match out.remove(&r.predicate) {
            // several rules for one predicate: merge and re-sort
            Some(prev) => {
                let mut all = prev.into_rows();
                all.extend(rows);
                out.insert(r.predicate.clone(), TemporalTable::from_unsorted(attrs.clone(), all).expect("width"));
            }
            None => {
                out.insert(r.predicate.clone(), TemporalTable::from_rows(attrs.clone(), rows).expect("width"));
            }
        }
    }
    Ok(out)
}

fn pair(key: &[String], readings: &[Reading], nrules: usize, conv: Convention) -> Result<Vec<Vec<Interval>>, IngestError> {
    let mut out = vec![Vec::new(); nrules];
    for w in readings.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.time == b.time {
            return Err(IngestError::NonMonotone { line: b.line, time: b.time.to_string(), partition: key.join(",") });
        }
        let (iv, gov) = match conv {
            Convention::CarryForward => (Interval::new(a.time.clone(), true, b.time.clone(), false), a),
            Convention::CarryBack => (Interval::new(a.time.clone(), false, b.time.clone(), true), b),
        };
        let iv = iv.expect("increasing readings");
        for (r, v) in gov.verdicts.iter().enumerate() {
            if *v == Some(true) {
                out[r].push(iv.clone());
            }
        }
    }
    Ok(out)
}

/// Reads a lookup table into `(−∞,∞)` facts, one table per configured predicate.
pub fn ingest_metadata_csv(path: &Path, config: &MetadataConfig) -> Result<BTreeMap<String, TemporalTable>, IngestError> {
    ingest_metadata_reader(std::fs::File::open(path)?, config)
}

pub fn ingest_metadata_reader<R: Read>(
    input: R,
    config: &MetadataConfig,
) -> Result<BTreeMap<String, TemporalTable>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut cols = Vec::new();
    for p in &config.predicates {
        let c: Vec<usize> = p.columns.iter().map(|c| column(&headers, c)).collect::<Result<_, _>>()?;
        cols.push(c);
    }
    let mut sets: Vec<BTreeSet<Vec<String>>> = vec![BTreeSet::new(); cols.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        for (set, cs) in sets.iter_mut().zip(&cols) {
            let vals: Vec<String> = cs.iter().map(|&c| rec.get(c).unwrap_or("").trim().to_string()).collect();
            if let Some(i) = vals.iter().position(|v| is_null(v)) {
                return Err(IngestError::Row { line, message: format!("null in column `{}`", &headers[cs[i]]) });
            }
            set.insert(vals);
        }
    }
    let mut out = BTreeMap::new();
    for (p, set) in config.predicates.iter().zip(sets) {
        let rows: Vec<(Tuple, Interval)> = set
            .into_iter()
            .map(|vals| (vals.iter().map(|v| Constant::new(v)).collect(), Interval::everything()))
            .collect();
        let t = TemporalTable::from_unsorted(p.columns.clone(), rows).expect("width");
        match out.remove(&p.predicate) {
            Some(prev) => {
                let merged = crate::engine::union_tables(&prev, &t)
                    .map_err(|e| IngestError::Config(format!("{}: {e}", p.predicate)))?;
                let mut rows = merged.into_rows();
                rows.dedup();
                out.insert(p.predicate.clone(), TemporalTable::from_rows(p.columns.clone(), rows).expect("width"));
            }
            None => {
                out.insert(p.predicate.clone(), t);
            }
        }
    }
    Ok(out)
}

/// Facts of the given tables, predicates in name order.
pub fn tables_to_data(tables: &BTreeMap<String, TemporalTable>) -> DataInstance {
    let mut facts = Vec::new();
    for (pred, t) in tables {
        for (tuple, iv) in t.rows() {
            facts.push(Fact::new(pred, tuple.clone(), iv.clone()));
        }
    }
    DataInstance::new(facts)
}

/// Distance between the least and greatest finite endpoints.
pub fn data_span(data: &DataInstance) -> TimePoint {
    let pts = data.numbers();
    match (pts.iter().min(), pts.iter().max()) {
        (Some(a), Some(b)) => b.checked_sub(a).expect("finite"),
        _ => TimePoint::zero(),
    }
}

/// `k` copies of `data`, copy `j` shifted by `j·period`. Facts over the whole
/// line are copied unchanged.
pub fn replicate(data: &DataInstance, k: usize, period: &TimePoint) -> Result<DataInstance, IngestError> {
    if k == 0 {
        return Err(IngestError::Config("replication factor must be positive".into()));
    }
    if !period.is_finite() {
        return Err(IngestError::Config("period must be finite".into()));
    }
    let span = data_span(data);
    if k > 1 && *period < span {
        return Err(IngestError::Config(format!("period {period} is shorter than the data span {span}")));
    }
    let mut facts = Vec::with_capacity(data.facts.len() * k);
    for j in 0..k {
        let by = match period.finite() {
            Some(d) => TimePoint::Finite(d.mul_int(&BigInt::from(j))),
            None => unreachable!(),
        };
        facts.extend(data.facts.iter().map(|f| Fact::new(&f.pred, f.args.clone(), f.interval.shift(&by))));
    }
    Ok(DataInstance::new(facts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn siemens() -> IngestConfig {
        IngestConfig::from_json(
            r#"{"timestamp":"dateTime","partition":["turbineId"],
                "rules":[{"predicate":"ActivePowerAbove15","column":"activePower","comparator":">","threshold":"1.5"}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn carry_forward_pairs_with_the_next_reading() {
        let csv = "turbineId,dateTime,activePower\ntb0,12:20:48,2\ntb0,12:20:49,1.8\ntb0,12:20:52,1.7\n";
        let t = ingest_reader(csv.as_bytes(), &siemens()).unwrap();
        let rows: Vec<String> =
            t["ActivePowerAbove15"].rows().iter().map(|(c, iv)| format!("{}@{}", c[0], iv.display_with(crate::TimeFormat::Clock))).collect();
        assert_eq!(rows, vec!["tb0@[12:20:48,12:20:49)", "tb0@[12:20:49,12:20:52)"]);
    }

    #[test]
    fn carry_back_uses_the_arriving_value() {
        let cfg = IngestConfig::from_json(
            r#"{"timestamp":"time","partition":["station"],"convention":"carry-back",
                "rules":[{"predicate":"NorthWind","column":"windDir","comparator":"<=","threshold":"22.5"}]}"#,
        )
        .unwrap();
        let csv = "station,time,windDir\nKBVY,15:14,300\nKBVY,15:24,10\n";
        let t = ingest_reader(csv.as_bytes(), &cfg).unwrap();
        let (c, iv) = &t["NorthWind"].rows()[0];
        assert_eq!(c[0].as_str(), "KBVY");
        assert_eq!(iv.display_with(crate::TimeFormat::Clock), "(15:14:00,15:24:00]");
    }

    #[test]
    fn single_reading_gives_nothing() {
        let t = ingest_reader("turbineId,dateTime,activePower\ntb0,0,2\n".as_bytes(), &siemens()).unwrap();
        assert!(t["ActivePowerAbove15"].is_empty());
    }

    #[test]
    fn errors_carry_lines() {
        let e = ingest_reader("turbineId,dateTime,activePower\ntb0,0,2\ntb0,x,2\n".as_bytes(), &siemens()).unwrap_err();
        assert!(e.to_string().starts_with("line 3:"), "{e}");
        let e = ingest_reader("turbineId,dateTime,activePower\ntb0,0,2\ntb0,0,3\n".as_bytes(), &siemens()).unwrap_err();
        assert!(matches!(e, IngestError::NonMonotone { .. }));
        let e = ingest_reader("turbineId,time,activePower\n".as_bytes(), &siemens()).unwrap_err();
        assert!(matches!(e, IngestError::MissingColumn(c) if c == "dateTime"));
        let mut cfg = siemens();
        cfg.presorted = true;
        let e = ingest_reader("turbineId,dateTime,activePower\ntb0,5,2\ntb0,1,2\n".as_bytes(), &cfg).unwrap_err();
        assert!(matches!(e, IngestError::NonMonotone { line: 3, .. }));
        cfg.nulls = NullPolicy::Error;
        cfg.presorted = false;
        let e = ingest_reader("turbineId,dateTime,activePower\ntb0,5,\ntb0,6,2\n".as_bytes(), &cfg).unwrap_err();
        assert!(e.to_string().contains("null"));
    }

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("1970-01-02 00:00:01"), Some(TimePoint::int(86401)));
        assert_eq!(parse_timestamp("2013-02-15;15:14"), parse_timestamp("2013-02-15 15:14:00"));
        assert_eq!(parse_timestamp("12.5"), Some(TimePoint::dyadic(25, 1)));
        assert_eq!(parse_timestamp("12:00:00"), Some(TimePoint::int(43200)));
        assert_eq!(parse_timestamp("2013-02-15 junk"), None);
        assert_eq!(parse_timestamp("inf"), None);
    }

    #[test]
    fn metadata_is_eternal_and_deduplicated() {
        let cfg = MetadataConfig::from_json(
            r#"{"predicates":[{"predicate":"LocatedInCounty","columns":["station","county"]},
                              {"predicate":"LocatedInState","columns":["station","state"]}]}"#,
        )
        .unwrap();
        let csv = "station,county,state\nKBVY,Essex,MA\nKBVY,Essex,MA\nKMNI,Clarendon,SC\n";
        let t = ingest_metadata_reader(csv.as_bytes(), &cfg).unwrap();
        let d = tables_to_data(&t);
        assert_eq!(d.facts.len(), 4);
        assert_eq!(d.facts[0].to_string(), "LocatedInCounty(KBVY,Essex)@(-inf,inf)");
        let empty = ingest_metadata_reader("station,county,state\n".as_bytes(), &cfg).unwrap();
        assert!(empty.values().all(|t| t.is_empty()));
    }

    #[test]
    fn replicate_shifts_copies() {
        let d = crate::parse_data(
            "Turbine(tb0)@(-inf,inf).\nAbove15(tb0)@[13:00:00,13:00:15).\nBelow015(tb0)@[13:00:17,13:01:25).",
        )
        .unwrap();
        assert_eq!(replicate(&d, 1, &TimePoint::int(86400)).unwrap(), d);
        let r = replicate(&d, 2, &TimePoint::int(86400)).unwrap();
        assert_eq!(r.facts.len(), 6);
        assert_eq!(r.facts[4].interval.to_string(), "[133200,133215)");
        assert!(replicate(&d, 2, &TimePoint::int(60)).is_err());
    }
}
