//! Running generated SQL plans on SQLite.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use dmtl_core::ingest::parse_timestamp;
use dmtl_core::sqlgen::{row_interval, sql_time, time_from_sql, SqlPlan, SQL_INFINITY};
use dmtl_core::*;
use rusqlite::types::Value;
use rusqlite::Connection;

/// `NAME=PATH[:timecolumn]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadSpec {
    pub table: String,
    pub path: PathBuf,
    /// Column holding timestamps, stored as seconds.
    pub time_column: Option<String>,
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !s.starts_with(|c: char| c.is_ascii_digit())
}

impl FromStr for LoadSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<LoadSpec, String> {
        let (table, rest) = s.split_once('=').ok_or_else(|| format!("expected NAME=PATH[:timecolumn], got `{s}`"))?;
        if !is_identifier(table) {
            return Err(format!("bad table name `{table}`"));
        }
        let (path, time_column) = match rest.rsplit_once(':') {
            Some((p, c)) if is_identifier(c) && !std::path::Path::new(rest).exists() => (p, Some(c.to_string())),
            _ => (rest, None),
        };
        Ok(LoadSpec { table: table.to_string(), path: PathBuf::from(path), time_column })
    }
}

/// Opens `sqlite::memory:` or `sqlite:PATH`.
pub fn open(conn: &str) -> Result<Connection> {
    match conn.strip_prefix("sqlite:") {
        Some(":memory:") | Some("") => Ok(Connection::open_in_memory()?),
        Some(path) => Connection::open(path).with_context(|| format!("opening {path}")),
        None => bail!("unsupported connection string `{conn}` (expected sqlite:PATH or sqlite::memory:)"),
    }
}

fn cell(text: &str) -> Value {
    let t = text.trim();
    if t.is_empty() {
        Value::Null
    } else if let Ok(i) = t.parse::<i64>() {
        Value::Integer(i)
    } else if let Ok(f) = t.parse::<f64>() {
        Value::Real(f)
    } else {
        Value::Text(t.to_string())
    }
}

/// Creates the table from the CSV header and inserts every row; returns the
/// row count.
pub fn load_csv(db: &Connection, spec: &LoadSpec) -> Result<usize> {
    let mut rdr = csv::Reader::from_path(&spec.path).with_context(|| format!("reading {}", spec.path.display()))?;
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let time_idx = match &spec.time_column {
        Some(c) => Some(headers.iter().position(|h| h == c).ok_or_else(|| anyhow!("no column `{c}` in {}", spec.path.display()))?),
        None => None,
    };
    let cols: Vec<String> = headers.iter().map(|h| format!("\"{}\"", h.replace('"', "\"\""))).collect();
    db.execute_batch(&format!("DROP TABLE IF EXISTS \"{0}\"; CREATE TABLE \"{0}\" ({1});", spec.table, cols.join(", ")))?;
    let placeholders = vec!["?"; cols.len()].join(", ");
    let tx = db.unchecked_transaction()?;
    let mut n = 0;
    {
        let mut stmt = tx.prepare(&format!("INSERT INTO \"{}\" VALUES ({placeholders})", spec.table))?;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut vals: Vec<Value> = rec.iter().map(cell).collect();
            if let Some(k) = time_idx {
                let raw = rec.get(k).unwrap_or("");
                let t = parse_timestamp(raw)
                    .ok_or_else(|| anyhow!("{}:{}: bad timestamp `{raw}`", spec.path.display(), i + 2))?;
                vals[k] = cell(&sql_time(&t));
            }
            stmt.execute(rusqlite::params_from_iter(vals))?;
            n += 1;
        }
    }
    tx.commit()?;
    Ok(n)
}

/// An SQL time value as a time point; reals are dyadic, so exactly so.
fn sql_point(v: &Value) -> Result<TimePoint> {
    match v {
        Value::Integer(i) => time_from_sql(&i.to_string()).ok_or_else(|| anyhow!("bad time value {i}")),
        Value::Real(f) if f.is_finite() => {
            if f.abs() >= (SQL_INFINITY / 2) as f64 {
                return Ok(if *f > 0.0 { TimePoint::PosInf } else { TimePoint::NegInf });
            }
            let (mut num, mut exp) = (*f, 0u32);
            while num.fract() != 0.0 {
                num *= 2.0;
                exp += 1;
            }
            Ok(TimePoint::dyadic(num as i64, exp))
        }
        other => bail!("bad time value {other:?}"),
    }
}

fn sql_constant(v: &Value) -> Result<Constant> {
    Ok(Constant::new(&match v {
        Value::Text(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Real(f) => f.to_string(),
        other => bail!("bad attribute value {other:?}"),
    }))
}

/// Runs the views and the final query in one transaction; the rows are read
/// back as intervals in the plan's convention.
pub fn execute_plan(db: &Connection, plan: &SqlPlan) -> Result<Vec<(Tuple, Interval)>> {
    let tx = db.unchecked_transaction()?;
    for v in &plan.views {
        tx.execute_batch(&format!("DROP TABLE IF EXISTS temp.{0}; CREATE TEMPORARY TABLE {0} AS\n{1};", v.name, v.sql))
            .with_context(|| format!("creating {}", v.name))?;
    }
    let k = plan.columns.len();
    let mut out = Vec::new();
    {
        let mut stmt = tx.prepare(&plan.final_query)?;
        let mut rows = stmt.query([])?;
        while let Some(row) = rows.next()? {
            let mut tuple = Vec::with_capacity(k);
            for i in 0..k {
                tuple.push(sql_constant(&row.get::<_, Value>(i)?)?);
            }
            let l = sql_point(&row.get::<_, Value>(k)?)?;
            let r = sql_point(&row.get::<_, Value>(k + 1)?)?;
            if let Some(iv) = row_interval(plan.convention, &l, &r) {
                out.push((tuple, iv));
            }
        }
    }
    tx.commit()?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_spec_forms() {
        let s: LoadSpec = "Weather=data/w.csv:dateTime".parse().unwrap();
        assert_eq!(s.table, "Weather");
        assert_eq!(s.path, PathBuf::from("data/w.csv"));
        assert_eq!(s.time_column.as_deref(), Some("dateTime"));
        let s: LoadSpec = "M=m.csv".parse().unwrap();
        assert_eq!(s.time_column, None);
        assert!("1x=m.csv".parse::<LoadSpec>().is_err());
        assert!("m.csv".parse::<LoadSpec>().is_err());
    }

    #[test]
    fn real_times_are_exact() {
        assert_eq!(sql_point(&Value::Real(2.75)).unwrap(), TimePoint::dyadic(11, 2));
        assert_eq!(sql_point(&Value::Integer(SQL_INFINITY)).unwrap(), TimePoint::PosInf);
        assert!(open("postgres://x").is_err());
    }
}
