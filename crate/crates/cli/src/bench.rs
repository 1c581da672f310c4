//! Scaling runs over replicated data.

use std::fmt::Write as _;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Result};
use dmtl_core::ingest::{data_span, replicate};
use dmtl_core::*;

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub scales: Vec<usize>,
    pub runs: usize,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleResult {
    pub scale: usize,
    /// Input facts after replication.
    pub interval_count: usize,
    /// Rows of the canonical model.
    pub derived_count: usize,
    pub prepare_ms: f64,
    /// Fastest engine run.
    pub wall_ms: f64,
}

/// Replication period: the data span plus room for the program's temporal
/// reach, so copies never interact.
pub fn period(p: Option<&Program>, d: &DataInstance) -> TimePoint {
    let day = TimePoint::int(86_400);
    let reach = p
        .and_then(|p| {
            let k = max_constant(p);
            let depth = program_depth(&normalize(p)).ok()?;
            k.is_finite().then(|| {
                let mut r = TimePoint::zero();
                for _ in 0..=depth {
                    r = r.checked_add(&k).expect("finite");
                }
                r
            })
        })
        .map(|r| if r > day { r } else { day.clone() })
        .unwrap_or(day);
    data_span(d).checked_add(&reach).expect("finite").checked_add(&TimePoint::int(1)).expect("finite")
}

fn model_size(m: &CanonicalModel) -> usize {
    m.tables().iter().filter(|(k, _)| !is_fresh_name(k)).map(|(_, t)| t.len()).sum()
}

fn one_scale(p: &Program, np: &Program, base: &DataInstance, scale: usize, runs: usize) -> Result<ScaleResult> {
    let start = Instant::now();
    let d = replicate(base, scale, &period(Some(p), base))?;
    let prepare_ms = start.elapsed().as_secs_f64() * 1e3;
    let recursive = !is_nonrecursive(np);
    let mut best = f64::INFINITY;
    let mut derived = None;
    for _ in 0..runs {
        let start = Instant::now();
        let m = if recursive {
            let (m, status) = chase(np, &d, default_cap(np, &d))?;
            if let EvalStatus::CapReached(n) = status {
                bail!("round cap {n} reached at scale {scale}");
            }
            m
        } else {
            eval_nonrecursive(np, &d)?
        };
        best = best.min(start.elapsed().as_secs_f64() * 1e3);
        let n = model_size(&m);
        if derived.is_some_and(|x| x != n) {
            bail!("nondeterministic model size at scale {scale}");
        }
        derived = Some(n);
    }
    Ok(ScaleResult { scale, interval_count: d.facts.len(), derived_count: derived.unwrap_or(0), prepare_ms, wall_ms: best })
}

/// Runs every scale in turn, each on its own thread under the timeout.
pub fn run_scaling(p: &Program, base: &DataInstance, cfg: &ScalingConfig) -> Result<Vec<ScaleResult>> {
    let p = Arc::new(p.clone());
    let np = Arc::new(normalize(&p));
    let base = Arc::new(base.clone());
    let mut out = Vec::new();
    for &scale in &cfg.scales {
        let (tx, rx) = mpsc::channel();
        let (p, np, base, runs) = (p.clone(), np.clone(), base.clone(), cfg.runs.max(1));
        std::thread::spawn(move || {
            let _ = tx.send(one_scale(&p, &np, &base, scale, runs));
        });
        match rx.recv_timeout(cfg.timeout) {
            Ok(r) => out.push(r?),
            Err(mpsc::RecvTimeoutError::Timeout) => bail!("scale {scale} exceeded {}s", cfg.timeout.as_secs()),
            Err(e) => return Err(anyhow!("scale {scale}: {e}")),
        }
    }
    Ok(out)
}

pub fn to_csv(results: &[ScaleResult]) -> String {
    let mut s = String::from("scale,interval_count,derived_count,prepare_ms,wall_ms\n");
    for r in results {
        let _ = writeln!(s, "{},{},{},{:.3},{:.3}", r.scale, r.interval_count, r.derived_count, r.prepare_ms, r.wall_ms);
    }
    s
}

/// Least-squares slope and intercept of wall time against interval count.
pub fn fit(results: &[ScaleResult]) -> (f64, f64) {
    let n = results.len() as f64;
    let xs: Vec<f64> = results.iter().map(|r| r.interval_count as f64).collect();
    let ys: Vec<f64> = results.iter().map(|r| r.wall_ms).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

pub fn slope_report(results: &[ScaleResult]) -> String {
    let mut s = String::new();
    if results.is_empty() {
        return s;
    }
    let (slope, intercept) = fit(results);
    let _ = writeln!(s, "fit: wall_ms = {:.6} * intervals + {:.3}", slope, intercept);
    let (first, last) = (&results[0], &results[results.len() - 1]);
    if first.wall_ms > 0.0 {
        let _ = writeln!(
            s,
            "ratio wall({}x)/wall({}x) = {:.2} for a {:.2}x data increase",
            last.scale,
            first.scale,
            last.wall_ms / first.wall_ms,
            last.interval_count as f64 / first.interval_count.max(1) as f64
        );
    }
    let monotone = results.windows(2).all(|w| w[0].wall_ms <= w[1].wall_ms);
    let _ = writeln!(s, "monotone: {monotone}");
    s
}
