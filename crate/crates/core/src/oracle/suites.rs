//! Randomized oracle suites, each reporting its case and mismatch counts.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::invariants::{check_le_ri, check_zones};
use super::{gen, naive, Grid, GridSet};
use crate::engine::*;
use crate::language::*;
use crate::reductions::*;
use crate::temporal::*;

#[derive(Debug, Clone)]
pub struct Report {
    pub name: String,
    pub cases: usize,
    pub mismatches: usize,
    /// The first few failing cases.
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl Report {
    fn new(name: &str) -> Report {
        Report { name: name.to_string(), cases: 0, mismatches: 0, failures: Vec::new(), elapsed: Duration::ZERO }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.mismatches += 1;
            if self.failures.len() < 5 {
                self.failures.push(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.cases > 0 && self.mismatches == 0
    }

    fn merge(&mut self, other: Report) {
        self.cases += other.cases;
        self.mismatches += other.mismatches;
        self.failures.extend(other.failures.into_iter().take(5usize.saturating_sub(self.failures.len())));
        self.elapsed += other.elapsed;
    }
}

/// Operands on the 1/16 grid in [-8, 8], compared on the 1/64 grid.
const OPERAND_EXP: u32 = 4;
const SPAN: i64 = 8 * 16;
const ALGEBRA_GRID: Grid = Grid { exp: 6, w: 24 * 64 };

type AlgebraCheck = fn(&Interval, &Interval, &Range) -> bool;

fn set(iv: &Interval) -> GridSet {
    ALGEBRA_GRID.interval(iv)
}

fn opt_set(iv: Option<Interval>) -> GridSet {
    iv.map(|i| set(&i)).unwrap_or_else(|| ALGEBRA_GRID.empty())
}

fn algebra_checks() -> Vec<(&'static str, AlgebraCheck)> {
    vec![
        ("plus_o", |a, _, r| a.plus_o(r).map(|x| set(&x) == set(a).plus(&set(r.interval()))).unwrap_or(false)),
        ("minus_o", |a, _, r| a.minus_o(r).map(|x| set(&x) == set(a).minus(&set(r.interval()))).unwrap_or(false)),
        ("plus_c", |a, _, r| opt_set(a.plus_c(r)) == set(a).forall_plus(&set(r.interval()))),
        ("minus_c", |a, _, r| opt_set(a.minus_c(r)) == set(a).forall_minus(&set(r.interval()))),
        ("fits", |a, _, r| fits(r, a) == !set(a).forall_minus(&set(r.interval())).is_empty()),
        ("intersect", |a, b, _| opt_set(a.intersect(b)) == set(a).intersection(&set(b))),
        ("union", |a, b, _| {
            let u = set(a).union(&set(b));
            match a.union_if_interval(b) {
                Some(i) => set(&i) == u,
                None => !u.is_convex(),
            }
        }),
        ("precedes", |a, b, _| {
            let (sa, sb) = (set(a), set(b));
            a.precedes(b) == ((sa.first(), sa.last()) < (sb.first(), sb.last()))
        }),
    ]
}

/// Interval operations against grid point sets, `cases` random operands each.
pub fn algebra(cases: usize) -> Vec<Report> {
    algebra_checks()
        .into_iter()
        .enumerate()
        .map(|(k, (name, check))| {
            let start = Instant::now();
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64 + 1);
            let mut rep = Report::new(name);
            for i in 0..cases {
                let a = gen::interval(&mut rng, OPERAND_EXP, -SPAN, SPAN, 0.1);
                let b = gen::interval(&mut rng, OPERAND_EXP, -SPAN, SPAN, 0.1);
                let r = gen::range(&mut rng, OPERAND_EXP, SPAN, 0.1, 0.2);
                rep.record(check(&a, &b, &r), || format!("case {i}: a={a} b={b} r={r}"));
            }
            rep.elapsed = start.elapsed();
            rep
        })
        .collect()
}

fn normal_instance(seed: u64) -> (Program, DataInstance) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = gen::ProgramConfig { rules: 5, ..Default::default() };
    let rp = gen::program(&mut rng, &cfg);
    let d = gen::data(&mut rng, &rp, cfg.constants, 6, 2, 64);
    (normalize(&rp.program), d)
}

fn invariants(p: &Program, d: &DataInstance, m: &CanonicalModel, inv: &mut Report, tag: &str) {
    if !m.is_consistent() {
        return;
    }
    let z = check_zones(p, d, m);
    inv.record(z.is_ok(), || format!("{tag}: {}", z.unwrap_err()));
    let e = check_le_ri(p, d, m);
    inv.record(e.is_ok(), || format!("{tag}: {}", e.unwrap_err()));
}

/// Nonrecursive engine against the chase run to its fixpoint; the second
/// report tallies the structural invariant checks.
pub fn engine_vs_chase(n: u64) -> (Report, Report) {
    let start = Instant::now();
    let mut rep = Report::new("engine_vs_chase");
    let mut inv = Report::new("invariants");
    for seed in 1000..1000 + n {
        let (p, d) = normal_instance(seed);
        let ok = match (eval_nonrecursive(&p, &d), chase(&p, &d, usize::MAX)) {
            (Ok(m), Ok((c, status))) => {
                invariants(&p, &d, &m, &mut inv, &format!("seed {seed}"));
                if m.is_consistent() {
                    status == EvalStatus::Fixpoint && c == m
                } else {
                    status == EvalStatus::Inconsistent
                }
            }
            _ => false,
        };
        rep.record(ok, || format!("seed {seed}\n{p}"));
    }
    rep.elapsed = start.elapsed();
    (rep, inv)
}

/// Consistency of the QBF encoding against brute-force truth.
pub fn qbf(n: u64) -> (Report, Report) {
    let start = Instant::now();
    let mut rep = Report::new("qbf");
    let mut inv = Report::new("invariants");
    for seed in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = rng.gen_range(0..=4);
        let q = random_qbf(&mut rng, vars, 6);
        let (p, d) = qbf_to_program(&q);
        let np = normalize(&p);
        let ok = match (eval_nonrecursive(&np, &d), qbf_eval(&q)) {
            (Ok(m), Ok(truth)) => {
                invariants(&np, &d, &m, &mut inv, &format!("qbf seed {seed}"));
                is_nonrecursive(&p) && m.is_consistent() == !truth
            }
            _ => false,
        };
        rep.record(ok, || format!("seed {seed}\n{}", q.to_qdimacs()));
    }
    rep.elapsed = start.elapsed();
    (rep, inv)
}

/// Entailment of `T` at the goal point against gate-by-gate evaluation,
/// plus the consistency variant.
pub fn circuits(n: u64) -> Report {
    let start = Instant::now();
    let mut rep = Report::new("circuits");
    for seed in 10_000..10_000 + n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates = rng.gen_range(1..=16);
        let inputs = rng.gen_range(1..=gates.min(5));
        let c = random_circuit(&mut rng, gates, inputs);
        let value = circuit_eval(&c);
        let cap = 8 * c.scale() as usize;
        let run = || -> Result<bool, EngineError> {
            let inst = circuit_to_program(&c);
            let (m, status) = chase(&normalize(&inst.program), &inst.data, cap)?;
            let t = certain_answer(&m, &Query::new(goal_atom()), &[], &inst.goal)?;
            let inst = circuit_consistency_instance(&c);
            let (_, s2) = chase(&normalize(&inst.program), &inst.data, cap)?;
            Ok(status != EvalStatus::Inconsistent && t == value && (s2 == EvalStatus::Inconsistent) == value)
        };
        rep.record(run().unwrap_or(false), || format!("seed {seed}\n{}", c.to_text()));
    }
    rep.elapsed = start.elapsed();
    rep
}

fn perturb(rng: &mut ChaCha8Rng, iv: &Interval) -> Interval {
    let quarter = TimePoint::dyadic(1, 2);
    let nudge = |rng: &mut ChaCha8Rng, t: &TimePoint| -> TimePoint {
        if !t.is_finite() || rng.gen_bool(0.5) {
            return t.clone();
        }
        if rng.gen_bool(0.5) {
            t.checked_add(&quarter).expect("finite")
        } else {
            t.checked_sub(&quarter).expect("finite")
        }
    };
    loop {
        let lo = nudge(rng, iv.lo());
        let hi = nudge(rng, iv.hi());
        let lc = if rng.gen_bool(0.3) { !iv.lo_closed() } else { iv.lo_closed() };
        let hc = if rng.gen_bool(0.3) { !iv.hi_closed() } else { iv.hi_closed() };
        if let Some(x) = Interval::make(lo, lc, hi, hc) {
            return x;
        }
    }
}

/// `certain_answer` against the inconsistency-based reduction.
pub fn reduction_crosscheck(n: u64) -> (Report, Report) {
    let start = Instant::now();
    let mut rep = Report::new("certain_answer_vs_reduction");
    let mut inv = Report::new("invariants");
    for seed in 2000..2000 + n {
        let (p, d) = normal_instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = match eval_nonrecursive(&p, &d) {
            Ok(m) => m,
            Err(e) => {
                rep.record(false, || format!("seed {seed}: {e}"));
                continue;
            }
        };
        invariants(&p, &d, &m, &mut inv, &format!("seed {seed}"));
        let mut sig = p.signature();
        sig.extend(d.signature());
        let preds: Vec<(String, usize)> = sig.into_iter().filter(|(k, _)| !k.starts_with("_nf")).collect();
        let (pred, arity) = preds.choose(&mut rng).expect("predicates").clone();
        let q = Query::new(Atom::new(&pred, (0..arity).map(|i| Term::var(&format!("v{i}"))).collect()));
        let rows = answers(&m, &q).unwrap_or_default();
        let (tuple, iv) = if !rows.is_empty() && rng.gen_bool(0.7) {
            let (t, iv) = rows.choose(&mut rng).expect("rows").clone();
            (t, perturb(&mut rng, &iv))
        } else {
            let cs = gen::constants(2);
            let t = (0..arity).map(|_| cs.choose(&mut rng).expect("constants").clone()).collect();
            (t, gen::interval(&mut rng, 2, -8, 72, 0.1))
        };
        let a = certain_answer(&m, &q, &tuple, &iv);
        let b = answer_via_reduction(&p, &d, &q, &tuple, &iv);
        let ok = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
        rep.record(ok, || format!("seed {seed}: {pred}{tuple:?}@{iv}: {a:?} vs {b:?}"));
    }
    rep.elapsed = start.elapsed();
    (rep, inv)
}

const TABLE_GRID: Grid = Grid { exp: 2, w: 64 };

fn random_table(rng: &mut ChaCha8Rng, attrs: &[&str]) -> TemporalTable {
    let rows = rng.gen_range(0..30);
    let t = gen::table(rng, attrs.len(), 3, rows, 2, 40);
    TemporalTable::from_unsorted(attrs.iter().map(|s| s.to_string()).collect(), t.into_rows()).expect("width")
}

/// Coalesce, join, project and union against naive point-set oracles; every
/// output must also pass the TOA validator.
pub fn tables(n: u64) -> Vec<Report> {
    let g = TABLE_GRID;
    let mut out = Vec::new();

    let start = Instant::now();
    let mut rep = Report::new("coalesce");
    for seed in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arity = rng.gen_range(0..3);
        let t = random_table(&mut rng, &["a", "b"][..arity]);
        let ok = coalesce_table(&t)
            .map(|c| c.validate_toa().is_ok() && c.rows() == naive::coalesce(&t, g).as_slice())
            .unwrap_or(false);
        rep.record(ok, || format!("seed {seed}"));
    }
    rep.elapsed = start.elapsed();
    out.push(rep);

    let start = Instant::now();
    let mut rep = Report::new("join");
    let schemas: [(&[&str], &[&str]); 5] =
        [(&["a"], &["a"]), (&["a", "b"], &["b"]), (&["a"], &["b"]), (&[], &["a"]), (&["a", "b"], &["b", "c"])];
    for seed in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let (la, ra) = schemas[seed as usize % schemas.len()];
        let l = coalesce_table(&random_table(&mut rng, la)).expect("sorted");
        let r = coalesce_table(&random_table(&mut rng, ra)).expect("sorted");
        let ok = temporal_join(&l, &r)
            .map(|j| j.validate_toa().is_ok() && j.rows() == naive::maximal_rows(&naive::join(&l, &r, g)).as_slice())
            .unwrap_or(false);
        rep.record(ok, || format!("seed {seed}"));
    }
    rep.elapsed = start.elapsed();
    out.push(rep);

    let start = Instant::now();
    let mut rep = Report::new("project");
    for seed in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let t = random_table(&mut rng, &["a", "b", "c"]);
        let mut onto: Vec<String> =
            ["a", "b", "c"].iter().filter(|_| rng.gen_bool(0.5)).map(|s| s.to_string()).collect();
        onto.shuffle(&mut rng);
        let ok = project(&t, &onto)
            .map(|p| p.validate_toa().is_ok() && naive::point_sets(&p, g) == naive::project(&t, &onto, g))
            .unwrap_or(false);
        rep.record(ok, || format!("seed {seed}"));
    }
    rep.elapsed = start.elapsed();
    out.push(rep);

    let start = Instant::now();
    let mut rep = Report::new("union");
    for seed in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let a = random_table(&mut rng, &["a"]);
        let b = random_table(&mut rng, &["a"]);
        let ok = union_tables(&a, &b)
            .map(|u| u.validate_toa().is_ok() && naive::point_sets(&u, g) == naive::union(&a, &b, g))
            .unwrap_or(false);
        rep.record(ok, || format!("seed {seed}"));
    }
    rep.elapsed = start.elapsed();
    out.push(rep);
    out
}

/// Joins the invariant tallies of several suites.
pub fn merge_reports(name: &str, parts: Vec<Report>) -> Report {
    let mut r = Report::new(name);
    for p in parts {
        r.merge(p);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        assert!(algebra(50).iter().all(Report::passed));
        assert!(tables(10).iter().all(Report::passed));
        let (e, inv) = engine_vs_chase(5);
        assert!(e.passed() && inv.passed(), "{:?} {:?}", e.failures, inv.failures);
    }
}
