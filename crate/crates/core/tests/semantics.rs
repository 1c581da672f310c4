use dmtl_core::oracle::{gen, interpret, Grid};
use dmtl_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GRID: Grid = Grid { exp: 2, w: 256 };

fn check(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = gen::ProgramConfig::default();
    let rp = gen::program(&mut rng, &cfg);
    let d = gen::data(&mut rng, &rp, cfg.constants, 6, 2, 64);
    let n = normalize(&rp.program);
    assert!(is_normal_form(&n), "seed {seed}: not normal\n{n}");
    let want = interpret(&rp.program, &d, GRID);
    let got = eval_nonrecursive(&n, &d).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", rp.program));
    assert_eq!(
        got.is_consistent(),
        want.is_consistent(),
        "seed {seed}: consistency\n{}\n{}",
        rp.program,
        d.to_text(TimeFormat::Seconds)
    );
    if !want.is_consistent() {
        return;
    }
    for pred in rp.arities.keys() {
        let rows = got.table(pred).map(|t| t.rows().to_vec()).unwrap_or_default();
        assert_eq!(
            rows,
            want.intervals(pred),
            "seed {seed}: predicate {pred}\nprogram:\n{}\nnormalized:\n{}\ndata:\n{}",
            rp.program,
            n,
            d.to_text(TimeFormat::Seconds)
        );
    }
}

#[test]
fn normalization_preserves_semantics() {
    for seed in 0..300 {
        check(seed);
    }
}

fn normal_instance(seed: u64) -> (Program, DataInstance) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = gen::ProgramConfig { rules: 5, ..Default::default() };
    let rp = gen::program(&mut rng, &cfg);
    let d = gen::data(&mut rng, &rp, cfg.constants, 6, 2, 64);
    (normalize(&rp.program), d)
}

#[test]
fn engine_matches_chase_and_invariants_hold() {
    use dmtl_core::oracle::invariants::{check_le_ri, check_zones};
    for seed in 1000..1300 {
        let (p, d) = normal_instance(seed);
        let m = eval_nonrecursive(&p, &d).unwrap();
        let (c, status) = chase(&p, &d, usize::MAX).unwrap();
        if m.is_consistent() {
            assert_eq!(status, EvalStatus::Fixpoint, "seed {seed}");
            assert_eq!(c, m, "seed {seed}\n{p}");
            check_zones(&p, &d, &m).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{p}"));
            check_le_ri(&p, &d, &m).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{p}\n{}", d.to_text(TimeFormat::Seconds)));
        } else {
            assert_eq!(status, EvalStatus::Inconsistent, "seed {seed}");
        }
    }
}

#[test]
fn random_instances_are_not_trivial() {
    let mut consistent = 0;
    let mut derived = 0;
    for seed in 1000..1300 {
        let (p, d) = normal_instance(seed);
        let m = eval_nonrecursive(&p, &d).unwrap();
        if m.is_consistent() {
            consistent += 1;
            derived += m.facts().iter().filter(|f| f.pred.starts_with('P')).count();
        }
    }
    eprintln!("consistent {consistent}/300, derived facts {derived}");
    assert!(consistent > 150 && derived > 300);
}

fn perturb(rng: &mut ChaCha8Rng, iv: &Interval) -> Interval {
    use rand::Rng;
    let quarter = TimePoint::dyadic(1, 2);
    let nudge = |rng: &mut ChaCha8Rng, t: &TimePoint| -> TimePoint {
        if !t.is_finite() || rng.gen_bool(0.5) {
            return t.clone();
        }
        if rng.gen_bool(0.5) {
            t.checked_add(&quarter).unwrap()
        } else {
            t.checked_sub(&quarter).unwrap()
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

#[test]
fn certain_answers_match_reduction() {
    use rand::seq::SliceRandom;
    use rand::Rng;
    let mut agree_true = 0;
    for seed in 2000..2100 {
        let (p, d) = normal_instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = eval_nonrecursive(&p, &d).unwrap();
        let preds: Vec<(String, usize)> =
            joint(&p, &d).into_iter().filter(|(k, _)| !k.starts_with("_nf")).collect();
        let (pred, arity) = preds.choose(&mut rng).unwrap().clone();
        let goal = Atom::new(&pred, (0..arity).map(|i| Term::var(&format!("v{i}"))).collect());
        let q = Query::new(goal);
        let rows = answers(&m, &q).unwrap();
        let (tuple, iv) = if !rows.is_empty() && rng.gen_bool(0.7) {
            let (t, iv) = rows.choose(&mut rng).unwrap().clone();
            (t, perturb(&mut rng, &iv))
        } else {
            let cs = gen::constants(2);
            let t = (0..arity).map(|_| cs.choose(&mut rng).unwrap().clone()).collect();
            (t, gen::interval(&mut rng, 2, -8, 72, 0.1))
        };
        let a = certain_answer(&m, &q, &tuple, &iv).unwrap();
        let b = answer_via_reduction(&p, &d, &q, &tuple, &iv).unwrap();
        assert_eq!(a, b, "seed {seed}: {pred}{tuple:?}@{iv}\n{p}\n{}", d.to_text(TimeFormat::Seconds));
        agree_true += a as usize;
    }
    assert!(agree_true >= 20, "only {agree_true} positive candidates");
}

fn joint(p: &Program, d: &DataInstance) -> Vec<(String, usize)> {
    let mut sig = p.signature();
    sig.extend(d.signature());
    sig.into_iter().collect()
}
