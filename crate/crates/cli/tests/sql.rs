mod common;

use common::*;
use dmtl_core::oracle::gen;
use dmtl_core::sqlgen::{self, CoalesceVariant, Mapping, RewriteOptions, SqlPlan, SQL_INFINITY};
use dmtl_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqlparser::dialect::SQLiteDialect;
use sqlparser::parser::Parser;

fn heat_plan(variant: CoalesceVariant) -> SqlPlan {
    let p = parse_program(&std::fs::read_to_string(fixture("weather/heat.dmtl")).unwrap()).unwrap();
    let m = sqlgen::parse_mappings(&std::fs::read_to_string(fixture("weather/heat_mappings.json")).unwrap()).unwrap();
    let q = parse_query("HeatAffectedCounty(county)").unwrap();
    sqlgen::rewrite(&p, &m, &q, RewriteOptions { variant, coalesce_mapped: true }).unwrap()
}

fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
    assert_eq!(actual, expected, "{name} differs; rerun with UPDATE_GOLDEN=1 after review");
}

#[test]
fn heat_plan_matches_golden_files() {
    check_golden("heat_counting.sql", &heat_plan(CoalesceVariant::Counting).to_sql());
    check_golden("heat_window.sql", &heat_plan(CoalesceVariant::Window).to_sql());
}

#[test]
fn box_view_shifts_ledge_by_a_day() {
    let plan = heat_plan(CoalesceVariant::Counting);
    let y = &plan.views.iter().find(|v| v.name == "V_Y").unwrap().sql;
    assert_eq!(
        y,
        "SELECT T1.station_id AS station_id, T1.ledge + 86400 AS ledge, T1.redge AS redge\n\
         FROM V_TempAbove24_coal AS T1\n\
         WHERE T1.redge - T1.ledge >= 86400 AND T1.ledge + 86400 < T1.redge"
    );
}

#[test]
fn heat_affected_county_joins_with_extremes() {
    let plan = heat_plan(CoalesceVariant::Counting);
    let v = &plan.views.iter().find(|v| v.name == "V_HeatAffectedCounty").unwrap().sql;
    let mx = "CASE WHEN T1.ledge >= T2.ledge THEN T1.ledge ELSE T2.ledge END";
    let mn = "CASE WHEN T1.redge <= T2.redge THEN T1.redge ELSE T2.redge END";
    assert_eq!(
        v,
        &format!(
            "SELECT T1.county AS county, {mx} AS ledge, {mn} AS redge\n\
             FROM V_LocatedInCounty_coal AS T1, V_ExcessiveHeat_coal AS T2\n\
             WHERE T1.station_id = T2.station_id AND {mx} < {mn}"
        )
    );
}

fn parses(sql: &str) {
    Parser::parse_sql(&SQLiteDialect {}, sql).unwrap_or_else(|e| panic!("{e}\n{sql}"));
}

#[test]
fn generated_sql_is_grammatical() {
    for variant in [CoalesceVariant::Counting, CoalesceVariant::Window] {
        let plan = heat_plan(variant);
        for v in &plan.views {
            parses(&v.sql);
        }
        parses(&plan.final_query);
        parses(&plan.to_sql());
    }
    let p = parse_program(&std::fs::read_to_string(fixture("siemens/ontology.dmtl")).unwrap()).unwrap();
    let m = sqlgen::parse_mappings(&std::fs::read_to_string(fixture("siemens/mappings.json")).unwrap()).unwrap();
    let plan = sqlgen::rewrite(&p, &m, &parse_query("NormalRestart(t)").unwrap(), RewriteOptions::default()).unwrap();
    parses(&plan.to_sql());
}

#[test]
fn weather_plans_execute_to_native_answers() {
    let data = weather_data();
    for q in [
        "HeatAffectedCounty(c)",
        "HurricaneAffectedState(s)",
        "HurricaneAffectedState(NY)",
        "ShoweryCounty(c)",
        "CyclonePatternState(s)",
        "Hurricane(u)",
    ] {
        let (code, native) = answer("weather/ontology.dmtl", &data, q, &[]);
        assert_eq!(code, 0);
        assert!(!native.is_empty(), "{q} has answers on the fixture");
        for variant in ["counting", "window"] {
            let (code, sql) = answer_sql("weather/ontology.dmtl", "weather/mappings.json", &weather_loads(), q, variant);
            assert_eq!(code, 0);
            assert_eq!(sql, native, "{q} with {variant}");
        }
    }
}

#[test]
fn siemens_trip_plan_executes_to_native_answers() {
    let (_, native) = answer("siemens/ontology.dmtl", &siemens_data(), "ActivePowerTrip(t)", &[]);
    assert!(native.lines().count() >= 4);
    let (code, sql) = answer_sql("siemens/ontology.dmtl", "siemens/mappings.json", &siemens_loads(), "ActivePowerTrip(t)", "window");
    assert_eq!(code, 0);
    assert_eq!(sql, native);
}

/// Endpoints of every answer; closedness may differ where the native engine
/// keeps a boundary point the convention cannot express.
fn endpoints(text: &str) -> Vec<(String, String, String)> {
    text.lines()
        .map(|l| {
            let (atom, iv) = l.split_once('@').unwrap();
            let (lo, hi) = iv[1..iv.len() - 1].split_once(',').unwrap();
            (atom.to_string(), lo.to_string(), hi.to_string())
        })
        .collect()
}

#[test]
fn siemens_plans_agree_on_endpoints() {
    let data = siemens_data();
    for q in ["NormalStop(t)", "NormalStart(t)", "NormalRestart(t)", "CoastDown6600to1500(t)"] {
        let (_, native) = answer("siemens/ontology.dmtl", &data, q, &[]);
        let (code, sql) = answer_sql("siemens/ontology.dmtl", "siemens/mappings.json", &siemens_loads(), q, "window");
        assert_eq!(code, 0);
        assert!(!native.is_empty());
        assert_eq!(endpoints(&sql), endpoints(&native), "{q}");
    }
}

fn sql_point(t: &TimePoint) -> String {
    match t {
        TimePoint::NegInf => format!("{}", -SQL_INFINITY),
        TimePoint::PosInf => format!("{SQL_INFINITY}"),
        TimePoint::Finite(_) => sqlgen::sql_time(t),
    }
}

/// `[lo,hi)` with finite ends, the shape every row takes under carry-forward.
fn half_open(iv: &Interval) -> Option<Interval> {
    Interval::make(iv.lo().clone(), iv.lo().is_finite(), iv.hi().clone(), false)
}

/// Random nonrecursive programs over half-open data: answers from SQLite
/// equal the engine's answers read in the same convention.
#[test]
fn random_plans_agree_with_engine() {
    let mut compared = 0;
    for seed in 0..150u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = gen::ProgramConfig { rules: 4, p_bottom: 0.0, ..Default::default() };
        let rp = gen::program(&mut rng, &cfg);
        let raw = gen::data(&mut rng, &rp, cfg.constants, 8, 2, 48);
        let d = DataInstance::new(
            raw.facts.iter().filter_map(|f| Some(Fact::new(&f.pred, f.args.clone(), half_open(&f.interval)?))).collect(),
        );
        let p = &rp.program;
        let idb: Vec<String> = p.intensional().into_iter().collect();
        let Some(goal) = idb.get(rng.gen_range(0..idb.len().max(1))) else { continue };
        let mut sig = p.signature();
        sig.extend(d.signature());
        let arity = sig[goal];
        let q = Query::new(Atom::new(goal, (0..arity).map(|i| Term::var(&format!("v{i}"))).collect()));

        let edb: Vec<(String, usize)> = sig.iter().filter(|(k, _)| !idb.contains(k)).map(|(k, a)| (k.clone(), *a)).collect();
        let mappings: Vec<Mapping> = edb
            .iter()
            .map(|(pred, a)| {
                let attrs: Vec<String> = (0..*a).map(|i| format!("a{i}")).collect();
                let mut cols = attrs.clone();
                cols.extend(["ledge".to_string(), "redge".to_string()]);
                Mapping {
                    predicate: pred.clone(),
                    sql: format!("SELECT {} FROM T_{pred}", cols.join(", ")),
                    attrs,
                    ledge: "ledge".into(),
                    redge: "redge".into(),
                    convention: ingest::Convention::CarryForward,
                }
            })
            .collect();
        let plan = match sqlgen::rewrite(p, &mappings, &q, RewriteOptions::default()) {
            Ok(plan) => plan,
            Err(sqlgen::SqlGenError::Unsupported(_)) => continue,
            Err(e) => panic!("seed {seed}: {e}\n{p}"),
        };
        let m = eval_nonrecursive(&normalize(p), &d).unwrap();
        if !m.is_consistent() {
            continue;
        }
        let native = answers(&m, &q).unwrap();
        let snapped: Vec<(Tuple, Interval)> =
            native.iter().filter_map(|(t, iv)| Some((t.clone(), half_open(iv)?))).collect();
        let attrs: Vec<String> = (0..arity).map(|i| format!("v{i}")).collect();
        let expected = coalesce_table(&TemporalTable::from_unsorted(attrs, snapped).unwrap()).unwrap().into_rows();

        let db = rusqlite::Connection::open_in_memory().unwrap();
        for (pred, a) in &edb {
            let mut cols: Vec<String> = (0..*a).map(|i| format!("a{i}")).collect();
            cols.extend(["ledge".to_string(), "redge".to_string()]);
            db.execute_batch(&format!("CREATE TABLE T_{pred} ({})", cols.join(", "))).unwrap();
            for f in d.facts.iter().filter(|f| &f.pred == pred) {
                let mut vals: Vec<String> = f.args.iter().map(|c| format!("'{}'", c.as_str())).collect();
                vals.push(sql_point(f.interval.lo()));
                vals.push(sql_point(f.interval.hi()));
                db.execute_batch(&format!("INSERT INTO T_{pred} VALUES ({})", vals.join(", "))).unwrap();
            }
        }
        let mut got = dmtl_cli::sql::execute_plan(&db, &plan).unwrap_or_else(|e| panic!("seed {seed}: {e:#}\n{p}"));
        got.sort();
        let mut expected = expected;
        expected.sort();
        assert_eq!(got, expected, "seed {seed}\n{p}\n{}", d.to_text(TimeFormat::Seconds));
        compared += 1;
    }
    assert!(compared >= 60, "only {compared} programs compared");
}

#[test]
fn every_plan_has_two_views_per_cone_predicate() {
    let p = parse_program(&std::fs::read_to_string(fixture("siemens/ontology.dmtl")).unwrap()).unwrap();
    let m = sqlgen::parse_mappings(&std::fs::read_to_string(fixture("siemens/mappings.json")).unwrap()).unwrap();
    let np = normalize_for_sql(&p);
    let g = dependence(&np);
    for pred in p.intensional() {
        let q = Query::new(Atom::new(&pred, vec![Term::var("t")]));
        let plan = sqlgen::rewrite(&p, &m, &q, RewriteOptions::default()).unwrap();
        let cone = g.cone(&pred);
        assert_eq!(plan.views.len(), 2 * cone.len(), "{pred}");
        let mut names: Vec<&str> = plan.views.iter().map(|v| v.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), plan.views.len());
    }
}
