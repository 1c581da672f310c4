mod common;

use common::*;
use dmtl_core::*;

#[test]
fn example_one_answer_and_exit_code() {
    let o = dmtl(&[
        "answer",
        "--program",
        &fixture("example1/program.dmtl"),
        "--data",
        &fixture("example1/data.facts"),
        "--time-format",
        "clock",
        "ActivePowerTrip(tb0)",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ActivePowerTrip(tb0)@[13:01:17,13:01:18)\n");
}

#[test]
fn json_output_lists_tuples_and_intervals() {
    let (code, out) = answer("example1/program.dmtl", &["--data".into(), fixture("example1/data.facts")], "ActivePowerTrip(v)", &["--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["answers"][0]["tuple"][0], "tb0");
    assert_eq!(v["answers"][0]["interval"], "[46877,46878)");
}

#[test]
fn inconsistent_exits_two_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.dmtl");
    let d = dir.path().join("d.facts");
    std::fs::write(&p, "BOT :- A, SOMETIME-[1,1] B.").unwrap();
    std::fs::write(&d, "A@[0,5].\nB@[0,2].").unwrap();
    let o = dmtl(&["check", "--program", p.to_str().unwrap(), "--data", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "INCONSISTENT: witness [1,3]\n");
    let o = dmtl(&["answer", "--program", p.to_str().unwrap(), "--data", d.to_str().unwrap(), "A"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn recursive_program_hitting_the_cap_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.dmtl");
    let d = dir.path().join("d.facts");
    std::fs::write(&p, "P :- SOMETIME-[1,1] P.").unwrap();
    std::fs::write(&d, "P@[0,0].").unwrap();
    let o = dmtl(&["answer", "--program", p.to_str().unwrap(), "--data", d.to_str().unwrap(), "P"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("UNKNOWN"));
    let o = dmtl(&["check", "--cap", "5", "--program", p.to_str().unwrap(), "--data", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn recursive_program_with_fixpoint_answers() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.dmtl");
    let d = dir.path().join("d.facts");
    std::fs::write(&p, "P(x) :- SOMETIME-[1,1] P(x), Q(x).").unwrap();
    std::fs::write(&d, "P(a)@[0,0].\nQ(a)@[0,3].").unwrap();
    let o = dmtl(&["answer", "--program", p.to_str().unwrap(), "--data", d.to_str().unwrap(), "P(x)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "P(a)@[0,0]\nP(a)@[1,1]\nP(a)@[2,2]\nP(a)@[3,3]\n");
}

#[test]
fn parse_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.dmtl");
    std::fs::write(&p, "A :- B.\nC :- ALWAYS-[2,1] D.\n").unwrap();
    let o = dmtl(&["normalize", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(&format!("{}:2:", p.display())), "{err}");
    let o = dmtl(&["answer", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn execute_requires_a_supported_connection() {
    let o = dmtl(&[
        "rewrite-sql",
        "--program",
        &fixture("weather/heat.dmtl"),
        "--mappings",
        &fixture("weather/heat_mappings.json"),
        "--execute",
        "postgres://localhost/db",
        "HeatAffectedCounty(c)",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = dmtl(&["rewrite-sql", "--program", "p", "--mappings", "m", "--load", "T=x.csv", "Q"]);
    assert_eq!(o.status.code(), Some(1), "--load without --execute is a usage error");
}

#[test]
fn normalize_output_reparses_to_a_normal_program() {
    let o = dmtl(&["normalize", &fixture("example1/program.dmtl")]);
    assert_eq!(o.status.code(), Some(0));
    let p = parse_program(&stdout(&o)).expect("normal form parses");
    assert!(is_normal_form(&p));
    assert_eq!(normalize(&p), p);
    let o = dmtl(&["normalize", "--sql", &fixture("siemens/ontology.dmtl")]);
    assert_eq!(o.status.code(), Some(0));
    parse_program(&stdout(&o)).expect("sql normal form parses");
}

#[test]
fn check_on_forall_p_p_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("forall.qdimacs");
    std::fs::write(&q, "p cnf 1 1\na 1 0\n1 0\n").unwrap();
    let out = dir.path().join("gen");
    let o = dmtl(&["gen-qbf", "--from", q.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(stdout(&o), "forall: CONSISTENT\n");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("forall.verdict.json")).unwrap()).unwrap();
    assert_eq!(v["qbf_value"], false);
    let o = dmtl(&[
        "check",
        "--program",
        out.join("forall.dmtl").to_str().unwrap(),
        "--data",
        out.join("forall.facts").to_str().unwrap(),
    ]);
    assert_eq!(stdout(&o), "CONSISTENT\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn generated_qbf_pairs_match_their_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dmtl(&["gen-qbf", "--seed", "5", "--vars", "3", "--clauses", "4", "--count", "6", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    for i in 0..6 {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("qbf-{i}.verdict.json"))).unwrap()).unwrap();
        let o = dmtl(&[
            "check",
            "--program",
            dir.path().join(format!("qbf-{i}.dmtl")).to_str().unwrap(),
            "--data",
            dir.path().join(format!("qbf-{i}.facts")).to_str().unwrap(),
        ]);
        assert_eq!(stdout(&o).trim_end().split(':').next().unwrap(), v["expected"].as_str().unwrap());
    }
}

#[test]
fn generated_circuits_entail_the_goal_iff_true() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dmtl(&["gen-circuit", "--seed", "3", "--gates", "6", "--inputs", "3", "--count", "5", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    for i in 0..5 {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("circuit-{i}.verdict.json"))).unwrap())
                .unwrap();
        let cap = v["cap"].to_string();
        let o = dmtl(&[
            "answer",
            "--partial",
            "--cap",
            &cap,
            "--program",
            dir.path().join(format!("circuit-{i}.dmtl")).to_str().unwrap(),
            "--data",
            dir.path().join(format!("circuit-{i}.facts")).to_str().unwrap(),
            "T",
        ]);
        assert!(matches!(o.status.code(), Some(0 | 3)));
        let goal = v["goal"].as_str().unwrap().split_once('@').unwrap().1.to_string();
        let goal = Interval::parse(&goal).unwrap();
        let holds = stdout(&o)
            .lines()
            .any(|l| Interval::parse(l.split_once('@').unwrap().1).unwrap().contains(goal.lo()));
        assert_eq!(holds, v["value"].as_bool().unwrap(), "circuit {i}");
    }
}

#[test]
fn outputs_are_byte_identical_across_thread_counts() {
    let mut runs = Vec::new();
    for threads in ["1", "4"] {
        let mut args = vec!["answer", "--threads", threads, "--program"];
        let prog = fixture("siemens/ontology.dmtl");
        args.push(&prog);
        let data = siemens_data();
        args.extend(data.iter().map(String::as_str));
        args.push("NormalRestart(t)");
        let o = dmtl(&args);
        assert_eq!(o.status.code(), Some(0));
        runs.push(o.stdout);
    }
    assert_eq!(runs[0], runs[1]);
    assert!(!runs[0].is_empty());
}

#[test]
fn ingest_writes_reparseable_facts() {
    let mut args = vec!["ingest".to_string()];
    args.extend(weather_data());
    let (code, text) = dmtl_cli::run_args(args.clone()).unwrap();
    assert_eq!(code, 0);
    let d = parse_data(&text).unwrap();
    args.extend(["--replicate".into(), "3".into()]);
    let (_, text3) = dmtl_cli::run_args(args).unwrap();
    assert_eq!(parse_data(&text3).unwrap().facts.len(), 3 * d.facts.len());
}

#[test]
fn rewrite_writes_plan_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("heat.sql");
    let o = dmtl(&[
        "rewrite-sql",
        "--program",
        &fixture("weather/heat.dmtl"),
        "--mappings",
        &fixture("weather/heat_mappings.json"),
        "--out",
        out.to_str().unwrap(),
        "HeatAffectedCounty(county)",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let script = std::fs::read_to_string(&out).unwrap();
    assert!(script.starts_with("BEGIN;") && script.trim_end().ends_with("COMMIT;"));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("heat.plan.json")).unwrap()).unwrap();
    assert_eq!(side["columns"][0], "county");
    assert_eq!(side["views"].as_array().unwrap().last().unwrap(), "V_HeatAffectedCounty_coal");
}
