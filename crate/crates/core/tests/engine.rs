use dmtl_core::*;

const RULE_ONE: &str = "ActivePowerTrip(v) :- Turbine(v), ALWAYS-[0,1m] Below015(v), SOMETIME-[60s,63s] ALWAYS-[0s,10s] Above15(v).";
const EXAMPLE_ONE_DATA: &str = "Turbine(tb0)@(-inf,inf).\nAbove15(tb0)@[13:00:00,13:00:15).\nBelow015(tb0)@[13:00:17,13:01:25).";

fn iv(s: &str) -> Interval {
    Interval::parse(s).unwrap()
}

#[test]
fn example_one_maximal_answer() {
    let p = normalize(&parse_program(RULE_ONE).unwrap());
    let d = parse_data(EXAMPLE_ONE_DATA).unwrap();
    let m = eval_nonrecursive(&p, &d).unwrap();
    let q = parse_query("ActivePowerTrip(v)").unwrap();
    let a = answers(&m, &q).unwrap();
    assert_eq!(a, vec![(vec![Constant::new("tb0")], iv("[13:01:17,13:01:18)"))]);
    let c = [Constant::new("tb0")];
    assert!(certain_answer(&m, &q, &c, &iv("[13:01:17,13:01:18)")).unwrap());
    assert!(!certain_answer(&m, &q, &c, &iv("[13:01:16,13:01:18)")).unwrap());
    let (cm, status) = chase(&p, &d, default_cap(&p, &d)).unwrap();
    assert_eq!(status, EvalStatus::Fixpoint);
    assert_eq!(cm, m);
}
