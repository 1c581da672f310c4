//! Monotone circuits and their encoding as recursive propositional programs
//! in which the output value is read off a single time point.

use std::fmt::Write as _;

use num_bigint::BigInt;
use rand::Rng;

use super::ReductionError;
use crate::language::{parse_program, Atom, DataInstance, Fact, Program};
use crate::temporal::{Dyadic, Interval, TimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input(bool),
    And(usize, usize),
    Or(usize, usize),
}

/// Gates are numbered by their position; every gate reads lower-numbered
/// gates and the last gate is the output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneCircuit {
    gates: Vec<Gate>,
}

impl MonotoneCircuit {
    pub fn new(gates: Vec<Gate>) -> Result<MonotoneCircuit, ReductionError> {
        if gates.is_empty() {
            return Err(ReductionError::Invalid("a circuit needs at least one gate".into()));
        }
        for (id, g) in gates.iter().enumerate() {
            if let Gate::And(a, b) | Gate::Or(a, b) = *g {
                if a >= id || b >= id {
                    return Err(ReductionError::Invalid(format!("gate {id} reads a gate that is not below it")));
                }
            }
        }
        Ok(MonotoneCircuit { gates })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> usize {
        self.gates.len() - 1
    }

    /// `N = 2^k`, the least power of two above the largest gate number.
    pub fn scale(&self) -> u64 {
        (self.output() as u64 + 1).next_power_of_two().max(2)
    }

    /// Parses lines `id input T|F`, `id and a b`, `id or a b`; ids must be
    /// `0, 1, 2, …` in order. `#` starts a comment.
    pub fn parse(text: &str) -> Result<MonotoneCircuit, ReductionError> {
        let mut gates = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: String| ReductionError::Parse { line: no + 1, message: m };
            let w: Vec<&str> = line.split_whitespace().collect();
            let id: usize = w[0].parse().map_err(|_| bad(format!("bad gate id `{}`", w[0])))?;
            if id != gates.len() {
                return Err(bad(format!("expected gate {}, found {id}", gates.len())));
            }
            let arg = |k: usize| -> Result<usize, ReductionError> {
                w.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| bad(format!("gate {id}: missing input {k}")))
            };
            let g = match (w.get(1).map(|s| s.to_ascii_lowercase()).as_deref(), w.len()) {
                (Some("input"), 3) => match w[2] {
                    "T" | "1" | "true" => Gate::Input(true),
                    "F" | "0" | "false" => Gate::Input(false),
                    v => return Err(bad(format!("gate {id}: bad input value `{v}`"))),
                },
                (Some("and"), 4) => Gate::And(arg(2)?, arg(3)?),
                (Some("or"), 4) => Gate::Or(arg(2)?, arg(3)?),
                _ => return Err(bad(format!("cannot parse gate line `{line}`"))),
            };
            gates.push(g);
        }
        MonotoneCircuit::new(gates)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (id, g) in self.gates.iter().enumerate() {
            let _ = match g {
                Gate::Input(v) => writeln!(s, "{id} input {}", if *v { "T" } else { "F" }),
                Gate::And(a, b) => writeln!(s, "{id} and {a} {b}"),
                Gate::Or(a, b) => writeln!(s, "{id} or {a} {b}"),
            };
        }
        s
    }
}

/// Gate-by-gate evaluation; returns the output value.
pub fn circuit_eval(c: &MonotoneCircuit) -> bool {
    let mut v = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        let x = match *g {
            Gate::Input(b) => b,
            Gate::And(a, b) => v[a] && v[b],
            Gate::Or(a, b) => v[a] || v[b],
        };
        v.push(x);
    }
    v[c.output()]
}

/// The encoding of a circuit run.
#[derive(Debug, Clone)]
pub struct CircuitInstance {
    pub program: Program,
    pub data: DataInstance,
    /// The point `2n + n/N` for the output gate `n`.
    pub goal: Interval,
}

fn at(c: &MonotoneCircuit, gate: usize, offset_gate: usize) -> Interval {
    let n = c.scale();
    let k = n.trailing_zeros();
    let num = BigInt::from(2 * gate as u64 * n + offset_gate as u64);
    Interval::point(TimePoint::Finite(Dyadic::new(num, k)))
}

const CIRCUIT_RULES: &str = "\
T :- SOMETIME-[2,2] T.
F :- SOMETIME-[2,2] F.
T :- SOMETIME-[0,1] (I0, T), D.
T :- SOMETIME-[0,1] (I1, T), D.
F :- SOMETIME-[0,1] (I0, F), D, SOMETIME-[0,1] (I1, F).
F :- SOMETIME-[0,1] (I0, F), C.
F :- SOMETIME-[0,1] (I1, F), C.
T :- SOMETIME-[0,1] (I0, T), C, SOMETIME-[0,1] (I1, T).
";

/// The P-hardness construction: the output is true iff `T` holds at the
/// goal point.
pub fn circuit_to_program(c: &MonotoneCircuit) -> CircuitInstance {
    let mut facts = Vec::new();
    let fact = |p: &str, iv: Interval| Fact::new(p, Vec::new(), iv);
    for (id, g) in c.gates.iter().enumerate() {
        match *g {
            Gate::Input(v) => facts.push(fact(if v { "T" } else { "F" }, at(c, id, id))),
            Gate::And(a, b) | Gate::Or(a, b) => {
                facts.push(fact(if matches!(g, Gate::And(..)) { "C" } else { "D" }, at(c, id, id)));
                facts.push(fact("I0", at(c, id, a)));
                facts.push(fact("I1", at(c, id, b)));
            }
        }
    }
    let program = parse_program(CIRCUIT_RULES).expect("circuit rules parse");
    let out = c.output();
    CircuitInstance { program, data: DataInstance::new(facts), goal: at(c, out, out) }
}

/// The consistency variant: adds `P` at the goal point and `⊥ ← P ∧ T`, so
/// the instance is inconsistent iff the output is true.
pub fn circuit_consistency_instance(c: &MonotoneCircuit) -> CircuitInstance {
    let mut inst = circuit_to_program(c);
    let mut text = inst.program.to_string();
    text.push_str("BOT :- P, T.\n");
    inst.program = parse_program(&text).expect("circuit rules parse");
    inst.data.facts.push(Fact::new("P", Vec::new(), inst.goal.clone()));
    inst
}

/// The goal atom `T`.
pub fn goal_atom() -> Atom {
    Atom::new("T", Vec::new())
}

/// A random circuit with `gates` gates, of which the first `inputs` are
/// inputs with random values.
pub fn random_circuit<R: Rng>(rng: &mut R, gates: usize, inputs: usize) -> MonotoneCircuit {
    let inputs = inputs.clamp(1, gates.max(1));
    let mut gs = Vec::with_capacity(gates);
    for id in 0..gates.max(1) {
        if id < inputs {
            gs.push(Gate::Input(rng.gen_bool(0.5)));
        } else {
            let (a, b) = (rng.gen_range(0..id), rng.gen_range(0..id));
            gs.push(if rng.gen_bool(0.5) { Gate::And(a, b) } else { Gate::Or(a, b) });
        }
    }
    MonotoneCircuit::new(gs).expect("well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{certain_answer, chase, EvalStatus};
    use crate::language::{normalize, Query};

    fn sample() -> MonotoneCircuit {
        MonotoneCircuit::parse("0 input T\n1 input F\n2 input T\n3 or 0 1\n4 and 1 2\n5 and 3 4\n").unwrap()
    }

    fn entailed(inst: &CircuitInstance, cap: usize) -> bool {
        let (m, status) = chase(&normalize(&inst.program), &inst.data, cap).unwrap();
        assert_ne!(status, EvalStatus::Inconsistent);
        certain_answer(&m, &Query::new(goal_atom()), &[], &inst.goal).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let or = MonotoneCircuit::new(vec![Gate::Input(true), Gate::Input(false), Gate::Or(0, 1)]).unwrap();
        let and = MonotoneCircuit::new(vec![Gate::Input(true), Gate::Input(false), Gate::And(0, 1)]).unwrap();
        assert!(circuit_eval(&or));
        assert!(!circuit_eval(&and));
        assert!(!circuit_eval(&sample()));
        assert_eq!(sample().scale(), 8);
        assert_eq!(MonotoneCircuit::parse(&sample().to_text()).unwrap(), sample());
    }

    #[test]
    fn sample_circuit_goal() {
        let c = sample();
        let inst = circuit_to_program(&c);
        assert_eq!(inst.goal.to_string(), "[10.625,10.625]");
        assert!(!entailed(&inst, 8 * c.scale() as usize));
    }

    #[test]
    fn small_circuits() {
        let one = MonotoneCircuit::new(vec![Gate::Input(false), Gate::Input(true)]).unwrap();
        assert_eq!(one.scale(), 2);
        let inst = circuit_to_program(&one);
        assert_eq!(inst.goal.to_string(), "[2.5,2.5]");
        assert!(entailed(&inst, 16));
        let and = MonotoneCircuit::new(vec![Gate::Input(true), Gate::Input(false), Gate::And(0, 1)]).unwrap();
        let inst = circuit_to_program(&and);
        assert!(!entailed(&inst, 32));
        let (m, _) = chase(&normalize(&inst.program), &inst.data, 32).unwrap();
        assert!(certain_answer(&m, &Query::new(Atom::new("F", vec![])), &[], &inst.goal).unwrap());
    }
}
