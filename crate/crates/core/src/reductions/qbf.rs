//! Quantified Boolean formulas and their encoding as nonrecursive programs
//! whose consistency is the complement of QBF truth.

use std::fmt::Write as _;

use rand::Rng;

use super::ReductionError;
use crate::language::{parse_data, parse_program, DataInstance, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Forall,
    Exists,
}

/// A QBF `Q_n p_n … Q_0 p_0 φ₀`. `prefix[i]` quantifies `p_i`, so the last
/// entry is the outermost quantifier. Literals are `(variable, positive)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qbf {
    pub prefix: Vec<Quantifier>,
    pub clauses: Vec<Vec<(usize, bool)>>,
}

/// Largest number of variables `qbf_eval` accepts.
pub const MAX_QBF_VARS: usize = 20;

impl Qbf {
    pub fn new(prefix: Vec<Quantifier>, clauses: Vec<Vec<(usize, bool)>>) -> Result<Qbf, ReductionError> {
        if prefix.is_empty() {
            return Err(ReductionError::Invalid("a QBF needs at least one variable".into()));
        }
        for c in &clauses {
            if c.is_empty() {
                return Err(ReductionError::Invalid("empty clause".into()));
            }
            if let Some((v, _)) = c.iter().find(|(v, _)| *v >= prefix.len()) {
                return Err(ReductionError::Invalid(format!("variable p{v} is not quantified")));
            }
        }
        Ok(Qbf { prefix, clauses })
    }

    /// Index of the outermost variable.
    pub fn n(&self) -> usize {
        self.prefix.len() - 1
    }

    /// Parses the QDIMACS subset: a `p cnf` header, `a`/`e` lines listed
    /// outermost first, and zero-terminated clauses. Free variables are
    /// existentially quantified outside the prefix.
    pub fn from_qdimacs(text: &str) -> Result<Qbf, ReductionError> {
        let mut nvars = None;
        let mut blocks: Vec<(Quantifier, usize)> = Vec::new();
        let mut clauses = Vec::new();
        let mut current: Vec<i64> = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let bad = |m: &str| ReductionError::Parse { line: no + 1, message: m.to_string() };
            let mut words = line.split_whitespace();
            let first = words.next().expect("nonempty line");
            if first == "p" {
                if words.next() != Some("cnf") {
                    return Err(bad("expected `p cnf <vars> <clauses>`"));
                }
                let v = words.next().and_then(|w| w.parse::<usize>().ok()).ok_or_else(|| bad("bad variable count"))?;
                nvars = Some(v);
                continue;
            }
            let nums = |ws: &mut dyn Iterator<Item = &str>| -> Result<Vec<i64>, ReductionError> {
                ws.map(|w| w.parse::<i64>().map_err(|_| bad(&format!("bad literal `{w}`")))).collect()
            };
            let Some(nv) = nvars else { return Err(bad("missing `p cnf` header")) };
            if first == "a" || first == "e" {
                let q = if first == "a" { Quantifier::Forall } else { Quantifier::Exists };
                let vs = nums(&mut words)?;
                if vs.last() != Some(&0) {
                    return Err(bad("quantifier line must end with 0"));
                }
                for &v in &vs[..vs.len() - 1] {
                    if v <= 0 || v as usize > nv {
                        return Err(bad(&format!("variable {v} out of range")));
                    }
                    blocks.push((q, v as usize));
                }
                continue;
            }
            let mut all = vec![first.parse::<i64>().map_err(|_| bad(&format!("bad literal `{first}`")))?];
            all.extend(nums(&mut words)?);
            for lit in all {
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else if lit.unsigned_abs() as usize > nv {
                    return Err(bad(&format!("literal {lit} out of range")));
                } else {
                    current.push(lit);
                }
            }
        }
        let nv = nvars.ok_or_else(|| ReductionError::Invalid("missing `p cnf` header".into()))?;
        if !current.is_empty() {
            return Err(ReductionError::Invalid("last clause is not terminated by 0".into()));
        }
        // outermost first: free variables, then the prefix in order
        let mut order: Vec<(Quantifier, usize)> = (1..=nv)
            .filter(|v| !blocks.iter().any(|(_, b)| b == v))
            .map(|v| (Quantifier::Exists, v))
            .collect();
        order.extend(blocks);
        let mut index = vec![0usize; nv + 1];
        let total = order.len();
        let mut prefix = vec![Quantifier::Exists; total];
        for (pos, (q, v)) in order.iter().enumerate() {
            index[*v] = total - 1 - pos;
            prefix[total - 1 - pos] = *q;
        }
        let clauses =
            clauses.into_iter().map(|c| c.into_iter().map(|l| (index[l.unsigned_abs() as usize], l > 0)).collect()).collect();
        Qbf::new(prefix, clauses)
    }

    /// QDIMACS with DIMACS variable `k + 1` for `p_k`.
    pub fn to_qdimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.prefix.len(), self.clauses.len());
        let mut i = self.prefix.len();
        while i > 0 {
            let q = self.prefix[i - 1];
            let mut vars = Vec::new();
            while i > 0 && self.prefix[i - 1] == q {
                vars.push(i.to_string());
                i -= 1;
            }
            let tag = if q == Quantifier::Forall { 'a' } else { 'e' };
            let _ = writeln!(s, "{tag} {} 0", vars.join(" "));
        }
        for c in &self.clauses {
            let lits: Vec<String> =
                c.iter().map(|&(v, pos)| if pos { format!("{}", v + 1) } else { format!("-{}", v + 1) }).collect();
            let _ = writeln!(s, "{} 0", lits.join(" "));
        }
        s
    }
}

fn eval_from(q: &Qbf, var: usize, assignment: &mut Vec<bool>) -> bool {
    let matrix = |a: &[bool]| q.clauses.iter().all(|c| c.iter().any(|&(v, pos)| a[v] == pos));
    let branch = |val: bool, a: &mut Vec<bool>| {
        a[var] = val;
        if var == 0 {
            matrix(a)
        } else {
            eval_from(q, var - 1, a)
        }
    };
    match q.prefix[var] {
        Quantifier::Exists => branch(true, assignment) || branch(false, assignment),
        Quantifier::Forall => branch(true, assignment) && branch(false, assignment),
    }
}

/// Truth value by expanding the quantifier tree.
pub fn qbf_eval(q: &Qbf) -> Result<bool, ReductionError> {
    if q.prefix.len() > MAX_QBF_VARS {
        return Err(ReductionError::TooLarge(format!("{} variables", q.prefix.len())));
    }
    let mut a = vec![false; q.prefix.len()];
    Ok(eval_from(q, q.n(), &mut a))
}

fn pow2(i: usize) -> u64 {
    1u64 << i
}

/// The program and data of the PSPACE-hardness construction. `(Π, D)` is
/// consistent iff `q` is false.
pub fn qbf_to_program(q: &Qbf) -> (Program, DataInstance) {
    let n = q.n();
    let mut data = String::new();
    for i in 0..=n {
        let _ = writeln!(data, "P{i}_{i}@[0,{}).", pow2(i));
        let _ = writeln!(data, "NP{i}_{i}@[{},{}).", pow2(i), pow2(i + 1));
    }
    let mut rules = String::new();
    for i in 0..=n {
        for bar in ["", "N"] {
            let _ = writeln!(rules, "{bar}P{i} :- {bar}P{i}_{n}.");
            for j in i..n {
                let _ = writeln!(rules, "{bar}P{i}_{} :- {bar}P{i}_{j}.", j + 1);
                let s = pow2(j + 1);
                let _ = writeln!(rules, "ALWAYS+[{s},{s}] {bar}P{i}_{} :- {bar}P{i}_{j}.", j + 1);
            }
        }
    }
    for (i, c) in q.clauses.iter().enumerate() {
        for &(v, pos) in c {
            let bar = if pos { "" } else { "N" };
            let _ = writeln!(rules, "C{i} :- {bar}P{v}.");
        }
    }
    let body: Vec<String> = (0..q.clauses.len()).map(|i| format!("C{i}")).collect();
    if body.is_empty() {
        let _ = writeln!(rules, "F0 :- TOP.");
    } else {
        let _ = writeln!(rules, "F0 :- {}.", body.join(", "));
    }
    for (i, quant) in q.prefix.iter().enumerate() {
        let (a, b) = (pow2(i), pow2(i + 1));
        match quant {
            Quantifier::Exists => {
                let _ = writeln!(rules, "ALWAYS+[0,{a}] F{} :- F{i}, P{i}.", i + 1);
                let _ = writeln!(rules, "ALWAYS-[0,{a}] F{} :- F{i}, NP{i}.", i + 1);
            }
            Quantifier::Forall => {
                let _ = writeln!(rules, "ALWAYS+[0,{b}) F{} :- ALWAYS+[0,{a}) P{i}, ALWAYS+[0,{b}) F{i}.", i + 1);
            }
        }
    }
    let _ = writeln!(rules, "BOT :- ALWAYS+[0,{}) F{}.", pow2(n + 1), n + 1);
    let p = parse_program(&rules).expect("generated program parses");
    let d = parse_data(&data).expect("generated data parses");
    (p, d)
}

/// A random QBF over `p_0..p_n` with up to `max_clauses` clauses of one to
/// three literals.
pub fn random_qbf<R: Rng>(rng: &mut R, n: usize, max_clauses: usize) -> Qbf {
    let prefix = (0..=n).map(|_| if rng.gen_bool(0.5) { Quantifier::Forall } else { Quantifier::Exists }).collect();
    let m = rng.gen_range(1..=max_clauses.max(1));
    let clauses = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            (0..k).map(|_| (rng.gen_range(0..=n), rng.gen_bool(0.5))).collect()
        })
        .collect();
    Qbf::new(prefix, clauses).expect("well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{eval_nonrecursive, is_nonrecursive, normalize};

    fn q(prefix: &[Quantifier], clauses: &[&[(usize, bool)]]) -> Qbf {
        Qbf::new(prefix.to_vec(), clauses.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn oracle_examples() {
        use Quantifier::*;
        assert!(qbf_eval(&q(&[Exists], &[&[(0, true)]])).unwrap());
        assert!(!qbf_eval(&q(&[Forall], &[&[(0, true)]])).unwrap());
        // ∀p ∃q (p ∨ q) ∧ (¬p ∨ q): q is p0, p is p1
        assert!(qbf_eval(&q(&[Exists, Forall], &[&[(1, true), (0, true)], &[(1, false), (0, true)]])).unwrap());
    }

    #[test]
    fn single_variable_construction() {
        let (p, d) = qbf_to_program(&q(&[Quantifier::Exists], &[&[(0, true)]]));
        let text = p.to_string();
        for rule in [
            "P0 :- P0_0.",
            "C0 :- P0.",
            "F0 :- C0.",
            "ALWAYS+[0,1] F1 :- F0, P0.",
            "ALWAYS-[0,1] F1 :- F0, NP0.",
            "BOT :- ALWAYS+[0,2) F1.",
        ] {
            assert!(text.contains(rule), "missing {rule} in\n{text}");
        }
        assert_eq!(d.to_text(crate::TimeFormat::Seconds), "P0_0@[0,1).\nNP0_0@[1,2).\n");
        assert!(is_nonrecursive(&p));
        assert!(!eval_nonrecursive(&normalize(&p), &d).unwrap().is_consistent());
        let (p, d) = qbf_to_program(&q(&[Quantifier::Forall], &[&[(0, true)]]));
        assert!(eval_nonrecursive(&normalize(&p), &d).unwrap().is_consistent());
    }

    #[test]
    fn qdimacs_round_trip() {
        let text = "c example\np cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 2 0\n";
        let f = Qbf::from_qdimacs(text).unwrap();
        assert_eq!(f.prefix, vec![Quantifier::Exists, Quantifier::Forall]);
        assert_eq!(f.clauses, vec![vec![(1, true), (0, true)], vec![(1, false), (0, true)]]);
        assert_eq!(Qbf::from_qdimacs(&f.to_qdimacs()).unwrap(), f);
        assert!(qbf_eval(&f).unwrap());
    }
}
