//! Rule application, bottom-up materialisation and query answering.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::table::*;
use super::EngineError;
use crate::language::*;
use crate::temporal::{Interval, Range, TimePoint};

/// Attribute names of a stored predicate table.
pub(crate) fn pred_attrs(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("a{i}")).collect()
}

/// Predicate tables (coalesced, sorted by tuple then ≺) plus the first ⊥
/// interval if the model is inconsistent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CanonicalModel {
    tables: BTreeMap<String, TemporalTable>,
    witness: Option<Interval>,
}

impl CanonicalModel {
    /// Coalesced data with an empty table for every predicate in `sig`.
    pub fn from_data(d: &DataInstance, sig: &BTreeMap<String, usize>) -> Result<CanonicalModel, EngineError> {
        let mut rows: BTreeMap<String, Vec<(Tuple, Interval)>> = BTreeMap::new();
        let mut arity: BTreeMap<String, usize> = sig.clone();
        for f in &d.facts {
            let n = *arity.entry(f.pred.clone()).or_insert(f.args.len());
            if n != f.args.len() {
                return Err(EngineError::Arity { pred: f.pred.clone(), expected: n, found: f.args.len() });
            }
            rows.entry(f.pred.clone()).or_default().push((f.args.clone(), f.interval.clone()));
        }
        let mut tables = BTreeMap::new();
        for (p, n) in arity {
            let r = rows.remove(&p).unwrap_or_default();
            let t = TemporalTable::from_unsorted(pred_attrs(n), r)?;
            tables.insert(p, coalesce_table(&t)?);
        }
        Ok(CanonicalModel { tables, witness: None })
    }

    pub(crate) fn from_parts(tables: BTreeMap<String, TemporalTable>, witness: Option<Interval>) -> CanonicalModel {
        CanonicalModel { tables, witness }
    }

    pub fn tables(&self) -> &BTreeMap<String, TemporalTable> {
        &self.tables
    }

    pub fn table(&self, pred: &str) -> Option<&TemporalTable> {
        self.tables.get(pred)
    }

    pub fn is_consistent(&self) -> bool {
        self.witness.is_none()
    }

    pub fn witness(&self) -> Option<&Interval> {
        self.witness.as_ref()
    }

    /// All stored facts, by predicate, tuple and ≺.
    pub fn facts(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        for (p, t) in &self.tables {
            for (tuple, iv) in t.rows() {
                out.push(Fact::new(p, tuple.clone(), iv.clone()));
            }
        }
        out
    }

    /// Facts over predicates not introduced by normalisation.
    pub fn visible_facts(&self) -> Vec<Fact> {
        self.facts().into_iter().filter(|f| !is_fresh_name(&f.pred)).collect()
    }

    pub fn to_data(&self) -> DataInstance {
        DataInstance::new(self.facts())
    }
}

/// Rows of `table` matching `atom`, as a table over the atom's distinct variables.
pub(crate) fn select(table: Option<&TemporalTable>, atom: &Atom) -> TemporalTable {
    let vars = atom.vars();
    let Some(table) = table else {
        return TemporalTable::empty(vars);
    };
    let pos: Vec<usize> = vars
        .iter()
        .map(|v| atom.args.iter().position(|t| t.as_var() == Some(v)).expect("variable of atom"))
        .collect();
    let rows = table
        .rows()
        .iter()
        .filter(|(t, _)| {
            t.len() == atom.args.len()
                && atom.args.iter().enumerate().all(|(i, a)| match a {
                    Term::Const(c) => &t[i] == c,
                    Term::Var(v) => {
                        let first = atom.args.iter().position(|x| x.as_var() == Some(v)).expect("occurs");
                        t[first] == t[i]
                    }
                })
        })
        .map(|(t, iv)| (pos.iter().map(|&i| t[i].clone()).collect(), iv.clone()))
        .collect();
    TemporalTable::from_rows(vars, rows).expect("width matches")
}

fn operand_table(o: &Operand, tables: &BTreeMap<String, TemporalTable>) -> TemporalTable {
    match o {
        Operand::Top => TemporalTable::top(),
        Operand::Atom(a) => select(tables.get(&a.pred), a),
    }
}

/// Coalesces a table over the head's variables and instantiates the head.
fn finish(head: Option<&Atom>, t: TemporalTable) -> Result<TemporalTable, EngineError> {
    let Some(head) = head else {
        let p = project(&t, &[])?;
        return coalesce_table(&p);
    };
    let vars = head.vars();
    let p = coalesce_table(&project(&t, &vars)?)?;
    let rows = p
        .into_rows()
        .into_iter()
        .map(|(tuple, iv)| {
            let full = head
                .args
                .iter()
                .map(|a| match a {
                    Term::Const(c) => c.clone(),
                    Term::Var(v) => tuple[vars.iter().position(|x| x == v).expect("head var")].clone(),
                })
                .collect();
            (full, iv)
        })
        .collect();
    TemporalTable::from_rows(pred_attrs(head.arity()), rows)
}

fn empty_head(head: Option<&Atom>) -> TemporalTable {
    TemporalTable::empty(pred_attrs(head.map(|h| h.arity()).unwrap_or(0)))
}

/// Exact SINCE (`past`) or UNTIL result for one tuple pair, given maximal
/// intervals `a` of the left operand and `b` of the right one.
pub(crate) fn since_until(a: &[Interval], b: &[Interval], r: &Range, past: bool) -> Vec<Interval> {
    let closures: Vec<Interval> = a.iter().map(|x| x.closure()).collect();
    let mut out = Vec::new();
    let mut start = 0;
    for i2 in b {
        while start < closures.len() && closures[start].hi() < i2.lo() {
            start += 1;
        }
        for c in &closures[start..] {
            if c.lo() > i2.hi() {
                break;
            }
            let Some(x) = c.intersect(i2) else { continue };
            let shifted = if past { x.plus_o(r) } else { x.minus_o(r) }.expect("finite range start");
            if let Some(y) = shifted.intersect(c) {
                out.push(y);
            }
        }
    }
    coalesce_unsorted(out)
}

fn unary(op: UnaryOp, iv: &Interval, r: &Range) -> Option<Interval> {
    match op {
        UnaryOp::BoxMinus => iv.plus_c(r),
        UnaryOp::BoxPlus => iv.minus_c(r),
        UnaryOp::DiamondMinus => Some(iv.plus_o(r).expect("finite range start")),
        UnaryOp::DiamondPlus => Some(iv.minus_o(r).expect("finite range start")),
    }
}

fn eval_term<'a>(t: &'a Term, attrs: &[String], row: &'a [Constant]) -> &'a Constant {
    match t {
        Term::Const(c) => c,
        Term::Var(v) => &row[attrs.iter().position(|a| a == v).expect("bound variable")],
    }
}

/// All firings of one classified rule, as a coalesced table for its head
/// (zero attributes for ⊥).
pub fn apply_shape(shape: &Shape, tables: &BTreeMap<String, TemporalTable>) -> Result<TemporalTable, EngineError> {
    match shape {
        Shape::Horn { head, atoms, neqs } => {
            let mut acc: Option<TemporalTable> = None;
            for a in atoms {
                let t = select(tables.get(&a.pred), a);
                acc = Some(match acc {
                    None => t,
                    Some(prev) => temporal_join(&prev, &t)?,
                });
                if acc.as_ref().is_some_and(|t| t.is_empty()) {
                    return Ok(empty_head(head.as_ref()));
                }
            }
            let acc = acc.unwrap_or_else(TemporalTable::top);
            let acc = if neqs.is_empty() {
                acc
            } else {
                let attrs = acc.attrs().to_vec();
                let rows = acc
                    .into_rows()
                    .into_iter()
                    .filter(|(row, _)| {
                        neqs.iter().all(|(x, y)| eval_term(x, &attrs, row) != eval_term(y, &attrs, row))
                    })
                    .collect();
                TemporalTable::from_rows(attrs, rows)?
            };
            finish(head.as_ref(), acc)
        }
        Shape::Since { head, left, range, right } | Shape::Until { head, left, range, right } => {
            let past = matches!(shape, Shape::Since { .. });
            let lt = operand_table(left, tables);
            let rt = operand_table(right, tables);
            let joined = join_with(&lt, &rt, |a, b| since_until(a, b, range, past))?;
            let vars = head.vars();
            let mut t = project(&joined, &vars)?;
            if range.interval().contains(&TimePoint::zero()) {
                // zero distance: the right operand alone suffices
                let direct = if vars.iter().all(|v| rt.attrs().contains(v)) {
                    project(&rt, &vars)?
                } else {
                    project(&join_with(&lt, &rt, |_, b| b.to_vec())?, &vars)?
                };
                t = union_tables(&t, &direct)?;
            }
            finish(Some(head), t)
        }
        Shape::Unary { head, op, range, body } => {
            let bt = operand_table(body, tables);
            let attrs = bt.attrs().to_vec();
            let groups = bt
                .groups()?
                .into_iter()
                .filter_map(|(t, ivs)| {
                    let out = coalesce_unsorted(ivs.iter().filter_map(|iv| unary(*op, iv, range)).collect());
                    (!out.is_empty()).then_some((t, out))
                })
                .collect();
            finish(Some(head), TemporalTable::from_groups(attrs, groups))
        }
    }
}

pub fn apply_rule(rule: &Rule, tables: &BTreeMap<String, TemporalTable>) -> Result<TemporalTable, EngineError> {
    let s = classify(rule).ok_or_else(|| EngineError::NotNormal(rule.to_string()))?;
    apply_shape(&s, tables)
}

pub(crate) fn shapes(p: &Program) -> Result<Vec<Shape>, EngineError> {
    p.rules
        .iter()
        .map(|r| classify(r).ok_or_else(|| EngineError::NotNormal(r.to_string())))
        .collect()
}

/// Program and data signature, checking arities agree.
pub(crate) fn joint_signature(p: &Program, d: &DataInstance) -> Result<BTreeMap<String, usize>, EngineError> {
    let mut sig = p.signature();
    for f in &d.facts {
        let n = *sig.entry(f.pred.clone()).or_insert(f.args.len());
        if n != f.args.len() {
            return Err(EngineError::Arity { pred: f.pred.clone(), expected: n, found: f.args.len() });
        }
    }
    Ok(sig)
}

/// Materialises the canonical model of a nonrecursive program stratum by
/// stratum; predicates of equal depth are evaluated in parallel.
pub fn eval_nonrecursive(p: &Program, d: &DataInstance) -> Result<CanonicalModel, EngineError> {
    let shapes = shapes(p)?;
    let sig = joint_signature(p, d)?;
    let depth = depths(p)?;
    let mut levels: BTreeMap<usize, BTreeSet<Option<String>>> = BTreeMap::new();
    for s in &shapes {
        let key = s.head().map(|h| h.pred.clone());
        let level = match &key {
            Some(pred) => depth[pred],
            None => s.body_atoms().iter().map(|a| depth[&a.pred] + 1).max().unwrap_or(0),
        };
        levels.entry(level).or_default().insert(key);
    }
    let mut model = CanonicalModel::from_data(d, &sig)?;
    for keys in levels.values() {
        let keys: Vec<&Option<String>> = keys.iter().collect();
        let tables = &model.tables;
        let results = keys
            .par_iter()
            .map(|key| {
                let mut acc = match key {
                    Some(pred) => tables[pred].clone(),
                    None => TemporalTable::empty(Vec::new()),
                };
                for s in shapes.iter().filter(|s| s.head().map(|h| &h.pred) == key.as_ref()) {
                    acc = union_tables(&acc, &apply_shape(s, tables)?)?;
                }
                Ok(((*key).clone(), coalesce_table(&acc)?))
            })
            .collect::<Result<Vec<_>, EngineError>>()?;
        for (key, table) in results {
            match key {
                Some(pred) => {
                    model.tables.insert(pred, table);
                }
                None => {
                    if let Some((_, iv)) = table.rows().first() {
                        model.witness = Some(iv.clone());
                    }
                }
            }
        }
        if model.witness.is_some() {
            break;
        }
    }
    Ok(model)
}

/// Answers to `q`: bindings of the query's variables with maximal intervals,
/// sorted by tuple then ≺.
pub fn answers(m: &CanonicalModel, q: &Query) -> Result<Vec<(Tuple, Interval)>, EngineError> {
    let t = m.table(&q.goal.pred).ok_or_else(|| EngineError::UnknownPredicate(q.goal.pred.clone()))?;
    if t.attrs().len() != q.goal.arity() {
        return Err(EngineError::Arity { pred: q.goal.pred.clone(), expected: t.attrs().len(), found: q.goal.arity() });
    }
    let sel = select(Some(t), &q.goal);
    let groups = sel.groups()?;
    Ok(TemporalTable::from_groups(sel.attrs().to_vec(), groups).into_rows())
}

/// Whether `(c, ι)` is a certain answer to `q`.
pub fn certain_answer(m: &CanonicalModel, q: &Query, c: &[Constant], iv: &Interval) -> Result<bool, EngineError> {
    let rows = answers(m, q)?;
    if c.len() != q.vars().len() {
        return Err(EngineError::Arity { pred: q.goal.pred.clone(), expected: q.vars().len(), found: c.len() });
    }
    if !m.is_consistent() {
        return Ok(true);
    }
    Ok(rows.iter().any(|(t, j)| t.as_slice() == c && iv.is_subset_of(j)))
}

fn fresh_pred(sig: &BTreeMap<String, usize>, base: &str) -> String {
    let mut name = base.to_string();
    let mut k = 0;
    while sig.contains_key(&name) {
        k += 1;
        name = format!("{base}{k}");
    }
    name
}

/// A point strictly inside `iv` (the point itself when punctual).
fn interior_point(iv: &Interval) -> TimePoint {
    match (iv.lo().finite(), iv.hi().finite()) {
        (Some(a), Some(b)) => TimePoint::Finite(a.add(b).half()),
        (Some(_), None) => iv.lo().checked_add(&TimePoint::int(1)).expect("finite"),
        (None, Some(_)) => iv.hi().checked_sub(&TimePoint::int(1)).expect("finite"),
        (None, None) => TimePoint::zero(),
    }
}

/// Decides a certain answer by checking inconsistency of the program
/// extended with `⊥ ← P ∧ ⊟ϱ Q(c) ∧ ⊞ϱ′ Q(c)` and the fact `P@[s,s]`.
pub fn answer_via_reduction(
    p: &Program,
    d: &DataInstance,
    q: &Query,
    c: &[Constant],
    iv: &Interval,
) -> Result<bool, EngineError> {
    if c.len() != q.vars().len() {
        return Err(EngineError::Arity { pred: q.goal.pred.clone(), expected: q.vars().len(), found: c.len() });
    }
    let sig = joint_signature(p, d)?;
    if !sig.contains_key(&q.goal.pred) {
        return Err(EngineError::UnknownPredicate(q.goal.pred.clone()));
    }
    let probe = fresh_pred(&sig, "AnswerProbe");
    let goal = Atom::new(&q.goal.pred, q.instantiate(c).into_iter().map(Term::Const).collect());
    let s = interior_point(iv);
    let probe_atom = Atom::new(&probe, Vec::new());
    let mut body = vec![BodyLiteral::Atom(probe_atom)];
    if iv.is_punctual() {
        body.push(BodyLiteral::Atom(goal));
    } else {
        let past = Interval::make(
            TimePoint::zero(),
            true,
            s.checked_sub(iv.lo()).expect("finite interior point"),
            iv.lo_closed(),
        )
        .expect("nonempty past range");
        let fut = Interval::make(
            TimePoint::zero(),
            false,
            iv.hi().checked_sub(&s).expect("finite interior point"),
            iv.hi_closed(),
        )
        .expect("nonempty future range");
        body.push(BodyLiteral::BoxMinus(Range::new(past)?, Box::new(BodyLiteral::Atom(goal.clone()))));
        body.push(BodyLiteral::BoxPlus(Range::new(fut)?, Box::new(BodyLiteral::Atom(goal))));
    }
    let mut rules = p.rules.clone();
    rules.push(Rule::new(HeadAtom::Bot, body));
    let p2 = normalize(&Program::new(rules));
    let mut facts = d.facts.clone();
    facts.push(Fact::new(&probe, Vec::new(), Interval::point(s)));
    let m = eval_nonrecursive(&p2, &DataInstance::new(facts))?;
    Ok(!m.is_consistent())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: &str) -> Interval {
        Interval::parse(s).unwrap()
    }

    fn run(prog: &str, data: &str) -> CanonicalModel {
        let p = normalize(&parse_program(prog).unwrap());
        eval_nonrecursive(&p, &parse_data(data).unwrap()).unwrap()
    }

    fn intervals(m: &CanonicalModel, pred: &str) -> Vec<Interval> {
        m.table(pred).unwrap().rows().iter().map(|(_, i)| i.clone()).collect()
    }

    #[test]
    fn since_example() {
        let m = run("P(v) :- P1(v) SINCE(0,inf) P2(v).", "P1(a)@[5,10].\nP2(a)@[3,6].");
        assert_eq!(intervals(&m, "P"), vec![iv("(5,10]")]);
    }

    #[test]
    fn since_zero_distance() {
        let m = run("P(v) :- P1(v) SINCE[0,0] P2(v).", "P2(a)@[3,6].");
        assert_eq!(intervals(&m, "P"), vec![iv("[3,6]")]);
    }

    #[test]
    fn future_box_over_infinite() {
        let m = run("Q(v) :- ALWAYS+(0,inf) P(v).", "P(a)@(0,inf).");
        assert_eq!(intervals(&m, "Q"), vec![iv("[0,inf)")]);
    }

    #[test]
    fn split_box() {
        let m = run("Q(v) :- ALWAYS-[0,1m] Below(v).", "Below(tb0)@[13:00:17,13:01:25).");
        assert_eq!(intervals(&m, "Q"), vec![Interval::parse("[13:01:17,13:01:25)").unwrap()]);
    }

    #[test]
    fn bottom_and_neq() {
        let m = run("BOT :- P(x), P(y), x != y.", "P(a)@[0,1].\nP(b)@[1,2].");
        assert_eq!(m.witness(), Some(&iv("[1,1]")));
        let m = run("BOT :- P(x), P(y), x != y.", "P(a)@[0,1].\nP(b)@(1,2].");
        assert!(m.is_consistent());
    }

    #[test]
    fn answers_and_certainty() {
        let p = normalize(&parse_program("Q(x) :- ALWAYS-[1,1] P(x).").unwrap());
        let d = parse_data("P(a)@[0,2).\nP(b)@[5,5].").unwrap();
        let m = eval_nonrecursive(&p, &d).unwrap();
        let q = parse_query("Q(x)").unwrap();
        let a = answers(&m, &q).unwrap();
        assert_eq!(a, vec![(vec![Constant::new("a")], iv("[1,3)")), (vec![Constant::new("b")], iv("[6,6]"))]);
        let c = [Constant::new("a")];
        for (s, want) in [("[1,3)", true), ("[1,3]", false), ("(2,3)", true), ("[2,2]", true), ("[0,1]", false)] {
            assert_eq!(certain_answer(&m, &q, &c, &iv(s)).unwrap(), want, "{s}");
            assert_eq!(answer_via_reduction(&p, &d, &q, &c, &iv(s)).unwrap(), want, "{s}");
        }
        assert!(answers(&m, &parse_query("Nope(x)").unwrap()).is_err());
    }

    #[test]
    fn recursion_is_rejected() {
        let p = parse_program("P :- ALWAYS-[1,1] P.").unwrap();
        assert!(matches!(eval_nonrecursive(&p, &DataInstance::default()), Err(EngineError::Analysis(_))));
    }
}
