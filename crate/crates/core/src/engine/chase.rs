//! Reference chase: rounds of naive rule firings over individual facts,
//! followed by pairwise coalescing.

use std::collections::{BTreeMap, HashMap};

use super::eval::{joint_signature, pred_attrs, shapes};
use super::table::{TemporalTable, Tuple};
use super::{CanonicalModel, EngineError};
use crate::language::*;
use crate::temporal::{Interval, Range, TimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalStatus {
    Fixpoint,
    CapReached(usize),
    Inconsistent,
}

/// Default round cap: ten times the number of rules and facts.
pub fn default_cap(p: &Program, d: &DataInstance) -> usize {
    10 * (p.rules.len() + d.facts.len()).max(1)
}

type Store = BTreeMap<String, BTreeMap<Tuple, Vec<Interval>>>;
type Binding = HashMap<String, Constant>;

/// Repeatedly merges any two mergeable intervals.
pub(crate) fn naive_coalesce(mut v: Vec<Interval>) -> Vec<Interval> {
    let mut changed = true;
    while changed {
        changed = false;
        let mut i = 0;
        while i < v.len() {
            let mut j = i + 1;
            while j < v.len() {
                if let Some(u) = v[i].union_if_interval(&v[j]) {
                    v[i] = u;
                    v.swap_remove(j);
                    changed = true;
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
    }
    v.sort();
    v
}

/// Adds `iv` to a sorted list of pairwise unmergeable intervals, merging it
/// with the neighbours it touches.
pub(crate) fn insert_coalesced(v: &mut Vec<Interval>, iv: Interval) {
    let pos = v.partition_point(|x| x < &iv);
    let mut lo = pos;
    let mut merged = iv;
    while lo > 0 {
        match v[lo - 1].union_if_interval(&merged) {
            Some(u) => {
                merged = u;
                lo -= 1;
            }
            None => break,
        }
    }
    let mut hi = pos;
    while hi < v.len() {
        match v[hi].union_if_interval(&merged) {
            Some(u) => {
                merged = u;
                hi += 1;
            }
            None => break,
        }
    }
    v.splice(lo..hi, [merged]);
}

/// The part of a sorted list of disjoint intervals that can meet `iv`.
fn overlapping<'a>(v: &'a [Interval], iv: &Interval) -> &'a [Interval] {
    let start = v.partition_point(|x| x.hi() < iv.lo() || (x.hi() == iv.lo() && !(x.hi_closed() && iv.lo_closed())));
    let end = start + v[start..].partition_point(|x| x.lo() < iv.hi() || (x.lo() == iv.hi() && x.lo_closed() && iv.hi_closed()));
    &v[start..end]
}

fn unify(atom: &Atom, tuple: &[Constant], b: &mut Binding) -> Option<Vec<String>> {
    if atom.args.len() != tuple.len() {
        return None;
    }
    let mut added = Vec::new();
    for (t, c) in atom.args.iter().zip(tuple) {
        let ok = match t {
            Term::Const(k) => k == c,
            Term::Var(v) => match b.get(v) {
                Some(x) => x == c,
                None => {
                    b.insert(v.clone(), c.clone());
                    added.push(v.clone());
                    true
                }
            },
        };
        if !ok {
            for v in &added {
                b.remove(v);
            }
            return None;
        }
    }
    Some(added)
}

fn ground(head: &Atom, b: &Binding) -> Option<Tuple> {
    head.args
        .iter()
        .map(|t| match t {
            Term::Const(c) => Some(c.clone()),
            Term::Var(v) => b.get(v).cloned(),
        })
        .collect()
}

fn term_value<'a>(t: &'a Term, b: &'a Binding) -> &'a Constant {
    match t {
        Term::Const(c) => c,
        Term::Var(v) => &b[v],
    }
}

/// Facts matching an operand: `⊤` is the single empty fact over the line.
fn operand_facts<'a>(o: &'a Operand, s: &'a Store) -> Vec<(&'a Atom, Tuple, &'a Interval)> {
    static EMPTY: std::sync::OnceLock<(Atom, Interval)> = std::sync::OnceLock::new();
    match o {
        Operand::Top => {
            let (a, i) = EMPTY.get_or_init(|| (Atom::new("⊤", Vec::new()), Interval::everything()));
            vec![(a, Vec::new(), i)]
        }
        Operand::Atom(a) => s
            .get(&a.pred)
            .into_iter()
            .flatten()
            .flat_map(|(t, ivs)| ivs.iter().map(move |iv| (a, t.clone(), iv)))
            .collect(),
    }
}

struct Round<'a> {
    store: &'a Store,
    out: Vec<(Option<String>, Tuple, Interval)>,
}

impl Round<'_> {
    fn emit(&mut self, head: Option<&Atom>, b: &Binding, iv: Interval) {
        match head {
            None => self.out.push((None, Vec::new(), iv)),
            Some(h) => {
                if let Some(t) = ground(h, b) {
                    self.out.push((Some(h.pred.clone()), t, iv));
                }
            }
        }
    }

    fn horn(&mut self, head: Option<&Atom>, atoms: &[Atom], neqs: &[(Term, Term)], b: &mut Binding, iv: Interval) {
        let Some((first, rest)) = atoms.split_first() else {
            if neqs.iter().all(|(x, y)| term_value(x, b) != term_value(y, b)) {
                self.emit(head, b, iv);
            }
            return;
        };
        let Some(facts) = self.store.get(&first.pred) else { return };
        for (t, ivs) in facts {
            let Some(added) = unify(first, t, b) else { continue };
            for j in overlapping(ivs, &iv) {
                if let Some(x) = iv.intersect(j) {
                    self.horn(head, rest, neqs, b, x);
                }
            }
            for v in added {
                b.remove(&v);
            }
        }
    }

    fn temporal(&mut self, head: &Atom, left: &Operand, r: &Range, right: &Operand, past: bool) {
        let zero = r.interval().contains(&TimePoint::zero());
        let rights = operand_facts(right, self.store);
        let lefts = operand_facts(left, self.store);
        let mut b = Binding::new();
        for (ra, rt, i2) in &rights {
            let Some(radded) = unify(ra, rt, &mut b) else { continue };
            if zero && ground(head, &b).is_some() {
                self.emit(Some(head), &b, (*i2).clone());
            }
            for (la, lt, i1) in &lefts {
                let Some(ladded) = unify(la, lt, &mut b) else { continue };
                if zero {
                    self.emit(Some(head), &b, (*i2).clone());
                }
                let c = i1.closure();
                if let Some(x) = c.intersect(i2) {
                    let y = if past { x.plus_o(r) } else { x.minus_o(r) }.expect("finite range start");
                    if let Some(z) = y.intersect(&c) {
                        self.emit(Some(head), &b, z);
                    }
                }
                for v in ladded {
                    b.remove(&v);
                }
            }
            for v in radded {
                b.remove(&v);
            }
        }
    }

    fn unary(&mut self, head: &Atom, op: UnaryOp, r: &Range, body: &Operand) {
        let mut b = Binding::new();
        for (a, t, iv) in operand_facts(body, self.store) {
            let Some(added) = unify(a, &t, &mut b) else { continue };
            let res = match op {
                UnaryOp::BoxMinus => iv.plus_c(r),
                UnaryOp::BoxPlus => iv.minus_c(r),
                UnaryOp::DiamondMinus => iv.plus_o(r).ok(),
                UnaryOp::DiamondPlus => iv.minus_o(r).ok(),
            };
            if let Some(x) = res {
                self.emit(Some(head), &b, x);
            }
            for v in added {
                b.remove(&v);
            }
        }
    }
}

/// Runs up to `cap` rounds. Every fact in the result is entailed; the model
/// is complete when the status is [`EvalStatus::Fixpoint`].
pub fn chase(p: &Program, d: &DataInstance, cap: usize) -> Result<(CanonicalModel, EvalStatus), EngineError> {
    let shapes = shapes(p)?;
    let sig = joint_signature(p, d)?;
    let mut store: Store = sig.keys().map(|k| (k.clone(), BTreeMap::new())).collect();
    for f in &d.facts {
        store.get_mut(&f.pred).expect("in signature").entry(f.args.clone()).or_default().push(f.interval.clone());
    }
    for tuples in store.values_mut() {
        for ivs in tuples.values_mut() {
            *ivs = naive_coalesce(std::mem::take(ivs));
        }
    }
    let mut status = EvalStatus::CapReached(cap);
    let mut witness = None;
    for _ in 0..cap {
        let mut round = Round { store: &store, out: Vec::new() };
        for s in &shapes {
            match s {
                Shape::Horn { head, atoms, neqs } => {
                    round.horn(head.as_ref(), atoms, neqs, &mut Binding::new(), Interval::everything())
                }
                Shape::Since { head, left, range, right } => round.temporal(head, left, range, right, true),
                Shape::Until { head, left, range, right } => round.temporal(head, left, range, right, false),
                Shape::Unary { head, op, range, body } => round.unary(head, *op, range, body),
            }
        }
        let derived = round.out;
        let mut next = store.clone();
        let mut bottom = Vec::new();
        for (pred, t, iv) in derived {
            match pred {
                None => bottom.push(iv),
                Some(pred) => insert_coalesced(next.get_mut(&pred).expect("in signature").entry(t).or_default(), iv),
            }
        }
        let done = next == store;
        store = next;
        if !bottom.is_empty() {
            witness = naive_coalesce(bottom).into_iter().next();
            status = EvalStatus::Inconsistent;
            break;
        }
        if done {
            status = EvalStatus::Fixpoint;
            break;
        }
    }
    let tables = store
        .into_iter()
        .map(|(pred, tuples)| {
            let rows = tuples.into_iter().flat_map(|(t, ivs)| ivs.into_iter().map(move |iv| (t.clone(), iv))).collect();
            let t = TemporalTable::from_rows(pred_attrs(sig[&pred]), rows).expect("arity checked");
            (pred, t)
        })
        .collect();
    Ok((CanonicalModel::from_parts(tables, witness), status))
}
