//! Direct-semantics interpreter for nonrecursive programs in any syntactic
//! form. Every rule is grounded over the active domain and its body is
//! evaluated as a point set on a grid.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::grid::{Grid, GridSet};
use crate::engine::Tuple;
use crate::language::*;
use crate::temporal::{Interval, Range};

#[derive(Debug, Clone)]
pub struct Interpretation {
    pub tables: BTreeMap<String, BTreeMap<Tuple, GridSet>>,
    pub bottom: GridSet,
}

impl Interpretation {
    pub fn is_consistent(&self) -> bool {
        self.bottom.is_empty()
    }

    /// Maximal intervals per tuple, omitting empty sets.
    pub fn intervals(&self, pred: &str) -> Vec<(Tuple, Interval)> {
        let mut out = Vec::new();
        if let Some(t) = self.tables.get(pred) {
            for (tuple, set) in t {
                for iv in set.to_intervals() {
                    out.push((tuple.clone(), iv));
                }
            }
        }
        out
    }
}

struct Interp {
    grid: Grid,
    tables: BTreeMap<String, BTreeMap<Tuple, GridSet>>,
    ranges: HashMap<String, GridSet>,
}

impl Interp {
    fn range(&mut self, r: &Range) -> GridSet {
        let key = r.to_string();
        if let Some(s) = self.ranges.get(&key) {
            return s.clone();
        }
        let s = self.grid.interval(r.interval());
        self.ranges.insert(key, s.clone());
        s
    }

    fn ground(&self, a: &Atom, b: &HashMap<String, Constant>) -> Tuple {
        a.args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => b[v].clone(),
            })
            .collect()
    }

    fn eval(&mut self, l: &BodyLiteral, b: &HashMap<String, Constant>) -> GridSet {
        match l {
            BodyLiteral::Atom(a) => {
                let t = self.ground(a, b);
                self.tables.get(&a.pred).and_then(|m| m.get(&t)).cloned().unwrap_or_else(|| self.grid.empty())
            }
            BodyLiteral::Top => self.grid.full(),
            BodyLiteral::Neq(x, y) => {
                let v = |t: &Term| match t {
                    Term::Const(c) => c.clone(),
                    Term::Var(v) => b[v].clone(),
                };
                if v(x) != v(y) {
                    self.grid.full()
                } else {
                    self.grid.empty()
                }
            }
            BodyLiteral::BoxPlus(r, a) => {
                let s = self.eval(a, b);
                s.forall_minus(&self.range(r))
            }
            BodyLiteral::BoxMinus(r, a) => {
                let s = self.eval(a, b);
                s.forall_plus(&self.range(r))
            }
            BodyLiteral::DiamondPlus(r, a) => {
                let s = self.eval(a, b);
                s.minus(&self.range(r))
            }
            BodyLiteral::DiamondMinus(r, a) => {
                let s = self.eval(a, b);
                s.plus(&self.range(r))
            }
            BodyLiteral::Since(x, r, y) => {
                let (sx, sy) = (self.eval(x, b), self.eval(y, b));
                GridSet::since(&sx, &self.range(r), &sy)
            }
            BodyLiteral::Until(x, r, y) => {
                let (sx, sy) = (self.eval(x, b), self.eval(y, b));
                GridSet::until(&sx, &self.range(r), &sy)
            }
            BodyLiteral::And(ls) => {
                let mut acc = self.grid.full();
                for l in ls {
                    if acc.is_empty() {
                        break;
                    }
                    acc = acc.intersection(&self.eval(l, b));
                }
                acc
            }
        }
    }

    /// Applies head boxes (outermost first) to the set where the body holds.
    fn head_set(&mut self, ops: &[HeadOp], mut s: GridSet) -> GridSet {
        for op in ops {
            s = match op {
                HeadOp::BoxPlus(r) => s.plus(&self.range(r)),
                HeadOp::BoxMinus(r) => s.minus(&self.range(r)),
            };
        }
        s
    }
}

fn bindings(vars: &[String], domain: &[Constant]) -> Vec<HashMap<String, Constant>> {
    let mut out = vec![HashMap::new()];
    for v in vars {
        let mut next = Vec::with_capacity(out.len() * domain.len());
        for b in &out {
            for c in domain {
                let mut nb = b.clone();
                nb.insert(v.clone(), c.clone());
                next.push(nb);
            }
        }
        out = next;
    }
    out
}

fn rule_vars(r: &Rule) -> Vec<String> {
    let mut vs = Vec::new();
    for l in &r.body {
        l.vars_into(&mut vs);
    }
    vs
}

fn collect_constants(l: &BodyLiteral, out: &mut BTreeSet<Constant>) {
    let mut atoms = Vec::new();
    l.atoms_into(&mut atoms);
    for a in atoms {
        for t in &a.args {
            if let Term::Const(c) = t {
                out.insert(c.clone());
            }
        }
    }
    let mut stack = vec![l];
    while let Some(x) = stack.pop() {
        match x {
            BodyLiteral::Neq(a, b) => {
                for t in [a, b] {
                    if let Term::Const(c) = t {
                        out.insert(c.clone());
                    }
                }
            }
            BodyLiteral::And(ls) => stack.extend(ls),
            _ => {}
        }
    }
}

/// Evaluates `p` on `d` directly from the semantics. `p` must be
/// nonrecursive and every number in `p` and `d` must lie on `grid`.
pub fn interpret(p: &Program, d: &DataInstance, grid: Grid) -> Interpretation {
    let order = topological_order(p).expect("nonrecursive program");
    let mut domain: BTreeSet<Constant> = BTreeSet::new();
    for f in &d.facts {
        domain.extend(f.args.iter().cloned());
    }
    for r in &p.rules {
        for l in &r.body {
            collect_constants(l, &mut domain);
        }
        if let HeadAtom::Atom(a) = &r.head {
            for t in &a.args {
                if let Term::Const(c) = t {
                    domain.insert(c.clone());
                }
            }
        }
    }
    let domain: Vec<Constant> = domain.into_iter().collect();
    let mut it = Interp { grid, tables: BTreeMap::new(), ranges: HashMap::new() };
    for f in &d.facts {
        let s = grid.interval(&f.interval);
        let e = it.tables.entry(f.pred.clone()).or_default().entry(f.args.clone()).or_insert_with(|| grid.empty());
        *e = e.union(&s);
    }
    let mut bottom = grid.empty();
    let heads: Vec<Option<&str>> = order.iter().map(|p| Some(p.as_str())).chain([None]).collect();
    for head in heads {
        for r in p.rules.iter().filter(|r| match (&r.head, head) {
            (HeadAtom::Atom(a), Some(h)) => a.pred == h,
            (HeadAtom::Bot, None) => true,
            _ => false,
        }) {
            for b in bindings(&rule_vars(r), &domain) {
                let mut s = grid.full();
                for l in &r.body {
                    if s.is_empty() {
                        break;
                    }
                    s = s.intersection(&it.eval(l, &b));
                }
                if s.is_empty() {
                    continue;
                }
                match &r.head {
                    HeadAtom::Atom(a) => {
                        let s = it.head_set(&r.head_ops, s);
                        let t = it.ground(a, &b);
                        let e = it.tables.entry(a.pred.clone()).or_default().entry(t).or_insert_with(|| grid.empty());
                        *e = e.union(&s);
                    }
                    HeadAtom::Bot => bottom = bottom.union(&s),
                    HeadAtom::Top => {}
                }
            }
        }
    }
    for tuples in it.tables.values_mut() {
        tuples.retain(|_, s| !s.is_empty());
    }
    Interpretation { tables: it.tables, bottom }
}
