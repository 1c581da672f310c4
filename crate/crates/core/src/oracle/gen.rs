//! Seeded random generators for intervals, tables, programs and data.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::{TemporalTable, Tuple};
use crate::language::*;
use crate::temporal::{Dyadic, Interval, Range, TimePoint};

fn point(units: i64, exp: u32) -> TimePoint {
    TimePoint::Finite(Dyadic::new(BigInt::from(units), exp))
}

/// An interval with endpoints on the `2^-exp` grid within `[lo, hi]` (in
/// grid units); each end is infinite with probability `p_inf`.
pub fn interval<R: Rng>(rng: &mut R, exp: u32, lo: i64, hi: i64, p_inf: f64) -> Interval {
    loop {
        let mut a = rng.gen_range(lo..=hi);
        let mut b = rng.gen_range(lo..=hi);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let l = if rng.gen_bool(p_inf) { TimePoint::NegInf } else { point(a, exp) };
        let h = if rng.gen_bool(p_inf) { TimePoint::PosInf } else { point(b, exp) };
        let punctual = a == b && l.is_finite() && h.is_finite();
        let (lc, hc) = if punctual { (true, true) } else { (rng.gen_bool(0.5), rng.gen_bool(0.5)) };
        if let Some(iv) = Interval::make(l, lc, h, hc) {
            return iv;
        }
    }
}

/// A range with endpoints on the grid within `[0, max]` units; the upper end
/// is infinite with probability `p_inf`, and the range is punctual with
/// probability `p_punct`.
pub fn range<R: Rng>(rng: &mut R, exp: u32, max: i64, p_inf: f64, p_punct: f64) -> Range {
    if rng.gen_bool(p_punct) {
        return Range::punctual(point(rng.gen_range(0..=max), exp));
    }
    loop {
        let mut a = rng.gen_range(0..=max);
        let mut b = rng.gen_range(0..=max);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let h = if rng.gen_bool(p_inf) { TimePoint::PosInf } else { point(b, exp) };
        if let Some(iv) = Interval::make(point(a, exp), rng.gen_bool(0.5), h, rng.gen_bool(0.5)) {
            return Range::new(iv).expect("nonnegative");
        }
    }
}

/// Constants `C0`, `C1`, ….
pub fn constants(n: usize) -> Vec<Constant> {
    (0..n).map(|i| Constant::new(&format!("C{i}"))).collect()
}

/// A table whose rows are sorted by tuple then ≺ (so TOA holds).
pub fn table<R: Rng>(rng: &mut R, arity: usize, consts: usize, rows: usize, exp: u32, span: i64) -> TemporalTable {
    let cs = constants(consts);
    let attrs = (0..arity).map(|i| format!("c{i}")).collect();
    let rows = (0..rows)
        .map(|_| {
            let t: Tuple = (0..arity).map(|_| cs.choose(rng).expect("constants").clone()).collect();
            (t, interval(rng, exp, -span, span, 0.05))
        })
        .collect();
    TemporalTable::from_unsorted(attrs, rows).expect("arity")
}

/// Shape limits for random programs.
#[derive(Debug, Clone)]
pub struct ProgramConfig {
    pub extensional: usize,
    pub intensional: usize,
    pub max_arity: usize,
    pub constants: usize,
    pub rules: usize,
    pub max_nesting: usize,
    /// Grid exponent for all time constants.
    pub exp: u32,
    /// Largest finite range endpoint, in grid units.
    pub range_max: i64,
    pub p_inf_range: f64,
    pub p_bottom: f64,
    pub p_head_box: f64,
    pub p_neq: f64,
    /// Allow diamonds, SINCE/UNTIL and head boxes (otherwise only boxes).
    pub full_syntax: bool,
}

impl Default for ProgramConfig {
    fn default() -> Self {
        ProgramConfig {
            extensional: 2,
            intensional: 2,
            max_arity: 2,
            constants: 2,
            rules: 4,
            max_nesting: 2,
            exp: 2,
            range_max: 8,
            p_inf_range: 0.15,
            p_bottom: 0.1,
            p_head_box: 0.15,
            p_neq: 0.1,
            full_syntax: true,
        }
    }
}

/// A random program with its predicate arities. Intensional predicates are
/// numbered so that each rule only uses lower-numbered predicates, which
/// keeps the program nonrecursive.
#[derive(Debug, Clone)]
pub struct RandomProgram {
    pub program: Program,
    pub arities: BTreeMap<String, usize>,
    pub extensional: Vec<String>,
    pub intensional: Vec<String>,
}

struct ProgramGen<'a, R: Rng> {
    rng: &'a mut R,
    cfg: &'a ProgramConfig,
    preds: Vec<(String, usize)>,
    consts: Vec<Constant>,
}

const VARS: [&str; 3] = ["x", "y", "z"];

impl<R: Rng> ProgramGen<'_, R> {
    fn term(&mut self, vars: &[&str]) -> Term {
        if vars.is_empty() || self.rng.gen_bool(0.15) {
            Term::Const(self.consts.choose(self.rng).expect("constants").clone())
        } else {
            Term::var(vars.choose(self.rng).expect("vars"))
        }
    }

    fn atom(&mut self, below: usize, vars: &[&str]) -> Atom {
        let (name, arity) = self.preds[self.rng.gen_range(0..below)].clone();
        let args = (0..arity).map(|_| self.term(vars)).collect();
        Atom::new(&name, args)
    }

    fn range(&mut self) -> Range {
        range(self.rng, self.cfg.exp, self.cfg.range_max, self.cfg.p_inf_range, 0.25)
    }

    fn literal(&mut self, below: usize, vars: &[&str], depth: usize) -> BodyLiteral {
        let choice = if depth == 0 { 0 } else { self.rng.gen_range(0..if self.cfg.full_syntax { 9 } else { 4 }) };
        let sub = |g: &mut Self, vars: &[&str]| Box::new(g.literal(below, vars, depth - 1));
        match choice {
            0 | 1 => BodyLiteral::Atom(self.atom(below, vars)),
            2 => BodyLiteral::BoxMinus(self.range(), sub(self, vars)),
            3 => BodyLiteral::BoxPlus(self.range(), sub(self, vars)),
            4 => BodyLiteral::DiamondMinus(self.range(), sub(self, vars)),
            5 => BodyLiteral::DiamondPlus(self.range(), sub(self, vars)),
            6 | 7 => {
                let right = self.literal(below, vars, depth - 1);
                let rv = right.vars();
                let rv: Vec<&str> = rv.iter().map(|s| s.as_str()).collect();
                let left = if rv.is_empty() || self.rng.gen_bool(0.2) {
                    BodyLiteral::Top
                } else {
                    self.literal(below, &rv, depth - 1)
                };
                if choice == 6 {
                    BodyLiteral::Since(Box::new(left), self.range(), Box::new(right))
                } else {
                    BodyLiteral::Until(Box::new(left), self.range(), Box::new(right))
                }
            }
            _ => BodyLiteral::And(vec![self.literal(below, vars, depth - 1), self.literal(below, vars, depth - 1)]),
        }
    }

    fn rule(&mut self, head_index: Option<usize>) -> Rule {
        let below = head_index.unwrap_or(self.preds.len());
        let nvars = self.rng.gen_range(0..=VARS.len());
        let vars: Vec<&str> = VARS[..nvars].to_vec();
        let n = self.rng.gen_range(1..=3);
        let mut body: Vec<BodyLiteral> = Vec::new();
        for _ in 0..n {
            let d = self.rng.gen_range(0..=self.cfg.max_nesting);
            body.push(self.literal(below, &vars, d));
        }
        let mut bound = std::collections::BTreeSet::new();
        for l in &body {
            l.bound_vars_into(&mut bound);
        }
        let bound: Vec<String> = bound.into_iter().collect();
        if bound.len() >= 2 && self.rng.gen_bool(self.cfg.p_neq) {
            body.push(BodyLiteral::Neq(Term::Var(bound[0].clone()), Term::Var(bound[1].clone())));
        }
        let mut all = Vec::new();
        for l in &body {
            l.vars_into(&mut all);
        }
        let bound_refs: Vec<&str> = all.iter().map(|s| s.as_str()).collect();
        match head_index {
            None => Rule::new(HeadAtom::Bot, body),
            Some(i) => {
                let (name, arity) = self.preds[i].clone();
                let args = (0..arity).map(|_| self.term(&bound_refs)).collect();
                let mut r = Rule::new(HeadAtom::Atom(Atom::new(&name, args)), body);
                if self.cfg.full_syntax && self.rng.gen_bool(self.cfg.p_head_box) {
                    let rg = self.range();
                    if rg.hi().is_finite() {
                        r.head_ops.push(if self.rng.gen_bool(0.5) { HeadOp::BoxPlus(rg) } else { HeadOp::BoxMinus(rg) });
                    }
                }
                r
            }
        }
    }
}

pub fn program<R: Rng>(rng: &mut R, cfg: &ProgramConfig) -> RandomProgram {
    let mut preds = Vec::new();
    let mut extensional = Vec::new();
    let mut intensional = Vec::new();
    for i in 0..cfg.extensional {
        let name = format!("E{i}");
        preds.push((name.clone(), rng.gen_range(0..=cfg.max_arity)));
        extensional.push(name);
    }
    for i in 0..cfg.intensional {
        let name = format!("P{i}");
        preds.push((name.clone(), rng.gen_range(0..=cfg.max_arity)));
        intensional.push(name);
    }
    let arities: BTreeMap<String, usize> = preds.iter().cloned().collect();
    let consts = constants(cfg.constants);
    let mut g = ProgramGen { rng, cfg, preds, consts };
    let mut rules = Vec::new();
    for k in 0..cfg.rules {
        // every intensional predicate gets at least one rule when possible
        let i = if k < cfg.intensional { k } else { g.rng.gen_range(0..cfg.intensional) };
        rules.push(g.rule(Some(cfg.extensional + i)));
    }
    if g.rng.gen_bool(cfg.p_bottom) {
        rules.push(g.rule(None));
    }
    RandomProgram { program: Program::new(rules), arities, extensional, intensional }
}

/// Facts over the extensional predicates of `rp`, endpoints within
/// `[0, span]` grid units.
pub fn data<R: Rng>(rng: &mut R, rp: &RandomProgram, consts: usize, facts: usize, exp: u32, span: i64) -> DataInstance {
    let cs = constants(consts);
    let mut out = Vec::new();
    for _ in 0..facts {
        let pred = rp.extensional.choose(rng).expect("extensional predicates");
        let arity = rp.arities[pred];
        let args = (0..arity).map(|_| cs.choose(rng).expect("constants").clone()).collect();
        out.push(Fact::new(pred, args, interval(rng, exp, 0, span, 0.08)));
    }
    DataInstance::new(out)
}
