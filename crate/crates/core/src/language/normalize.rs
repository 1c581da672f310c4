//! Normal-form transformation and rule shape classification.

use super::ast::*;
use super::parser::is_fresh_name;
use crate::temporal::Range;

/// Operand of a temporal normal-form rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Atom(Atom),
    Top,
}

impl Operand {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Operand::Atom(a) => Some(a),
            Operand::Top => None,
        }
    }

    pub fn vars(&self) -> Vec<String> {
        self.atom().map(|a| a.vars()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    BoxPlus,
    BoxMinus,
    DiamondPlus,
    DiamondMinus,
}

/// The rule shapes accepted by the evaluators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Shape {
    /// `P ← P1 ∧ … ∧ Pn` (head `None` is ⊥), with inequality side conditions.
    Horn { head: Option<Atom>, atoms: Vec<Atom>, neqs: Vec<(Term, Term)> },
    Since { head: Atom, left: Operand, range: Range, right: Operand },
    Until { head: Atom, left: Operand, range: Range, right: Operand },
    Unary { head: Atom, op: UnaryOp, range: Range, body: Operand },
}

impl Shape {
    pub fn head(&self) -> Option<&Atom> {
        match self {
            Shape::Horn { head, .. } => head.as_ref(),
            Shape::Since { head, .. } | Shape::Until { head, .. } | Shape::Unary { head, .. } => Some(head),
        }
    }

    pub fn body_atoms(&self) -> Vec<&Atom> {
        match self {
            Shape::Horn { atoms, .. } => atoms.iter().collect(),
            Shape::Since { left, right, .. } | Shape::Until { left, right, .. } => {
                left.atom().into_iter().chain(right.atom()).collect()
            }
            Shape::Unary { body, .. } => body.atom().into_iter().collect(),
        }
    }
}

fn operand(l: &BodyLiteral) -> Option<Operand> {
    match l {
        BodyLiteral::Atom(a) => Some(Operand::Atom(a.clone())),
        BodyLiteral::Top => Some(Operand::Top),
        _ => None,
    }
}

/// Classifies a rule into one of the normal-form shapes, allowing diamonds
/// (used by the SQL path) but not requiring punctual/open ranges.
pub fn classify(rule: &Rule) -> Option<Shape> {
    if !rule.head_ops.is_empty() {
        return None;
    }
    let head = match &rule.head {
        HeadAtom::Atom(a) => Some(a.clone()),
        HeadAtom::Bot => None,
        HeadAtom::Top => return None,
    };
    if rule.body.len() == 1 {
        if let Some(h) = &head {
            let shape = match &rule.body[0] {
                BodyLiteral::Since(a, r, b) => {
                    Some(Shape::Since { head: h.clone(), left: operand(a)?, range: r.clone(), right: operand(b)? })
                }
                BodyLiteral::Until(a, r, b) => {
                    Some(Shape::Until { head: h.clone(), left: operand(a)?, range: r.clone(), right: operand(b)? })
                }
                BodyLiteral::BoxPlus(r, a) => {
                    Some(Shape::Unary { head: h.clone(), op: UnaryOp::BoxPlus, range: r.clone(), body: operand(a)? })
                }
                BodyLiteral::BoxMinus(r, a) => {
                    Some(Shape::Unary { head: h.clone(), op: UnaryOp::BoxMinus, range: r.clone(), body: operand(a)? })
                }
                BodyLiteral::DiamondPlus(r, a) => {
                    Some(Shape::Unary { head: h.clone(), op: UnaryOp::DiamondPlus, range: r.clone(), body: operand(a)? })
                }
                BodyLiteral::DiamondMinus(r, a) => {
                    Some(Shape::Unary { head: h.clone(), op: UnaryOp::DiamondMinus, range: r.clone(), body: operand(a)? })
                }
                _ => None,
            };
            if shape.is_some() {
                return shape;
            }
        }
    }
    let mut atoms = Vec::new();
    let mut neqs = Vec::new();
    let mut saw_top = false;
    for l in &rule.body {
        match l {
            BodyLiteral::Atom(a) => atoms.push(a.clone()),
            BodyLiteral::Top => saw_top = true,
            BodyLiteral::Neq(a, b) => neqs.push((a.clone(), b.clone())),
            _ => return None,
        }
    }
    if atoms.is_empty() && !saw_top {
        return None;
    }
    Some(Shape::Horn { head, atoms, neqs })
}

/// Strict normal form: no diamonds, every range punctual or open.
pub fn normal_shape(rule: &Rule) -> Option<Shape> {
    let s = classify(rule)?;
    let ok = match &s {
        Shape::Horn { .. } => true,
        Shape::Since { range, .. } | Shape::Until { range, .. } => range.is_normal(),
        Shape::Unary { op, range, .. } => matches!(op, UnaryOp::BoxPlus | UnaryOp::BoxMinus) && range.is_normal(),
    };
    ok.then_some(s)
}

pub fn is_normal_form(p: &Program) -> bool {
    p.rules.iter().all(|r| normal_shape(r).is_some())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Split closed/half-open non-punctual ranges into open and punctual parts.
    pub split_ranges: bool,
    /// Keep diamonds as rule shapes instead of rewriting them with ⊤ and SINCE/UNTIL.
    pub keep_diamonds: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions { split_ranges: true, keep_diamonds: false }
    }
}

pub fn normalize(p: &Program) -> Program {
    normalize_with(p, NormalizeOptions::default())
}

/// Normal form for SQL generation: diamonds kept, ranges left whole.
pub fn normalize_for_sql(p: &Program) -> Program {
    normalize_with(p, NormalizeOptions { split_ranges: false, keep_diamonds: true })
}

pub fn normalize_with(p: &Program, opts: NormalizeOptions) -> Program {
    let mut counter = 0usize;
    for pred in p.signature().keys() {
        if is_fresh_name(pred) {
            let n: usize = pred[3..].parse().unwrap_or(0);
            counter = counter.max(n + 1);
        }
    }
    let mut n = Normalizer { counter, out: Vec::new(), opts };
    for r in &p.rules {
        n.rule(r.clone());
    }
    Program::new(n.out)
}

struct Normalizer {
    counter: usize,
    out: Vec<Rule>,
    opts: NormalizeOptions,
}

impl Normalizer {
    fn fresh(&mut self, vars: &[String]) -> Atom {
        let name = format!("_nf{}", self.counter);
        self.counter += 1;
        Atom::new(&name, vars.iter().map(|v| Term::Var(v.clone())).collect())
    }

    fn parts(&self, r: &Range) -> Vec<Range> {
        if self.opts.split_ranges {
            r.split()
        } else {
            vec![r.clone()]
        }
    }

    fn emit(&mut self, head: HeadAtom, body: Vec<BodyLiteral>) {
        self.out.push(Rule::new(head, body));
    }

    fn rule(&mut self, r: Rule) {
        let Rule { mut head_ops, head, body } = r;
        let head = match head {
            HeadAtom::Top => return,
            HeadAtom::Bot => {
                head_ops.clear();
                HeadAtom::Bot
            }
            h => h,
        };
        if !head_ops.is_empty() {
            let op = head_ops.remove(0);
            let HeadAtom::Atom(atom) = &head else { unreachable!("boxes only on atoms") };
            let fresh = self.fresh(&atom.vars());
            self.rule(Rule { head_ops: Vec::new(), head: HeadAtom::Atom(fresh.clone()), body });
            let lit = Box::new(BodyLiteral::Atom(fresh));
            let body = match op {
                HeadOp::BoxPlus(rg) => BodyLiteral::DiamondMinus(rg, lit),
                HeadOp::BoxMinus(rg) => BodyLiteral::DiamondPlus(rg, lit),
            };
            self.rule(Rule { head_ops, head, body: vec![body] });
            return;
        }
        let mut flat = Vec::new();
        flatten(body, &mut flat);
        if let HeadAtom::Atom(h) = &head {
            if flat.len() == 1 && is_temporal(&flat[0]) {
                let lit = flat.pop().expect("one literal");
                self.direct(h.clone(), lit);
                return;
            }
        }
        let body = self.horn_body(flat);
        self.emit(head, body);
    }

    fn horn_body(&mut self, lits: Vec<BodyLiteral>) -> Vec<BodyLiteral> {
        let mut out = Vec::new();
        for l in lits {
            match l {
                BodyLiteral::Neq(..) | BodyLiteral::Atom(_) | BodyLiteral::Top => out.push(l),
                other => out.push(self.atomize(other)),
            }
        }
        if out.iter().any(|l| !matches!(l, BodyLiteral::Top | BodyLiteral::Neq(..))) {
            out.retain(|l| !matches!(l, BodyLiteral::Top));
        } else if !out.iter().any(|l| matches!(l, BodyLiteral::Top)) {
            out.insert(0, BodyLiteral::Top);
        }
        out.dedup();
        out
    }

    /// Replaces a literal by an atom (or ⊤) defined by fresh rules.
    fn atomize(&mut self, l: BodyLiteral) -> BodyLiteral {
        match l {
            BodyLiteral::Atom(_) | BodyLiteral::Top => l,
            BodyLiteral::And(ls) => {
                let f = self.fresh(&BodyLiteral::And(ls.clone()).vars());
                let mut flat = Vec::new();
                flatten(ls, &mut flat);
                let body = self.horn_body(flat);
                self.emit(HeadAtom::Atom(f.clone()), body);
                BodyLiteral::Atom(f)
            }
            BodyLiteral::Neq(..) => unreachable!("inequalities are top-level only"),
            other => {
                let f = self.fresh(&other.vars());
                self.direct(f.clone(), other);
                BodyLiteral::Atom(f)
            }
        }
    }

    /// Emits rules for `head ← lit` where `lit` is a single temporal literal.
    fn direct(&mut self, head: Atom, lit: BodyLiteral) {
        let h = HeadAtom::Atom(head);
        let first = matches!(
            lit,
            BodyLiteral::DiamondMinus(..) | BodyLiteral::Since(..) | BodyLiteral::BoxPlus(..)
        );
        match lit {
            BodyLiteral::DiamondMinus(r, a) | BodyLiteral::DiamondPlus(r, a) => {
                let past = first;
                let x = Box::new(self.atomize(*a));
                for part in self.parts(&r) {
                    let body = match (self.opts.keep_diamonds, past) {
                        (true, true) => BodyLiteral::DiamondMinus(part, x.clone()),
                        (true, false) => BodyLiteral::DiamondPlus(part, x.clone()),
                        (false, true) => BodyLiteral::Since(Box::new(BodyLiteral::Top), part, x.clone()),
                        (false, false) => BodyLiteral::Until(Box::new(BodyLiteral::Top), part, x.clone()),
                    };
                    self.emit(h.clone(), vec![body]);
                }
            }
            BodyLiteral::Since(a, r, b) | BodyLiteral::Until(a, r, b) => {
                let since = first;
                let x = Box::new(self.atomize(*a));
                let y = Box::new(self.atomize(*b));
                for part in self.parts(&r) {
                    let body = if since {
                        BodyLiteral::Since(x.clone(), part, y.clone())
                    } else {
                        BodyLiteral::Until(x.clone(), part, y.clone())
                    };
                    self.emit(h.clone(), vec![body]);
                }
            }
            BodyLiteral::BoxPlus(r, a) | BodyLiteral::BoxMinus(r, a) => {
                let future = first;
                let x = Box::new(self.atomize(*a));
                let wrap = |part: Range| {
                    if future {
                        BodyLiteral::BoxPlus(part, x.clone())
                    } else {
                        BodyLiteral::BoxMinus(part, x.clone())
                    }
                };
                let parts = self.parts(&r);
                if parts.len() == 1 {
                    let body = wrap(parts.into_iter().next().expect("one part"));
                    self.emit(h, vec![body]);
                    return;
                }
                let vars = x.vars();
                let mut conj = Vec::new();
                for part in parts {
                    let g = self.fresh(&vars);
                    self.emit(HeadAtom::Atom(g.clone()), vec![wrap(part)]);
                    conj.push(BodyLiteral::Atom(g));
                }
                self.emit(h, conj);
            }
            _ => unreachable!("direct expects a temporal literal"),
        }
    }
}

fn is_temporal(l: &BodyLiteral) -> bool {
    matches!(
        l,
        BodyLiteral::BoxPlus(..)
            | BodyLiteral::BoxMinus(..)
            | BodyLiteral::DiamondPlus(..)
            | BodyLiteral::DiamondMinus(..)
            | BodyLiteral::Since(..)
            | BodyLiteral::Until(..)
    )
}

fn flatten(ls: Vec<BodyLiteral>, out: &mut Vec<BodyLiteral>) {
    for l in ls {
        match l {
            BodyLiteral::And(inner) => flatten(inner, out),
            other => out.push(other),
        }
    }
}
