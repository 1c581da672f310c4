use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::temporal::{Interval, Range, TimeFormat, TimePoint};

/// An individual constant; compared by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constant(Arc<str>);

impl Constant {
    pub fn new(name: &str) -> Constant {
        Constant(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether the name can be written without quotes in data files.
    fn bare_ok(&self) -> bool {
        let s = self.as_str();
        let Some(first) = s.chars().next() else { return false };
        s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && first != '_'
            && (!first.is_ascii_digit() || s.chars().all(|c| c.is_ascii_digit()))
            && !crate::language::parser::is_keyword(s)
    }

    /// Rendering valid in both program and data syntax.
    pub fn program_form(&self) -> String {
        let first = self.as_str().chars().next().unwrap_or('a');
        if self.bare_ok() && (first.is_ascii_uppercase() || first.is_ascii_digit()) {
            self.as_str().to_string()
        } else {
            quote(self.as_str())
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bare_ok() {
            write!(f, "{}", self.as_str())
        } else {
            write!(f, "{}", quote(self.as_str()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(Constant),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(Constant::new(name))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::Const(c) => write!(f, "{}", c.program_form()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom { pred: pred.to_string(), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Distinct variables in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in &self.args {
            if let Term::Var(v) = t {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(|t| t.to_string()).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyLiteral {
    Atom(Atom),
    Top,
    Neq(Term, Term),
    BoxPlus(Range, Box<BodyLiteral>),
    BoxMinus(Range, Box<BodyLiteral>),
    DiamondPlus(Range, Box<BodyLiteral>),
    DiamondMinus(Range, Box<BodyLiteral>),
    Since(Box<BodyLiteral>, Range, Box<BodyLiteral>),
    Until(Box<BodyLiteral>, Range, Box<BodyLiteral>),
    And(Vec<BodyLiteral>),
}

impl BodyLiteral {
    pub fn vars_into(&self, out: &mut Vec<String>) {
        let mut push = |v: &String| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            BodyLiteral::Atom(a) => a.vars().iter().for_each(&mut push),
            BodyLiteral::Top => {}
            BodyLiteral::Neq(a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        push(v);
                    }
                }
            }
            BodyLiteral::BoxPlus(_, l)
            | BodyLiteral::BoxMinus(_, l)
            | BodyLiteral::DiamondPlus(_, l)
            | BodyLiteral::DiamondMinus(_, l) => l.vars_into(out),
            BodyLiteral::Since(a, _, b) | BodyLiteral::Until(a, _, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            BodyLiteral::And(ls) => ls.iter().for_each(|l| l.vars_into(out)),
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.vars_into(&mut out);
        out
    }

    /// Variables bound by atoms, ignoring inequalities.
    pub fn bound_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            BodyLiteral::Atom(a) => out.extend(a.vars()),
            BodyLiteral::Top | BodyLiteral::Neq(..) => {}
            BodyLiteral::BoxPlus(_, l)
            | BodyLiteral::BoxMinus(_, l)
            | BodyLiteral::DiamondPlus(_, l)
            | BodyLiteral::DiamondMinus(_, l) => l.bound_vars_into(out),
            BodyLiteral::Since(a, _, b) | BodyLiteral::Until(a, _, b) => {
                a.bound_vars_into(out);
                b.bound_vars_into(out);
            }
            BodyLiteral::And(ls) => ls.iter().for_each(|l| l.bound_vars_into(out)),
        }
    }

    pub fn atoms_into<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            BodyLiteral::Atom(a) => out.push(a),
            BodyLiteral::Top | BodyLiteral::Neq(..) => {}
            BodyLiteral::BoxPlus(_, l)
            | BodyLiteral::BoxMinus(_, l)
            | BodyLiteral::DiamondPlus(_, l)
            | BodyLiteral::DiamondMinus(_, l) => l.atoms_into(out),
            BodyLiteral::Since(a, _, b) | BodyLiteral::Until(a, _, b) => {
                a.atoms_into(out);
                b.atoms_into(out);
            }
            BodyLiteral::And(ls) => ls.iter().for_each(|l| l.atoms_into(out)),
        }
    }

    pub fn ranges_into<'a>(&'a self, out: &mut Vec<&'a Range>) {
        match self {
            BodyLiteral::Atom(_) | BodyLiteral::Top | BodyLiteral::Neq(..) => {}
            BodyLiteral::BoxPlus(r, l)
            | BodyLiteral::BoxMinus(r, l)
            | BodyLiteral::DiamondPlus(r, l)
            | BodyLiteral::DiamondMinus(r, l) => {
                out.push(r);
                l.ranges_into(out);
            }
            BodyLiteral::Since(a, r, b) | BodyLiteral::Until(a, r, b) => {
                a.ranges_into(out);
                out.push(r);
                b.ranges_into(out);
            }
            BodyLiteral::And(ls) => ls.iter().for_each(|l| l.ranges_into(out)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        match self {
            BodyLiteral::Atom(a) => write!(f, "{}", a),
            BodyLiteral::Top => write!(f, "TOP"),
            BodyLiteral::Neq(a, b) => write!(f, "{} != {}", a, b),
            BodyLiteral::BoxPlus(r, l) => {
                write!(f, "ALWAYS+{} ", r)?;
                l.fmt_prec(f, true)
            }
            BodyLiteral::BoxMinus(r, l) => {
                write!(f, "ALWAYS-{} ", r)?;
                l.fmt_prec(f, true)
            }
            BodyLiteral::DiamondPlus(r, l) => {
                write!(f, "SOMETIME+{} ", r)?;
                l.fmt_prec(f, true)
            }
            BodyLiteral::DiamondMinus(r, l) => {
                write!(f, "SOMETIME-{} ", r)?;
                l.fmt_prec(f, true)
            }
            BodyLiteral::Since(a, r, b) | BodyLiteral::Until(a, r, b) => {
                let kw = if matches!(self, BodyLiteral::Since(..)) { "SINCE" } else { "UNTIL" };
                if nested {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, true)?;
                write!(f, " {}{} ", kw, r)?;
                b.fmt_prec(f, true)?;
                if nested {
                    write!(f, ")")?;
                }
                Ok(())
            }
            BodyLiteral::And(ls) => {
                write!(f, "(")?;
                for (i, l) in ls.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    l.fmt_prec(f, false)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for BodyLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HeadOp {
    BoxPlus(Range),
    BoxMinus(Range),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HeadAtom {
    Atom(Atom),
    Bot,
    Top,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head_ops: Vec<HeadOp>,
    pub head: HeadAtom,
    pub body: Vec<BodyLiteral>,
}

impl Rule {
    pub fn new(head: HeadAtom, body: Vec<BodyLiteral>) -> Rule {
        Rule { head_ops: Vec::new(), head, body }
    }

    pub fn head_pred(&self) -> Option<&str> {
        match &self.head {
            HeadAtom::Atom(a) => Some(&a.pred),
            _ => None,
        }
    }

    pub fn body_atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        for l in &self.body {
            l.atoms_into(&mut out);
        }
        out
    }

    pub fn ranges(&self) -> Vec<&Range> {
        let mut out = Vec::new();
        for op in &self.head_ops {
            match op {
                HeadOp::BoxPlus(r) | HeadOp::BoxMinus(r) => out.push(r),
            }
        }
        for l in &self.body {
            l.ranges_into(&mut out);
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.head_ops {
            match op {
                HeadOp::BoxPlus(r) => write!(f, "ALWAYS+{} ", r)?,
                HeadOp::BoxMinus(r) => write!(f, "ALWAYS-{} ", r)?,
            }
        }
        match &self.head {
            HeadAtom::Atom(a) => write!(f, "{}", a)?,
            HeadAtom::Bot => write!(f, "BOT")?,
            HeadAtom::Top => write!(f, "TOP")?,
        }
        write!(f, " :- ")?;
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", l)?;
        }
        write!(f, ".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Program {
        Program { rules }
    }

    /// Predicate name → arity over heads and bodies.
    pub fn signature(&self) -> BTreeMap<String, usize> {
        let mut sig = BTreeMap::new();
        for r in &self.rules {
            if let HeadAtom::Atom(a) = &r.head {
                sig.insert(a.pred.clone(), a.arity());
            }
            for a in r.body_atoms() {
                sig.insert(a.pred.clone(), a.arity());
            }
        }
        sig
    }

    /// Predicates occurring in some rule head.
    pub fn intensional(&self) -> BTreeSet<String> {
        self.rules.iter().filter_map(|r| r.head_pred().map(str::to_string)).collect()
    }

    /// Finite numbers occurring in ranges.
    pub fn numbers(&self) -> Vec<TimePoint> {
        let mut out = Vec::new();
        for r in &self.rules {
            for rg in r.ranges() {
                for p in [rg.lo(), rg.hi()] {
                    if p.is_finite() {
                        out.push(p.clone());
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}", r)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub pred: String,
    pub args: Vec<Constant>,
    pub interval: Interval,
}

impl Fact {
    pub fn new(pred: &str, args: Vec<Constant>, interval: Interval) -> Fact {
        Fact { pred: pred.to_string(), args, interval }
    }

    pub fn display_with(&self, fmt: TimeFormat) -> String {
        let mut s = self.pred.clone();
        if !self.args.is_empty() {
            let a: Vec<String> = self.args.iter().map(|c| c.to_string()).collect();
            s.push_str(&format!("({})", a.join(",")));
        }
        format!("{}@{}", s, self.interval.display_with(fmt))
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(TimeFormat::Seconds))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DataInstance {
    pub facts: Vec<Fact>,
}

impl DataInstance {
    pub fn new(facts: Vec<Fact>) -> DataInstance {
        DataInstance { facts }
    }

    pub fn signature(&self) -> BTreeMap<String, usize> {
        self.facts.iter().map(|f| (f.pred.clone(), f.args.len())).collect()
    }

    /// Finite interval endpoints.
    pub fn numbers(&self) -> Vec<TimePoint> {
        let mut out = Vec::new();
        for f in &self.facts {
            for p in [f.interval.lo(), f.interval.hi()] {
                if p.is_finite() {
                    out.push(p.clone());
                }
            }
        }
        out
    }

    pub fn to_text(&self, fmt: TimeFormat) -> String {
        let mut s = String::new();
        for f in &self.facts {
            s.push_str(&f.display_with(fmt));
            s.push_str(".\n");
        }
        s
    }
}

/// `Q(τ)@x`: the goal atom; answers bind its variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub goal: Atom,
}

impl Query {
    pub fn new(goal: Atom) -> Query {
        Query { goal }
    }

    pub fn vars(&self) -> Vec<String> {
        self.goal.vars()
    }

    /// The goal with variables replaced by `tuple` (in `vars()` order).
    pub fn instantiate(&self, tuple: &[Constant]) -> Vec<Constant> {
        let vars = self.vars();
        self.goal
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => {
                    let i = vars.iter().position(|x| x == v).expect("goal variable");
                    tuple[i].clone()
                }
            })
            .collect()
    }
}
