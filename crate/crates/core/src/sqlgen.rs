//! Rewriting nonrecursive programs with SQL mappings into a chain of SQL
//! views over `(attrs…, ledge, redge)` tables.
//!
//! Intervals in generated tables carry no bracket columns: every row means
//! `[ledge, redge)` or `(ledge, redge]` according to the convention of the
//! mappings. Results of operators whose exact brackets differ from the
//! convention are read in the convention, so answers can differ from the
//! native engine at interval endpoints. Infinite endpoints are represented by
//! `±SQL_INFINITY`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Convention;
use crate::language::{
    classify, dependence, depths, is_nonrecursive, normalize_for_sql, Atom, Operand, Program, Query, Shape, Term,
    UnaryOp,
};
use crate::temporal::{Dyadic, Interval, Range, TimePoint};

/// Stand-in for ±∞ in generated SQL; large enough for epoch seconds and
/// small enough that offsets stay exact in doubles.
pub const SQL_INFINITY: i64 = 1 << 50;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SqlGenError {
    #[error("program is recursive (predicate `{0}`)")]
    Recursive(String),
    #[error("extensional predicate `{0}` has no mapping")]
    Unmapped(String),
    #[error("cannot express in SQL: {0}")]
    Unsupported(String),
    #[error("mapping for `{pred}`: {message}")]
    Mapping { pred: String, message: String },
    #[error("query: {0}")]
    Query(String),
}

/// `P(attrs…)@⟨ledge, redge⟩ ← sql`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    pub predicate: String,
    pub sql: String,
    pub attrs: Vec<String>,
    pub ledge: String,
    pub redge: String,
    #[serde(default)]
    pub convention: Convention,
}

/// Reads a JSON array of mappings, or an object with a `mappings` array.
pub fn parse_mappings(text: &str) -> Result<Vec<Mapping>, serde_json::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum File {
        List(Vec<Mapping>),
        Wrapped { mappings: Vec<Mapping> },
    }
    Ok(match serde_json::from_str::<File>(text)? {
        File::List(m) | File::Wrapped { mappings: m } => m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoalesceVariant {
    /// Start/end detection by correlated counts.
    #[default]
    Counting,
    /// Gaps-and-islands with window functions.
    Window,
}

impl FromStr for CoalesceVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "counting" => Ok(CoalesceVariant::Counting),
            "window" => Ok(CoalesceVariant::Window),
            _ => Err(format!("unknown coalescing variant `{s}` (expected counting or window)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteOptions {
    pub variant: CoalesceVariant,
    /// Coalesce mapped predicates too (their sources may already be coalesced).
    pub coalesce_mapped: bool,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        RewriteOptions { variant: CoalesceVariant::Counting, coalesce_mapped: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct View {
    pub name: String,
    pub sql: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqlPlan {
    pub convention: Convention,
    /// In dependency order.
    pub views: Vec<View>,
    pub final_query: String,
    /// Output columns of the final query, without `ledge` and `redge`.
    pub columns: Vec<String>,
}

impl SqlPlan {
    /// The plan as one script for a single transaction.
    pub fn to_sql(&self) -> String {
        let mut s = String::from("BEGIN;\n\n");
        for v in &self.views {
            let _ = write!(s, "CREATE TEMPORARY TABLE {} AS\n{};\n\n", v.name, v.sql);
        }
        let _ = write!(s, "{};\n\nCOMMIT;\n", self.final_query);
        s
    }

    /// View names and the final query.
    pub fn sidecar_json(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            convention: Convention,
            views: Vec<&'a str>,
            columns: &'a [String],
            final_query: &'a str,
        }
        let s = Sidecar {
            convention: self.convention,
            views: self.views.iter().map(|v| v.name.as_str()).collect(),
            columns: &self.columns,
            final_query: &self.final_query,
        };
        serde_json::to_string_pretty(&s).expect("serializable")
    }
}

/// A time point as an SQL number, infinities as the sentinels.
pub fn sql_time(t: &TimePoint) -> String {
    match t {
        TimePoint::NegInf => format!("-{SQL_INFINITY}"),
        TimePoint::PosInf => SQL_INFINITY.to_string(),
        TimePoint::Finite(d) => d.to_decimal(),
    }
}

/// Reads back a number produced by a plan; values beyond half the sentinel are infinite.
pub fn time_from_sql(text: &str) -> Option<TimePoint> {
    let t = TimePoint::parse(text.trim()).ok()?;
    let bound = TimePoint::int(SQL_INFINITY / 2);
    Some(if t >= bound {
        TimePoint::PosInf
    } else if t <= bound.neg() {
        TimePoint::NegInf
    } else {
        t
    })
}

/// The interval denoted by a result row.
pub fn row_interval(conv: Convention, ledge: &TimePoint, redge: &TimePoint) -> Option<Interval> {
    let (lc, rc) = match conv {
        Convention::CarryForward => (true, false),
        Convention::CarryBack => (false, true),
    };
    Interval::make(ledge.clone(), lc && ledge.is_finite(), redge.clone(), rc && redge.is_finite())
}

fn quote(c: &str) -> String {
    format!("'{}'", c.replace('\'', "''"))
}

fn num(d: &Dyadic) -> String {
    d.to_decimal()
}

fn offset(expr: &str, d: &Dyadic) -> String {
    if d.is_zero() {
        expr.to_string()
    } else if d.is_negative() {
        format!("{expr} - {}", num(&d.neg()))
    } else {
        format!("{expr} + {}", num(d))
    }
}

/// Latest of the expressions, as a CASE.
pub fn mx(exprs: &[String]) -> String {
    extreme(exprs, ">=")
}

/// Earliest of the expressions, as a CASE.
pub fn mn(exprs: &[String]) -> String {
    extreme(exprs, "<=")
}

fn extreme(exprs: &[String], cmp: &str) -> String {
    match exprs {
        [] => unreachable!("empty extreme"),
        [a] => a.clone(),
        _ => {
            let mut s = String::from("CASE");
            for i in 0..exprs.len() - 1 {
                let conds: Vec<String> = exprs[i + 1..].iter().map(|e| format!("{} {cmp} {e}", exprs[i])).collect();
                let _ = write!(s, " WHEN {} THEN {}", conds.join(" AND "), exprs[i]);
            }
            let _ = write!(s, " ELSE {} END", exprs[exprs.len() - 1]);
            s
        }
    }
}

/// `SELECT attrs…, ledge, redge` of the maximal intervals of `source`.
pub fn coalesce_sql(source: &str, attrs: &[String], variant: CoalesceVariant) -> String {
    match variant {
        CoalesceVariant::Counting => coalesce_counting(source, attrs),
        CoalesceVariant::Window => coalesce_window(source, attrs),
    }
}

fn coalesce_counting(source: &str, attrs: &[String]) -> String {
    let eq = |l: &str, r: &str| -> String { attrs.iter().map(|a| format!(" AND {l}.{a} = {r}.{a}")).collect() };
    let cols = |t: &str| -> String { attrs.iter().map(|a| format!("{t}.{a} AS {a}, ")).collect() };
    let mut s = String::new();
    let _ = writeln!(s, "WITH V_l AS (");
    let _ = writeln!(s, "  SELECT DISTINCT {}T.ledge AS ledge FROM {source} T", cols("T"));
    let _ = writeln!(s, "  WHERE (SELECT COUNT(*) FROM {source} S WHERE S.ledge >= T.ledge{})", eq("S", "T"));
    let _ = writeln!(s, "      = (SELECT COUNT(*) FROM {source} S WHERE S.redge >= T.ledge{})", eq("S", "T"));
    let _ = writeln!(s, "), V_r AS (");
    let _ = writeln!(s, "  SELECT DISTINCT {}T.redge AS redge FROM {source} T", cols("T"));
    let _ = writeln!(s, "  WHERE (SELECT COUNT(*) FROM {source} S WHERE S.ledge <= T.redge{})", eq("S", "T"));
    let _ = writeln!(s, "      = (SELECT COUNT(*) FROM {source} S WHERE S.redge <= T.redge{})", eq("S", "T"));
    let _ = writeln!(s, ")");
    let _ = writeln!(s, "SELECT {}V_l.ledge AS ledge,", cols("V_l"));
    let _ = writeln!(
        s,
        "  (SELECT MIN(V_r.redge) FROM V_r WHERE V_r.redge >= V_l.ledge{}) AS redge",
        eq("V_l", "V_r")
    );
    let _ = write!(s, "FROM V_l");
    s
}

fn coalesce_window(source: &str, attrs: &[String]) -> String {
    let list = attrs.join(", ");
    let lead = |s: &str| if attrs.is_empty() { String::new() } else { format!("{s}, ") };
    let part = if attrs.is_empty() { String::new() } else { format!("PARTITION BY {list} ") };
    let mut s = String::new();
    let _ = writeln!(s, "WITH ordered AS (");
    let _ = writeln!(s, "  SELECT {}ledge, redge,", lead(&list));
    let _ = writeln!(
        s,
        "    MAX(redge) OVER ({part}ORDER BY ledge, redge ROWS BETWEEN UNBOUNDED PRECEDING AND 1 PRECEDING) AS reach"
    );
    let _ = writeln!(s, "  FROM {source}");
    let _ = writeln!(s, "), grouped AS (");
    let _ = writeln!(s, "  SELECT {}ledge, redge,", lead(&list));
    let _ = writeln!(
        s,
        "    SUM(CASE WHEN reach IS NULL OR reach < ledge THEN 1 ELSE 0 END) OVER ({part}ORDER BY ledge, redge ROWS UNBOUNDED PRECEDING) AS island"
    );
    let _ = writeln!(s, "  FROM ordered");
    let _ = writeln!(s, ")");
    let _ = writeln!(s, "SELECT {}MIN(ledge) AS ledge, MAX(redge) AS redge", lead(&list));
    let _ = write!(s, "FROM grouped GROUP BY {}island", lead(&list));
    s
}

fn contains_word(text: &str, word: &str) -> bool {
    let lower = text.to_ascii_lowercase();
    let w = word.to_ascii_lowercase();
    let ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    lower.match_indices(&w).any(|(i, _)| {
        let before = lower[..i].chars().next_back().map_or(true, |c| !ident(c));
        let after = lower[i + w.len()..].chars().next().map_or(true, |c| !ident(c));
        before && after
    })
}

fn check_mapping(m: &Mapping, arity: Option<usize>) -> Result<(), SqlGenError> {
    let bad = |message: String| SqlGenError::Mapping { pred: m.predicate.clone(), message };
    if let Some(n) = arity {
        if n != m.attrs.len() {
            return Err(bad(format!("binds {} attributes, predicate has arity {n}", m.attrs.len())));
        }
    }
    for c in m.attrs.iter().chain([&m.ledge, &m.redge]) {
        if c.is_empty() || !c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_') {
            return Err(bad(format!("bad column name `{c}`")));
        }
        if !contains_word(&m.sql, c) {
            return Err(bad(format!("column `{c}` does not occur in the source query")));
        }
    }
    Ok(())
}

/// `(a, b)` such that the operator maps `⟨l, r⟩` to `⟨l + a, r + b⟩` in the convention.
fn offsets(op: UnaryOp, range: &Range, conv: Convention) -> Result<(Dyadic, Dyadic), SqlGenError> {
    let hi = range
        .hi()
        .finite()
        .ok_or_else(|| SqlGenError::Unsupported(format!("infinite range {range}")))?
        .clone();
    // a representative interval longer than the range
    let h = hi.mul_int(&BigInt::from(4)).add(&Dyadic::integer(1 << 20));
    let rep = row_interval(conv, &TimePoint::zero(), &TimePoint::Finite(h.clone())).expect("nonempty");
    let res = match op {
        UnaryOp::BoxMinus => rep.plus_c(range),
        UnaryOp::BoxPlus => rep.minus_c(range),
        UnaryOp::DiamondMinus => rep.plus_o(range).ok(),
        UnaryOp::DiamondPlus => rep.minus_o(range).ok(),
    }
    .ok_or_else(|| SqlGenError::Unsupported(format!("range {range}")))?;
    let a = res.lo().finite().expect("finite").clone();
    let b = res.hi().finite().expect("finite").add(&h.neg());
    Ok((a, b))
}

struct Body<'a> {
    atoms: Vec<(String, &'a Atom)>,
    /// first column bound to each variable
    binding: BTreeMap<String, String>,
    conds: Vec<String>,
}

impl<'a> Body<'a> {
    fn new(atoms: &[&'a Atom], attrs: &BTreeMap<String, Vec<String>>) -> Body<'a> {
        let mut b = Body { atoms: Vec::new(), binding: BTreeMap::new(), conds: Vec::new() };
        for (i, a) in atoms.iter().enumerate() {
            let alias = format!("T{}", i + 1);
            for (j, t) in a.args.iter().enumerate() {
                let col = format!("{alias}.{}", attrs[&a.pred][j]);
                match t {
                    Term::Var(v) => match b.binding.get(v) {
                        Some(first) => b.conds.push(format!("{first} = {col}")),
                        None => {
                            b.binding.insert(v.clone(), col);
                        }
                    },
                    Term::Const(c) => b.conds.push(format!("{col} = {}", quote(c.as_str()))),
                }
            }
            b.atoms.push((alias, a));
        }
        b
    }

    fn term(&self, t: &Term) -> Result<String, SqlGenError> {
        match t {
            Term::Var(v) => {
                self.binding.get(v).cloned().ok_or_else(|| SqlGenError::Unsupported(format!("unbound variable `{v}`")))
            }
            Term::Const(c) => Ok(quote(c.as_str())),
        }
    }

    fn from(&self, source: &dyn Fn(&str) -> String) -> String {
        if self.atoms.is_empty() {
            return String::new();
        }
        let list: Vec<String> = self.atoms.iter().map(|(al, a)| format!("{} AS {al}", source(&a.pred))).collect();
        format!("\nFROM {}", list.join(", "))
    }

    fn ledges(&self) -> Vec<String> {
        self.atoms.iter().map(|(al, _)| format!("{al}.ledge")).collect()
    }

    fn redges(&self) -> Vec<String> {
        self.atoms.iter().map(|(al, _)| format!("{al}.redge")).collect()
    }
}

fn select(
    head: &Atom,
    head_attrs: &[String],
    body: &Body,
    ledge: String,
    redge: String,
    mut guards: Vec<String>,
    source: &dyn Fn(&str) -> String,
) -> Result<String, SqlGenError> {
    let mut cols = Vec::new();
    for (t, a) in head.args.iter().zip(head_attrs) {
        cols.push(format!("{} AS {a}", body.term(t)?));
    }
    cols.push(format!("{ledge} AS ledge"));
    cols.push(format!("{redge} AS redge"));
    let mut s = format!("SELECT {}", cols.join(", "));
    s.push_str(&body.from(source));
    let mut all = body.conds.clone();
    all.append(&mut guards);
    if !all.is_empty() {
        let _ = write!(s, "\nWHERE {}", all.join(" AND "));
    }
    Ok(s)
}

fn inf() -> (String, String) {
    (sql_time(&TimePoint::NegInf), sql_time(&TimePoint::PosInf))
}

fn unary_view(
    head: &Atom,
    head_attrs: &[String],
    op: UnaryOp,
    range: &Range,
    body: &Operand,
    conv: Convention,
    attrs: &BTreeMap<String, Vec<String>>,
    source: &dyn Fn(&str) -> String,
) -> Result<String, SqlGenError> {
    let (a, b) = offsets(op, range, conv)?;
    let atoms: Vec<&Atom> = body.atom().into_iter().collect();
    let body = Body::new(&atoms, attrs);
    if atoms.is_empty() {
        // every operator maps ⊤ to ⊤
        let (l, r) = inf();
        return select(head, head_attrs, &body, l, r, Vec::new(), source);
    }
    let ledge = offset("T1.ledge", &a);
    let redge = offset("T1.redge", &b);
    let mut guards = Vec::new();
    if matches!(op, UnaryOp::BoxMinus | UnaryOp::BoxPlus) {
        let len = range.hi().finite().expect("finite").add(&range.lo().finite().expect("finite").neg());
        if !len.is_zero() {
            guards.push(format!("T1.redge - T1.ledge >= {}", num(&len)));
        }
    }
    if a > b {
        guards.push(format!("{ledge} < {redge}"));
    }
    select(head, head_attrs, &body, ledge, redge, guards, source)
}

fn rule_view(
    shape: &Shape,
    head_attrs: &[String],
    conv: Convention,
    attrs: &BTreeMap<String, Vec<String>>,
    source: &dyn Fn(&str) -> String,
) -> Result<String, SqlGenError> {
    match shape {
        Shape::Horn { head: Some(head), atoms, neqs } => {
            let refs: Vec<&Atom> = atoms.iter().collect();
            let body = Body::new(&refs, attrs);
            let mut guards = Vec::new();
            for (x, y) in neqs {
                guards.push(format!("{} <> {}", body.term(x)?, body.term(y)?));
            }
            let (ledge, redge) = if atoms.is_empty() { inf() } else { (mx(&body.ledges()), mn(&body.redges())) };
            if atoms.len() > 1 {
                guards.push(format!("{ledge} < {redge}"));
            }
            select(head, head_attrs, &body, ledge, redge, guards, source)
        }
        Shape::Horn { head: None, .. } => unreachable!("⊥ rules are skipped"),
        Shape::Unary { head, op, range, body } => unary_view(head, head_attrs, *op, range, body, conv, attrs, source),
        Shape::Since { head, left: Operand::Top, range, right } => {
            unary_view(head, head_attrs, UnaryOp::DiamondMinus, range, right, conv, attrs, source)
        }
        Shape::Until { head, left: Operand::Top, range, right } => {
            unary_view(head, head_attrs, UnaryOp::DiamondPlus, range, right, conv, attrs, source)
        }
        Shape::Since { .. } | Shape::Until { .. } => Err(SqlGenError::Unsupported(
            "SINCE/UNTIL with an atom on the left needs bracket columns; use the native engine".into(),
        )),
    }
}

/// Column names of an intensional predicate, taken from where its head
/// variables are bound in its first rule.
fn derive_attrs(head: &Atom, body_atoms: &[&Atom], attrs: &BTreeMap<String, Vec<String>>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for (i, t) in head.args.iter().enumerate() {
        let mut name = None;
        if let Term::Var(v) = t {
            'find: for a in body_atoms {
                for (j, u) in a.args.iter().enumerate() {
                    if u.as_var() == Some(v) {
                        name = attrs.get(&a.pred).map(|cols| cols[j].clone());
                        break 'find;
                    }
                }
            }
        }
        let mut name = name.unwrap_or_else(|| format!("a{i}"));
        if out.contains(&name) || name == "ledge" || name == "redge" {
            name = format!("{name}_{i}");
        }
        out.push(name);
    }
    out
}

/// Compiles the answers to `q` over `(p, mappings)` into SQL views.
pub fn rewrite(p: &Program, mappings: &[Mapping], q: &Query, opts: RewriteOptions) -> Result<SqlPlan, SqlGenError> {
    if !is_nonrecursive(p) {
        let c = dependence(p).find_cycle().unwrap_or_default();
        return Err(SqlGenError::Recursive(c));
    }
    let np = normalize_for_sql(p);
    let mut shapes: BTreeMap<String, Vec<Shape>> = BTreeMap::new();
    for r in &np.rules {
        let s = classify(r).ok_or_else(|| SqlGenError::Unsupported(format!("rule `{r}`")))?;
        if let Some(h) = s.head() {
            shapes.entry(h.pred.clone()).or_default().push(s);
        }
    }
    let goal = &q.goal;
    let cone = dependence(&np).cone(&goal.pred);
    let depth = depths(&np).map_err(|e| SqlGenError::Recursive(e.to_string()))?;
    let sig = np.signature();
    if let Some(&n) = sig.get(&goal.pred) {
        if n != goal.arity() {
            return Err(SqlGenError::Query(format!("`{}` has arity {n}", goal.pred)));
        }
    }

    let mut by_pred: BTreeMap<&str, Vec<&Mapping>> = BTreeMap::new();
    for m in mappings {
        by_pred.entry(m.predicate.as_str()).or_default().push(m);
    }
    let mut conv = None;
    for pred in &cone {
        let ms = by_pred.get(pred.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if ms.is_empty() && !shapes.contains_key(pred) {
            return Err(SqlGenError::Unmapped(pred.clone()));
        }
        for m in ms {
            check_mapping(m, sig.get(pred).copied().or((pred == &goal.pred).then_some(goal.arity())))?;
            if m.attrs != ms[0].attrs {
                return Err(SqlGenError::Mapping {
                    pred: pred.clone(),
                    message: "all mappings of a predicate must bind the same attribute names".into(),
                });
            }
            match conv {
                None => conv = Some(m.convention),
                Some(c) if c != m.convention => {
                    return Err(SqlGenError::Unsupported("mappings mix interval conventions".into()))
                }
                _ => {}
            }
        }
    }
    let conv = conv.unwrap_or_default();

    let mut order: Vec<&String> = cone.iter().collect();
    order.sort_by_key(|p| (depth.get(p.as_str()).copied().unwrap_or(0), p.as_str()));

    let mapped: BTreeSet<&str> = by_pred.keys().copied().collect();
    let coalesced = |pred: &str| opts.coalesce_mapped || !mapped.contains(pred) || shapes.contains_key(pred);
    let source = |pred: &str| {
        if coalesced(pred) {
            format!("V_{pred}_coal")
        } else {
            format!("V_{pred}")
        }
    };

    let mut attrs: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut views = Vec::new();
    for pred in order {
        let mut parts = Vec::new();
        let cols = match by_pred.get(pred.as_str()) {
            Some(ms) => ms[0].attrs.clone(),
            None => {
                let first = &shapes[pred][0];
                derive_attrs(first.head().expect("head"), &first.body_atoms(), &attrs)
            }
        };
        attrs.insert(pred.clone(), cols.clone());
        for m in by_pred.get(pred.as_str()).into_iter().flatten() {
            let mut sel: Vec<String> = m.attrs.iter().zip(&cols).map(|(c, a)| format!("T1.{c} AS {a}")).collect();
            sel.push(format!("T1.{} AS ledge", m.ledge));
            sel.push(format!("T1.{} AS redge", m.redge));
            parts.push(format!("SELECT {}\nFROM ({}) AS T1", sel.join(", "), m.sql.trim().trim_end_matches(';')));
        }
        for s in shapes.get(pred).into_iter().flatten() {
            parts.push(rule_view(s, &cols, conv, &attrs, &source)?);
        }
        views.push(View { name: format!("V_{pred}"), sql: parts.join("\nUNION ALL\n") });
        if coalesced(pred) {
            views.push(View { name: format!("V_{pred}_coal"), sql: coalesce_sql(&format!("V_{pred}"), &cols, opts.variant) });
        }
    }

    let cols = &attrs[&goal.pred];
    let mut out_cols = Vec::new();
    let mut sel = Vec::new();
    let mut conds = Vec::new();
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    for (t, c) in goal.args.iter().zip(cols) {
        match t {
            Term::Var(v) => match seen.get(v.as_str()) {
                Some(first) => conds.push(format!("{first} = {c}")),
                None => {
                    seen.insert(v, c);
                    sel.push(format!("{c} AS {v}"));
                    out_cols.push(v.clone());
                }
            },
            Term::Const(k) => conds.push(format!("{c} = {}", quote(k.as_str()))),
        }
    }
    let mut fq = String::from("SELECT ");
    for s in &sel {
        let _ = write!(fq, "{s}, ");
    }
    let _ = write!(fq, "ledge, redge\nFROM {}", source(&goal.pred));
    if !conds.is_empty() {
        let _ = write!(fq, "\nWHERE {}", conds.join(" AND "));
    }
    let mut ord: Vec<&str> = out_cols.iter().map(String::as_str).collect();
    ord.push("ledge");
    let _ = write!(fq, "\nORDER BY {}", ord.join(", "));
    Ok(SqlPlan { convention: conv, views, final_query: fq, columns: out_cols })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::{parse_program, parse_query};

    fn mapping(pred: &str, attrs: &[&str], conv: Convention) -> Mapping {
        Mapping {
            predicate: pred.into(),
            sql: format!("SELECT {}, ledge, redge FROM T_{pred}", attrs.join(", ")),
            attrs: attrs.iter().map(|s| s.to_string()).collect(),
            ledge: "ledge".into(),
            redge: "redge".into(),
            convention: conv,
        }
    }

    #[test]
    fn box_view_shifts_left_edge() {
        let p = parse_program("Y(v) :- ALWAYS-[0,24h] TempAbove24(v).").unwrap();
        let m = [mapping("TempAbove24", &["station_id"], Convention::CarryBack)];
        let plan = rewrite(&p, &m, &parse_query("Y(v)").unwrap(), RewriteOptions::default()).unwrap();
        let names: Vec<&str> = plan.views.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["V_TempAbove24", "V_TempAbove24_coal", "V_Y", "V_Y_coal"]);
        let y = &plan.views[2].sql;
        assert!(y.contains("T1.ledge + 86400 AS ledge"), "{y}");
        assert!(y.contains("T1.redge AS redge"), "{y}");
        assert!(y.contains("T1.redge - T1.ledge >= 86400"), "{y}");
    }

    #[test]
    fn offsets_follow_the_convention() {
        let r = |s: &str| Range::parse(s).unwrap();
        let o = |op, s: &str, c| {
            let (a, b) = offsets(op, &r(s), c).unwrap();
            (a.to_decimal(), b.to_decimal())
        };
        assert_eq!(o(UnaryOp::BoxMinus, "[0,10]", Convention::CarryForward), ("10".into(), "0".into()));
        assert_eq!(o(UnaryOp::BoxPlus, "[0,10]", Convention::CarryForward), ("0".into(), "-10".into()));
        assert_eq!(o(UnaryOp::DiamondMinus, "[60,63]", Convention::CarryForward), ("60".into(), "63".into()));
        assert_eq!(o(UnaryOp::DiamondPlus, "[0,5]", Convention::CarryBack), ("-5".into(), "0".into()));
        assert!(offsets(UnaryOp::DiamondMinus, &r("(0,inf)"), Convention::CarryBack).is_err());
    }

    #[test]
    fn extremes() {
        let e = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(mx(&e(&["a", "b"])), "CASE WHEN a >= b THEN a ELSE b END");
        assert_eq!(mn(&e(&["a", "b", "c"])), "CASE WHEN a <= b AND a <= c THEN a WHEN b <= c THEN b ELSE c END");
    }

    #[test]
    fn errors() {
        let q = parse_query("P(x)").unwrap();
        let rec = parse_program("P(x) :- SOMETIME-[1,1] P(x).").unwrap();
        assert!(matches!(rewrite(&rec, &[], &q, RewriteOptions::default()), Err(SqlGenError::Recursive(_))));
        let p = parse_program("P(x) :- A(x), B(x).").unwrap();
        let m = [mapping("A", &["x"], Convention::CarryForward)];
        assert_eq!(rewrite(&p, &m, &q, RewriteOptions::default()), Err(SqlGenError::Unmapped("B".into())));
        let m = [mapping("A", &["x"], Convention::CarryForward), mapping("B", &["x"], Convention::CarryBack)];
        assert!(matches!(rewrite(&p, &m, &q, RewriteOptions::default()), Err(SqlGenError::Unsupported(_))));
        let mut bad = mapping("A", &["x"], Convention::CarryForward);
        bad.sql = "SELECT y, ledge, redge FROM T".into();
        let m = [bad, mapping("B", &["x"], Convention::CarryForward)];
        assert!(matches!(rewrite(&p, &m, &q, RewriteOptions::default()), Err(SqlGenError::Mapping { .. })));
        let s = parse_program("P(x) :- A(x) SINCE[0,1] B(x).").unwrap();
        let m = [mapping("A", &["x"], Convention::CarryForward), mapping("B", &["x"], Convention::CarryForward)];
        assert!(matches!(rewrite(&s, &m, &q, RewriteOptions::default()), Err(SqlGenError::Unsupported(_))));
    }

    #[test]
    fn extensional_goal() {
        let p = Program::new(Vec::new());
        let m = [mapping("A", &["x"], Convention::CarryForward)];
        let plan = rewrite(&p, &m, &parse_query("A(x)").unwrap(), RewriteOptions::default()).unwrap();
        assert_eq!(plan.views.len(), 2);
        assert_eq!(plan.final_query, "SELECT x AS x, ledge, redge\nFROM V_A_coal\nORDER BY x, ledge");
    }

    #[test]
    fn sentinels_round_trip() {
        assert_eq!(time_from_sql(&sql_time(&TimePoint::PosInf)), Some(TimePoint::PosInf));
        assert_eq!(time_from_sql(&format!("-{}", SQL_INFINITY - 100)), Some(TimePoint::NegInf));
        assert_eq!(time_from_sql("12.5"), Some(TimePoint::dyadic(25, 1)));
    }
}
