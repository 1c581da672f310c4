//! Dependence graph, depth, time bounds and endpoint-offset analysis.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::*;
use super::normalize::{normal_shape, Operand, Shape, UnaryOp};
use crate::temporal::{gcd_dyadic, TimePoint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("program is recursive (predicate `{0}` depends on itself)")]
    Recursive(String),
    #[error("data instance has no finite timestamp")]
    NoFiniteTimestamp,
    #[error("rule is not in normal form: {0}")]
    NotNormal(String),
}

/// `P ⋖ Q` edges: head predicate to body predicates (⊤ and ⊥ excluded).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependenceGraph {
    pub edges: BTreeMap<String, BTreeSet<String>>,
}

impl DependenceGraph {
    pub fn successors(&self, p: &str) -> impl Iterator<Item = &String> {
        self.edges.get(p).into_iter().flatten()
    }

    /// A predicate on a cycle, if any.
    pub fn find_cycle(&self) -> Option<String> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn visit(g: &DependenceGraph, p: &str, marks: &mut BTreeMap<String, Mark>) -> Option<String> {
            match marks.get(p) {
                Some(Mark::Active) => return Some(p.to_string()),
                Some(Mark::Done) => return None,
                None => {}
            }
            marks.insert(p.to_string(), Mark::Active);
            for q in g.successors(p) {
                if let Some(c) = visit(g, q, marks) {
                    return Some(c);
                }
            }
            marks.insert(p.to_string(), Mark::Done);
            None
        }
        let mut marks = BTreeMap::new();
        for p in self.edges.keys() {
            if let Some(c) = visit(self, p, &mut marks) {
                return Some(c);
            }
        }
        None
    }

    /// Predicates reachable from `p` (including `p`).
    pub fn cone(&self, p: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![p.to_string()];
        while let Some(q) = stack.pop() {
            if seen.insert(q.clone()) {
                stack.extend(self.successors(&q).cloned());
            }
        }
        seen
    }
}

pub fn dependence(p: &Program) -> DependenceGraph {
    let mut g = DependenceGraph::default();
    for r in &p.rules {
        if let Some(h) = r.head_pred() {
            let e = g.edges.entry(h.to_string()).or_default();
            for a in r.body_atoms() {
                e.insert(a.pred.clone());
            }
        }
    }
    g
}

pub fn is_nonrecursive(p: &Program) -> bool {
    dependence(p).find_cycle().is_none()
}

/// Per-predicate depth for every predicate in the program.
pub fn depths(p: &Program) -> Result<BTreeMap<String, usize>, AnalysisError> {
    let g = dependence(p);
    if let Some(c) = g.find_cycle() {
        return Err(AnalysisError::Recursive(c));
    }
    fn go(g: &DependenceGraph, p: &str, memo: &mut BTreeMap<String, usize>) -> usize {
        if let Some(&d) = memo.get(p) {
            return d;
        }
        let d = g.successors(p).map(|q| go(g, q, memo) + 1).max().unwrap_or(0);
        memo.insert(p.to_string(), d);
        d
    }
    let mut memo = BTreeMap::new();
    for pred in p.signature().keys() {
        go(&g, pred, &mut memo);
    }
    Ok(memo)
}

pub fn depth(p: &Program, pred: &str) -> Result<usize, AnalysisError> {
    Ok(depths(p)?.get(pred).copied().unwrap_or(0))
}

pub fn program_depth(p: &Program) -> Result<usize, AnalysisError> {
    Ok(depths(p)?.values().copied().max().unwrap_or(0))
}

/// Predicates ordered so that every predicate follows those it depends on.
pub fn topological_order(p: &Program) -> Result<Vec<String>, AnalysisError> {
    let d = depths(p)?;
    let mut preds: Vec<(usize, String)> = d.into_iter().map(|(k, v)| (v, k)).collect();
    preds.sort();
    Ok(preds.into_iter().map(|(_, k)| k).collect())
}

/// Largest finite number occurring in the program (0 when none).
pub fn max_constant(p: &Program) -> TimePoint {
    p.numbers().into_iter().max().unwrap_or_else(TimePoint::zero)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub ml: TimePoint,
    pub mr: TimePoint,
    pub gcd: TimePoint,
}

pub fn bounds(p: &Program, d: &DataInstance) -> Result<Bounds, AnalysisError> {
    let depth = program_depth(p)?;
    let nums = d.numbers();
    let min = nums.iter().min().cloned().ok_or(AnalysisError::NoFiniteTimestamp)?;
    let max = nums.iter().max().cloned().ok_or(AnalysisError::NoFiniteTimestamp)?;
    let k = max_constant(p);
    let kd = match &k {
        TimePoint::Finite(x) => TimePoint::Finite(x.mul_int(&depth.into())),
        other => other.clone(),
    };
    let mut all = nums;
    all.extend(p.numbers());
    let gcd = gcd_dyadic(&all).expect("nonempty finite set");
    Ok(Bounds {
        ml: min.checked_sub(&kd).expect("finite"),
        mr: max.checked_add(&kd).expect("finite"),
        gcd,
    })
}

/// Offsets relating derived endpoints to data endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EndpointOffsets {
    pub le: BTreeMap<String, BTreeSet<TimePoint>>,
    pub ri: BTreeMap<String, BTreeSet<TimePoint>>,
}

fn shifted(set: &BTreeSet<TimePoint>, by: &TimePoint, negate: bool) -> Vec<TimePoint> {
    if !by.is_finite() {
        return Vec::new();
    }
    set.iter()
        .map(|x| if negate { x.checked_sub(by) } else { x.checked_add(by) }.expect("finite"))
        .collect()
}

/// Computes `le(P)` and `ri(P)` bottom-up over `⋖`. Arguments are ignored.
pub fn le_ri(p: &Program) -> Result<EndpointOffsets, AnalysisError> {
    let order = topological_order(p)?;
    let mut shapes: BTreeMap<String, Vec<Shape>> = BTreeMap::new();
    for r in &p.rules {
        let s = normal_shape(r).ok_or_else(|| AnalysisError::NotNormal(r.to_string()))?;
        if let Some(h) = s.head() {
            shapes.entry(h.pred.clone()).or_default().push(s);
        }
    }
    let mut out = EndpointOffsets::default();
    let zero: BTreeSet<TimePoint> = [TimePoint::zero()].into_iter().collect();
    let empty = BTreeSet::new();
    for pred in order {
        let Some(rules) = shapes.get(&pred) else {
            out.le.insert(pred.clone(), zero.clone());
            out.ri.insert(pred.clone(), zero.clone());
            continue;
        };
        let mut le = BTreeSet::new();
        let mut ri = BTreeSet::new();
        {
            let get = |o: &Operand, left: bool| -> &BTreeSet<TimePoint> {
                match o {
                    Operand::Top => &empty,
                    Operand::Atom(a) => {
                        let m = if left { &out.le } else { &out.ri };
                        m.get(&a.pred).unwrap_or(&zero)
                    }
                }
            };
            for s in rules {
                match s {
                    Shape::Horn { atoms, .. } => {
                        for a in atoms {
                            le.extend(get(&Operand::Atom(a.clone()), true).iter().cloned());
                            ri.extend(get(&Operand::Atom(a.clone()), false).iter().cloned());
                        }
                    }
                    Shape::Unary { op, range, body, .. } => {
                        let (r1, r2) = (range.lo(), range.hi());
                        match op {
                            UnaryOp::BoxMinus => {
                                le.extend(shifted(get(body, true), r2, false));
                                ri.extend(shifted(get(body, false), r1, false));
                            }
                            UnaryOp::BoxPlus => {
                                le.extend(shifted(get(body, true), r1, true));
                                ri.extend(shifted(get(body, false), r2, true));
                            }
                            UnaryOp::DiamondMinus => {
                                le.extend(shifted(get(body, true), r1, false));
                                ri.extend(shifted(get(body, false), r2, false));
                            }
                            UnaryOp::DiamondPlus => {
                                le.extend(shifted(get(body, true), r2, true));
                                ri.extend(shifted(get(body, false), r1, true));
                            }
                        }
                    }
                    Shape::Since { left, range, right, .. } => {
                        let (r1, r2) = (range.lo(), range.hi());
                        le.extend(get(left, true).iter().cloned());
                        le.extend(shifted(get(left, true), r1, false));
                        le.extend(shifted(get(right, true), r1, false));
                        ri.extend(get(left, false).iter().cloned());
                        ri.extend(shifted(get(left, false), r2, false));
                        ri.extend(shifted(get(right, false), r2, false));
                    }
                    Shape::Until { left, range, right, .. } => {
                        let (r1, r2) = (range.lo(), range.hi());
                        le.extend(get(left, true).iter().cloned());
                        le.extend(shifted(get(left, true), r2, true));
                        le.extend(shifted(get(right, true), r2, true));
                        ri.extend(get(left, false).iter().cloned());
                        ri.extend(shifted(get(left, false), r1, true));
                        ri.extend(shifted(get(right, false), r1, true));
                    }
                }
            }
        }
        out.le.insert(pred.clone(), le);
        out.ri.insert(pred, ri);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::{normalize, parse_data, parse_program};

    #[test]
    fn recursion_and_depth() {
        assert!(!is_nonrecursive(&parse_program("P :- SOMETIME-[2,2] P.").unwrap()));
        let empty = Program::default();
        assert_eq!(program_depth(&empty).unwrap(), 0);
        let p = parse_program("A(v) :- B(v).\nC(v) :- A(v), B(v).").unwrap();
        assert_eq!(depth(&p, "C").unwrap(), 2);
        assert_eq!(depth(&p, "B").unwrap(), 0);
        assert_eq!(depth(&p, "Missing").unwrap(), 0);
    }

    #[test]
    fn example_one_bounds() {
        let p = parse_program(
            "ActivePowerTrip(v) :- Turbine(v), ALWAYS-[0,1m] Below015(v), SOMETIME-[60s,63s] ALWAYS-[0s,10s] Above15(v).",
        )
        .unwrap();
        let d = parse_data(
            "Turbine(tb0)@(-inf,inf).\nAbove15(tb0)@[13:00:00,13:00:15).\nBelow015(tb0)@[13:00:17,13:01:25).",
        )
        .unwrap();
        let b = bounds(&p, &d).unwrap();
        assert_eq!(b.ml, TimePoint::int(46737));
        assert_eq!(b.mr, TimePoint::int(46948));
        assert_eq!(b.gcd, TimePoint::int(1));
    }

    #[test]
    fn bounds_errors_and_trivial_k() {
        let p = parse_program("Q(v) :- P(v).").unwrap();
        let d = parse_data("P(a)@[2,5).").unwrap();
        let b = bounds(&p, &d).unwrap();
        assert_eq!((b.ml, b.mr), (TimePoint::int(2), TimePoint::int(5)));
        let d = parse_data("P(a)@(-inf,inf).").unwrap();
        assert_eq!(bounds(&p, &d), Err(AnalysisError::NoFiniteTimestamp));
    }

    #[test]
    fn offsets() {
        let p = normalize(&parse_program("Q(v) :- ALWAYS-[2,2] P(v).\nR(v) :- ALWAYS-[3,3] Q(v).").unwrap());
        let o = le_ri(&p).unwrap();
        let five: BTreeSet<TimePoint> = [TimePoint::int(5)].into_iter().collect();
        assert_eq!(o.le["R"], five);
        assert_eq!(o.ri["R"], five);
        assert_eq!(o.le["P"], [TimePoint::zero()].into_iter().collect());
        let p = parse_program("P(v) :- ALWAYS-(1,2) P1(v).").unwrap();
        let o = le_ri(&p).unwrap();
        assert!(o.le["P"].contains(&TimePoint::int(2)));
        assert!(o.ri["P"].contains(&TimePoint::int(1)));
    }
}
