//! Set-semantics versions of the table operations.

use std::collections::BTreeMap;

use super::grid::{Grid, GridSet};
use crate::engine::{TemporalTable, Tuple};
use crate::temporal::Interval;

pub type PointSets = BTreeMap<Tuple, GridSet>;

/// The point set covered by each tuple.
pub fn point_sets(t: &TemporalTable, g: Grid) -> PointSets {
    let mut out: PointSets = BTreeMap::new();
    for (tuple, iv) in t.rows() {
        let s = g.interval(iv);
        let e = out.entry(tuple.clone()).or_insert_with(|| g.empty());
        *e = e.union(&s);
    }
    out
}

/// Maximal intervals of each tuple's point set, by tuple then ≺.
pub fn maximal_rows(sets: &PointSets) -> Vec<(Tuple, Interval)> {
    sets.iter().flat_map(|(t, s)| s.to_intervals().into_iter().map(move |iv| (t.clone(), iv))).collect()
}

pub fn coalesce(t: &TemporalTable, g: Grid) -> Vec<(Tuple, Interval)> {
    maximal_rows(&point_sets(t, g))
}

/// Cross product of rows, keeping pairs that agree on shared attributes,
/// with the pointwise intersection of their intervals.
pub fn join(a: &TemporalTable, b: &TemporalTable, g: Grid) -> PointSets {
    let mut out: PointSets = BTreeMap::new();
    for (ta, ia) in a.rows() {
        for (tb, ib) in b.rows() {
            let mut t = ta.clone();
            let mut ok = true;
            for (j, attr) in b.attrs().iter().enumerate() {
                match a.attrs().iter().position(|x| x == attr) {
                    Some(i) => ok &= ta[i] == tb[j],
                    None => t.push(tb[j].clone()),
                }
            }
            if !ok {
                continue;
            }
            let s = g.interval(ia).intersection(&g.interval(ib));
            if s.is_empty() {
                continue;
            }
            let e = out.entry(t).or_insert_with(|| g.empty());
            *e = e.union(&s);
        }
    }
    out
}

pub fn project(t: &TemporalTable, attrs: &[String], g: Grid) -> PointSets {
    let idx: Vec<usize> = attrs.iter().map(|a| t.attrs().iter().position(|x| x == a).expect("attribute")).collect();
    let mut out: PointSets = BTreeMap::new();
    for (tuple, iv) in t.rows() {
        let key: Tuple = idx.iter().map(|&i| tuple[i].clone()).collect();
        let e = out.entry(key).or_insert_with(|| g.empty());
        *e = e.union(&g.interval(iv));
    }
    out
}

pub fn union(a: &TemporalTable, b: &TemporalTable, g: Grid) -> PointSets {
    let mut out = point_sets(a, g);
    for (t, s) in point_sets(b, g) {
        let e = out.entry(t).or_insert_with(|| g.empty());
        *e = e.union(&s);
    }
    out
}
