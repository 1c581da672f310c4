//! Structural invariants of canonical models of nonrecursive programs.

use std::collections::BTreeSet;

use crate::engine::CanonicalModel;
use crate::language::*;
use crate::temporal::TimePoint;

/// Every finite endpoint lies in `[M_l, M_r]` and is a multiple of the gcd
/// of all numbers in the program and data. Skipped when the data has no
/// finite endpoint.
pub fn check_zones(p: &Program, d: &DataInstance, m: &CanonicalModel) -> Result<(), String> {
    if d.numbers().is_empty() {
        return Ok(());
    }
    let b = bounds(p, d).map_err(|e| e.to_string())?;
    let step = b.gcd.finite().expect("finite gcd").clone();
    for f in m.facts() {
        for t in [f.interval.lo(), f.interval.hi()] {
            let Some(x) = t.finite() else { continue };
            if *t < b.ml || *t > b.mr {
                return Err(format!("{f}: endpoint {t} outside [{}, {}]", b.ml, b.mr));
            }
            if x.div_exact(&step).is_none() {
                return Err(format!("{f}: endpoint {t} not a multiple of {}", b.gcd));
            }
        }
    }
    Ok(())
}

/// Every finite left (right) endpoint of a fact over `P` is a left (right)
/// data endpoint plus an element of `le(P)` (`ri(P)`); predicates with data
/// facts also admit offset 0.
pub fn check_le_ri(p: &Program, d: &DataInstance, m: &CanonicalModel) -> Result<(), String> {
    let off = le_ri(p).map_err(|e| e.to_string())?;
    let mut los = BTreeSet::new();
    let mut his = BTreeSet::new();
    let mut with_data = BTreeSet::new();
    for f in &d.facts {
        with_data.insert(f.pred.clone());
        if f.interval.lo().is_finite() {
            los.insert(f.interval.lo().clone());
        }
        if f.interval.hi().is_finite() {
            his.insert(f.interval.hi().clone());
        }
    }
    let zero: BTreeSet<TimePoint> = [TimePoint::zero()].into_iter().collect();
    let explained = |t: &TimePoint, offsets: Option<&BTreeSet<TimePoint>>, data: &BTreeSet<TimePoint>, own: bool| {
        let extra = if own { Some(&zero) } else { None };
        offsets.into_iter().chain(extra).flatten().any(|n| t.checked_sub(n).map(|x| data.contains(&x)).unwrap_or(false))
    };
    for f in m.facts() {
        let own = with_data.contains(&f.pred);
        let (lo, hi) = (f.interval.lo(), f.interval.hi());
        if lo.is_finite() && !explained(lo, off.le.get(&f.pred), &los, own) {
            return Err(format!("{f}: left endpoint not explained by le({})", f.pred));
        }
        if hi.is_finite() && !explained(hi, off.ri.get(&f.pred), &his, own) {
            return Err(format!("{f}: right endpoint not explained by ri({})", f.pred));
        }
    }
    Ok(())
}
