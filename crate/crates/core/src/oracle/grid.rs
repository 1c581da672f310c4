//! Exact point sets over a uniform dyadic grid.
//!
//! The line is cut into atoms: the grid points `i·h` for `|i| ≤ w`, the open
//! cells between neighbouring points, and the two unbounded cells beyond
//! `±w·h`. Any union of intervals whose finite endpoints are grid points is a
//! union of atoms. Atoms are addressed by doubled coordinates: a point `i`
//! has coordinate `2i`, the cell `(i, i+1)` has coordinate `2i+1`.
//!
//! Results are exact as long as every finite endpoint involved stays well
//! inside the window; callers choose `w` with enough margin.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::temporal::{Dyadic, Interval, TimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    /// Step is `2^-exp`.
    pub exp: u32,
    /// Points run from `-w` to `w` (in steps).
    pub w: i64,
}

/// Lower or upper end of a run, in doubled coordinates (`None` is infinite).
type End = (Option<i64>, bool);

impl Grid {
    pub fn new(exp: u32, w: i64) -> Grid {
        Grid { exp, w }
    }

    pub fn atoms(&self) -> usize {
        (4 * self.w + 3) as usize
    }

    /// Grid units of a finite time point; panics when off the grid.
    pub fn units(&self, t: &TimePoint) -> Option<i64> {
        let d = t.finite()?;
        let step = Dyadic::new(BigInt::from(1), self.exp);
        let k = d.div_exact(&step).unwrap_or_else(|| panic!("{t} is not on the 2^-{} grid", self.exp));
        Some(k.to_i64().expect("grid index fits"))
    }

    pub fn point(&self, units: i64) -> TimePoint {
        TimePoint::Finite(Dyadic::new(BigInt::from(units), self.exp))
    }

    fn coord(&self, k: usize) -> i64 {
        k as i64 - 1 - 2 * self.w
    }

    fn index(&self, c: i64) -> Option<usize> {
        (c.abs() <= 2 * self.w).then(|| (c + 2 * self.w + 1) as usize)
    }

    fn last(&self) -> usize {
        self.atoms() - 1
    }

    /// Lowest point of atom `k` and whether it is attained.
    fn atom_lo(&self, k: usize) -> End {
        if k == 0 {
            return (None, false);
        }
        if k == self.last() {
            return (Some(2 * self.w), false);
        }
        let c = self.coord(k);
        if c % 2 == 0 {
            (Some(c), true)
        } else {
            (Some(c - 1), false)
        }
    }

    fn atom_hi(&self, k: usize) -> End {
        if k == self.last() {
            return (None, false);
        }
        if k == 0 {
            return (Some(-2 * self.w), false);
        }
        let c = self.coord(k);
        if c % 2 == 0 {
            (Some(c), true)
        } else {
            (Some(c + 1), false)
        }
    }

    /// Whether atom `k` lies inside the interval with the given ends.
    fn atom_within(&self, k: usize, lo: End, hi: End) -> bool {
        let (alo, alo_in) = self.atom_lo(k);
        let (ahi, ahi_in) = self.atom_hi(k);
        let lower_ok = match (lo.0, alo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(l), Some(a)) => a > l || (a == l && (lo.1 || !alo_in)),
        };
        let upper_ok = match (hi.0, ahi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(h), Some(a)) => a < h || (a == h && (hi.1 || !ahi_in)),
        };
        lower_ok && upper_ok
    }

    pub fn empty(&self) -> GridSet {
        GridSet { grid: *self, bits: vec![false; self.atoms()] }
    }

    pub fn full(&self) -> GridSet {
        GridSet { grid: *self, bits: vec![true; self.atoms()] }
    }

    fn between(&self, lo: End, hi: End) -> GridSet {
        let mut s = self.empty();
        for k in 0..self.atoms() {
            s.bits[k] = self.atom_within(k, lo, hi);
        }
        s
    }

    pub fn interval(&self, iv: &Interval) -> GridSet {
        let end = |t: &TimePoint, closed: bool| -> End {
            match self.units(t) {
                Some(u) => {
                    assert!(u.abs() < self.w, "endpoint {t} outside the grid window");
                    (Some(2 * u), closed)
                }
                None => (None, false),
            }
        };
        self.between(end(iv.lo(), iv.lo_closed()), end(iv.hi(), iv.hi_closed()))
    }

    fn end_point(&self, e: End, lower: bool) -> TimePoint {
        match e.0 {
            None if lower => TimePoint::NegInf,
            None => TimePoint::PosInf,
            Some(c) => TimePoint::Finite(Dyadic::new(BigInt::from(c), self.exp + 1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSet {
    grid: Grid,
    bits: Vec<bool>,
}

impl GridSet {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn contains_atom(&self, k: usize) -> bool {
        self.bits[k]
    }

    /// Membership of a finite grid point (in steps).
    pub fn contains_units(&self, u: i64) -> bool {
        self.grid.index(2 * u).map(|k| self.bits[k]).unwrap_or_else(|| {
            if u < 0 {
                self.bits[0]
            } else {
                self.bits[self.grid.last()]
            }
        })
    }

    pub fn union(&self, o: &GridSet) -> GridSet {
        self.zip(o, |a, b| a || b)
    }

    pub fn intersection(&self, o: &GridSet) -> GridSet {
        self.zip(o, |a, b| a && b)
    }

    pub fn complement(&self) -> GridSet {
        GridSet { grid: self.grid, bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn is_subset_of(&self, o: &GridSet) -> bool {
        self.bits.iter().zip(&o.bits).all(|(a, b)| !a || *b)
    }

    /// `{-t | t ∈ self}`.
    pub fn neg(&self) -> GridSet {
        GridSet { grid: self.grid, bits: self.bits.iter().rev().copied().collect() }
    }

    fn zip(&self, o: &GridSet, f: impl Fn(bool, bool) -> bool) -> GridSet {
        assert_eq!(self.grid, o.grid);
        GridSet { grid: self.grid, bits: self.bits.iter().zip(&o.bits).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn first(&self) -> Option<usize> {
        self.bits.iter().position(|&b| b)
    }

    pub fn last(&self) -> Option<usize> {
        self.bits.iter().rposition(|&b| b)
    }

    /// True when the set is a single (possibly empty) interval.
    pub fn is_convex(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => self.bits[a..=b].iter().all(|&x| x),
            _ => true,
        }
    }

    /// Maximal runs of consecutive atoms, as inclusive index pairs.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut k = 0;
        while k < self.bits.len() {
            if self.bits[k] {
                let s = k;
                while k + 1 < self.bits.len() && self.bits[k + 1] {
                    k += 1;
                }
                out.push((s, k));
            }
            k += 1;
        }
        out
    }

    /// The maximal intervals making up the set, in order.
    pub fn to_intervals(&self) -> Vec<Interval> {
        let g = self.grid;
        self.runs()
            .into_iter()
            .map(|(a, b)| {
                let lo = g.atom_lo(a);
                let hi = g.atom_hi(b);
                Interval::make(g.end_point(lo, true), lo.1, g.end_point(hi, false), hi.1).expect("nonempty run")
            })
            .collect()
    }

    /// Minkowski sum computed atom by atom.
    pub fn plus_atoms(&self, o: &GridSet) -> GridSet {
        let g = self.grid;
        let mut out = g.empty();
        let last = g.last();
        for a in (0..self.bits.len()).filter(|&k| self.bits[k]) {
            for b in (0..o.bits.len()).filter(|&k| o.bits[k]) {
                let (alo, ahi) = (g.atom_lo(a), g.atom_hi(a));
                let (blo, bhi) = (g.atom_lo(b), g.atom_hi(b));
                let finite = |x: usize| x != 0 && x != last;
                if finite(a) && finite(b) {
                    let c = g.coord(a) + g.coord(b);
                    let odd_a = g.coord(a) % 2 != 0;
                    let odd_b = g.coord(b) % 2 != 0;
                    if odd_a && odd_b {
                        for d in [c - 1, c, c + 1] {
                            if let Some(k) = g.index(d) {
                                out.bits[k] = true;
                            }
                        }
                    } else if let Some(k) = g.index(c) {
                        out.bits[k] = true;
                    }
                    continue;
                }
                let add = |x: Option<i64>, y: Option<i64>| x.zip(y).map(|(x, y)| x + y);
                let mut lo = (add(alo.0, blo.0), alo.1 && blo.1);
                let mut hi = (add(ahi.0, bhi.0), ahi.1 && bhi.1);
                // a ray that ends beyond the window still meets the outer cell
                if lo.0.is_none() && hi.0.is_some_and(|h| h < -2 * g.w) {
                    hi = (Some(-2 * g.w), false);
                }
                if hi.0.is_none() && lo.0.is_some_and(|l| l > 2 * g.w) {
                    lo = (Some(2 * g.w), false);
                }
                out = out.union(&g.between(lo, hi));
            }
        }
        out
    }

    /// Minkowski sum computed run by run.
    pub fn plus(&self, o: &GridSet) -> GridSet {
        let g = self.grid;
        let mut out = g.empty();
        let add = |x: Option<i64>, y: Option<i64>| x.zip(y).map(|(x, y)| x + y);
        for (a1, a2) in self.runs() {
            for (b1, b2) in o.runs() {
                let (alo, blo) = (g.atom_lo(a1), g.atom_lo(b1));
                let (ahi, bhi) = (g.atom_hi(a2), g.atom_hi(b2));
                let lo = (add(alo.0, blo.0), alo.1 && blo.1);
                let hi = (add(ahi.0, bhi.0), ahi.1 && bhi.1);
                for k in 0..out.bits.len() {
                    if !out.bits[k] && g.atom_within(k, lo, hi) {
                        out.bits[k] = true;
                    }
                }
            }
        }
        out
    }

    /// `{t - k | t ∈ self, k ∈ o}`.
    pub fn minus(&self, o: &GridSet) -> GridSet {
        self.plus(&o.neg())
    }

    /// `{t | t + k ∈ self for all k ∈ o}`.
    pub fn forall_minus(&self, o: &GridSet) -> GridSet {
        self.complement().minus(o).complement()
    }

    /// `{t | t - k ∈ self for all k ∈ o}`.
    pub fn forall_plus(&self, o: &GridSet) -> GridSet {
        self.complement().plus(o).complement()
    }

    /// SINCE over atoms: `t` holds iff some `t' ≤ t` with `t - t' ∈ range`
    /// satisfies `right` and `left` holds throughout `(t', t)`.
    pub fn since(left: &GridSet, range: &GridSet, right: &GridSet) -> GridSet {
        let g = left.grid;
        let n = g.atoms();
        let last = g.last();
        // representative of each atom, doubled coordinates
        let rep = |k: usize| -> i64 {
            if k == 0 {
                -2 * g.w - 1
            } else if k == last {
                2 * g.w + 1
            } else {
                g.coord(k)
            }
        };
        let is_point = |k: usize| k != 0 && k != last && g.coord(k) % 2 == 0;
        let zero = range.contains_units(0);
        let (rlo, rhi) = match (range.first(), range.last()) {
            (Some(a), Some(b)) => (g.atom_lo(a), g.atom_hi(b)),
            _ => return g.empty(),
        };
        let dist_ok = |lo: End, hi: End| -> bool {
            // (lo, hi) ∩ range nonempty, both sides in doubled coordinates
            let (l, lc) = match (lo.0, rlo.0) {
                (None, _) => rlo,
                (_, None) => lo,
                (Some(a), Some(b)) if a > b => lo,
                (Some(a), Some(b)) if a < b => rlo,
                (Some(a), _) => (Some(a), lo.1 && rlo.1),
            };
            let (h, hc) = match (hi.0, rhi.0) {
                (None, _) => rhi,
                (_, None) => hi,
                (Some(a), Some(b)) if a < b => hi,
                (Some(a), Some(b)) if a > b => rhi,
                (Some(a), _) => (Some(a), hi.1 && rhi.1),
            };
            match (l, h) {
                (Some(l), Some(h)) => l < h || (l == h && lc && hc),
                _ => true,
            }
        };
        let mut out = g.empty();
        for k in 0..n {
            let t = rep(k);
            let mut hit = zero && right.bits[k];
            if !hit && !is_point(k) {
                // t' inside the same atom, strictly before t
                let span = match k {
                    0 => None,
                    _ if k == last => Some(t - 2 * g.w),
                    _ => Some(1),
                };
                hit = left.bits[k] && right.bits[k] && dist_ok((Some(0), false), (span, false));
            }
            let mut ok = is_point(k) || left.bits[k];
            let mut j = k;
            while !hit && ok && j > 0 {
                j -= 1;
                let (lo, hi) = if j == 0 {
                    ((Some(t + 2 * g.w), false), (None, false))
                } else if is_point(j) {
                    let d = t - g.coord(j);
                    ((Some(d), true), (Some(d), true))
                } else {
                    let c = g.coord(j);
                    ((Some(t - c - 1), false), (Some(t - c + 1), false))
                };
                if let (Some(h), Some(l)) = (rhi.0, lo.0) {
                    if l > h {
                        break;
                    }
                }
                let needs_left = !is_point(j);
                if right.bits[j] && (!needs_left || left.bits[j]) {
                    hit = dist_ok(lo, hi);
                }
                ok = left.bits[j];
            }
            out.bits[k] = hit;
        }
        out
    }

    /// UNTIL, by reflecting SINCE.
    pub fn until(left: &GridSet, range: &GridSet, right: &GridSet) -> GridSet {
        GridSet::since(&left.neg(), range, &right.neg()).neg()
    }

    pub fn to_bits(&self) -> &[bool] {
        &self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: &str) -> Interval {
        Interval::parse(s).unwrap()
    }

    #[test]
    fn round_trip() {
        let g = Grid::new(2, 40);
        for s in ["[0,1]", "(0,1)", "[-2.25,3)", "(-inf,4]", "(1.5,inf)", "(-inf,inf)", "[3,3]"] {
            assert_eq!(g.interval(&iv(s)).to_intervals(), vec![iv(s)], "{s}");
        }
    }

    #[test]
    fn sums_agree() {
        let g = Grid::new(2, 40);
        let a = g.interval(&iv("(0,1]")).union(&g.interval(&iv("[3,3]")));
        for r in ["[0,0]", "(0,1)", "[1,2]", "[0,inf)", "(2,inf)"] {
            let r = g.interval(&iv(r));
            assert_eq!(a.plus(&r), a.plus_atoms(&r));
            assert_eq!(a.minus(&r), a.plus_atoms(&r.neg()));
        }
    }

    #[test]
    fn since_basic() {
        let g = Grid::new(2, 80);
        let a = g.interval(&iv("[5,10]"));
        let b = g.interval(&iv("[3,6]"));
        let r = g.interval(&iv("(0,inf)"));
        assert_eq!(GridSet::since(&a, &r, &b).to_intervals(), vec![iv("(5,10]")]);
        let r = g.interval(&iv("[0,0]"));
        assert_eq!(GridSet::since(&a, &r, &b).to_intervals(), vec![iv("[3,6]")]);
        let top = g.full();
        let r = g.interval(&iv("[1,2]"));
        assert_eq!(GridSet::since(&top, &r, &b).to_intervals(), vec![iv("[4,8]")]);
        assert_eq!(GridSet::until(&top, &r, &b).to_intervals(), vec![iv("[1,5]")]);
    }
}
