//! Exact dyadic time points, intervals and ranges.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemporalError {
    #[error("undefined sum: infinity plus negative infinity")]
    UndefinedSum,
    #[error("empty interval: {0}")]
    EmptyInterval(String),
    #[error("not a dyadic number: {0}")]
    NotDyadic(String),
    #[error("malformed time literal: {0}")]
    BadLiteral(String),
    #[error("malformed interval: {0}")]
    BadInterval(String),
    #[error("range must be nonnegative: {0}")]
    NegativeRange(String),
    #[error("gcd of an empty set")]
    EmptyGcd,
    #[error("gcd requires finite points")]
    InfiniteGcd,
}

/// Finite dyadic rational `num / 2^exp` in reduced form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut num = num;
        let mut exp = exp;
        if num.is_zero() {
            return Dyadic { num, exp: 0 };
        }
        let tz = num.trailing_zeros().unwrap_or(0).min(exp as u64) as u32;
        if tz > 0 {
            num >>= tz;
            exp -= tz;
        }
        Dyadic { num, exp }
    }

    pub fn integer(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    fn scaled(&self, exp: u32) -> BigInt {
        &self.num << (exp - self.exp)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let e = self.exp.max(other.exp);
        Dyadic::new(self.scaled(e) + other.scaled(e), e)
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { num: -self.num.clone(), exp: self.exp }
    }

    pub fn half(&self) -> Dyadic {
        Dyadic::new(self.num.clone(), self.exp + 1)
    }

    pub fn mul_int(&self, k: &BigInt) -> Dyadic {
        Dyadic::new(&self.num * k, self.exp)
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact quotient when `other` divides `self` into an integer.
    pub fn div_exact(&self, other: &Dyadic) -> Option<BigInt> {
        if other.is_zero() {
            return None;
        }
        let e = self.exp.max(other.exp);
        let (q, r) = self.scaled(e).div_rem(&other.scaled(e));
        r.is_zero().then_some(q)
    }

    /// Largest integer not greater than the value.
    pub fn floor(&self) -> BigInt {
        self.num.div_floor(&(BigInt::one() << self.exp))
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::NAN);
        n / 2f64.powi(self.exp as i32)
    }

    /// Exact decimal expansion.
    pub fn to_decimal(&self) -> String {
        if self.exp == 0 {
            return self.num.to_string();
        }
        let scaled = self.num.abs() * BigInt::from(5u32).pow(self.exp);
        let digits = scaled.to_string();
        let width = self.exp as usize;
        let padded = if digits.len() <= width {
            format!("{}{}", "0".repeat(width + 1 - digits.len()), digits)
        } else {
            digits
        };
        let split = padded.len() - width;
        let sign = if self.num.is_negative() { "-" } else { "" };
        format!("{}{}.{}", sign, &padded[..split], &padded[split..])
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        self.scaled(e).cmp(&other.scaled(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A point of the dense timeline extended with both infinities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TimePoint {
    NegInf,
    Finite(Dyadic),
    PosInf,
}

impl TimePoint {
    pub fn int(n: i64) -> Self {
        TimePoint::Finite(Dyadic::integer(n))
    }

    pub fn zero() -> Self {
        TimePoint::int(0)
    }

    pub fn dyadic(num: i64, exp: u32) -> Self {
        TimePoint::Finite(Dyadic::new(BigInt::from(num), exp))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, TimePoint::Finite(_))
    }

    pub fn finite(&self) -> Option<&Dyadic> {
        match self {
            TimePoint::Finite(d) => Some(d),
            _ => None,
        }
    }

    pub fn checked_add(&self, other: &TimePoint) -> Result<TimePoint, TemporalError> {
        use TimePoint::*;
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(TemporalError::UndefinedSum),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Finite(a), Finite(b)) => Ok(Finite(a.add(b))),
        }
    }

    pub fn checked_sub(&self, other: &TimePoint) -> Result<TimePoint, TemporalError> {
        self.checked_add(&other.neg())
    }

    pub fn neg(&self) -> TimePoint {
        match self {
            TimePoint::NegInf => TimePoint::PosInf,
            TimePoint::PosInf => TimePoint::NegInf,
            TimePoint::Finite(d) => TimePoint::Finite(d.neg()),
        }
    }

    /// Finite sum; panics only on the undefined case, which callers rule out.
    fn plus(&self, other: &TimePoint) -> TimePoint {
        self.checked_add(other).expect("undefined sum")
    }

    fn minus(&self, other: &TimePoint) -> TimePoint {
        self.checked_sub(other).expect("undefined sum")
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            TimePoint::NegInf => f64::NEG_INFINITY,
            TimePoint::PosInf => f64::INFINITY,
            TimePoint::Finite(d) => d.to_f64(),
        }
    }

    /// Parses `inf`, `-inf`, dyadic decimals with optional unit suffix, and `HH:MM:SS` clock times.
    pub fn parse(text: &str) -> Result<TimePoint, TemporalError> {
        let t = text.trim();
        match t {
            "inf" | "+inf" => return Ok(TimePoint::PosInf),
            "-inf" => return Ok(TimePoint::NegInf),
            _ => {}
        }
        if t.contains(':') {
            return parse_clock(t);
        }
        let (body, mult) = match t.chars().last() {
            Some('s') => (&t[..t.len() - 1], 1u32),
            Some('m') => (&t[..t.len() - 1], 60),
            Some('h') => (&t[..t.len() - 1], 3600),
            Some('d') => (&t[..t.len() - 1], 86400),
            _ => (t, 1),
        };
        let (num, den) = parse_decimal(body).ok_or_else(|| TemporalError::BadLiteral(t.to_string()))?;
        dyadic_from_ratio(num * BigInt::from(mult), den)
            .map(TimePoint::Finite)
            .ok_or_else(|| TemporalError::NotDyadic(t.to_string()))
    }

    /// Renders as `HH:MM:SS` when the value lies within one day, else as seconds.
    pub fn to_clock(&self) -> String {
        if let TimePoint::Finite(d) = self {
            let secs = d.floor();
            if !d.is_negative() && secs < BigInt::from(86400) {
                let s = secs.to_u32().unwrap_or(0);
                let frac = d.add(&Dyadic::new(-secs.clone(), 0));
                let mut out = format!("{:02}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60);
                if !frac.is_zero() {
                    let f = frac.to_decimal();
                    out.push_str(&f[1..]);
                }
                return out;
            }
        }
        self.to_string()
    }
}

fn parse_clock(t: &str) -> Result<TimePoint, TemporalError> {
    let parts: Vec<&str> = t.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(TemporalError::BadLiteral(t.to_string()));
    }
    let bad = || TemporalError::BadLiteral(t.to_string());
    let h: u64 = parts[0].parse().map_err(|_| bad())?;
    let m: u64 = parts[1].parse().map_err(|_| bad())?;
    if m >= 60 {
        return Err(bad());
    }
    let base = Dyadic::integer((h * 3600 + m * 60) as i64);
    if parts.len() == 2 {
        return Ok(TimePoint::Finite(base));
    }
    let (num, den) = parse_decimal(parts[2]).ok_or_else(bad)?;
    if num.is_negative() || num >= BigInt::from(60) * &den {
        return Err(bad());
    }
    let s = dyadic_from_ratio(num, den).ok_or_else(|| TemporalError::NotDyadic(t.to_string()))?;
    Ok(TimePoint::Finite(base.add(&s)))
}

/// Parses a plain decimal into numerator and power-of-ten denominator.
pub(crate) fn parse_decimal(s: &str) -> Option<(BigInt, BigInt)> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some((num, den))
}

fn dyadic_from_ratio(num: BigInt, den: BigInt) -> Option<Dyadic> {
    let g = num.gcd(&den);
    let (num, den) = if g.is_zero() { (num, den) } else { (num / &g, den / &g) };
    let tz = den.trailing_zeros().unwrap_or(0);
    if den != BigInt::one() << tz {
        return None;
    }
    Some(Dyadic::new(num, tz as u32))
}

impl Ord for TimePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        use TimePoint::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for TimePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimePoint::NegInf => write!(f, "-inf"),
            TimePoint::PosInf => write!(f, "inf"),
            TimePoint::Finite(d) => write!(f, "{}", d.to_decimal()),
        }
    }
}

impl Serialize for TimePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TimePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TimePoint::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Largest `d > 0` dividing every element; `{0}` gives 1.
pub fn gcd_dyadic<'a, I: IntoIterator<Item = &'a TimePoint>>(points: I) -> Result<TimePoint, TemporalError> {
    let mut vals = Vec::new();
    for p in points {
        match p {
            TimePoint::Finite(d) => vals.push(d.clone()),
            _ => return Err(TemporalError::InfiniteGcd),
        }
    }
    if vals.is_empty() {
        return Err(TemporalError::EmptyGcd);
    }
    let e = vals.iter().map(|d| d.exp).max().unwrap_or(0);
    let g = vals.iter().fold(BigInt::zero(), |acc, d| acc.gcd(&d.scaled(e)));
    if g.is_zero() {
        return Ok(TimePoint::int(1));
    }
    Ok(TimePoint::Finite(Dyadic::new(g, e)))
}

/// A nonempty convex set of time points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: TimePoint,
    lo_closed: bool,
    hi: TimePoint,
    hi_closed: bool,
}

impl Interval {
    /// Builds an interval, returning `None` when the point set is empty.
    /// Infinite ends are forced open.
    pub fn make(lo: TimePoint, lo_closed: bool, hi: TimePoint, hi_closed: bool) -> Option<Interval> {
        let lo_closed = lo_closed && lo.is_finite();
        let hi_closed = hi_closed && hi.is_finite();
        match lo.cmp(&hi) {
            Ordering::Greater => None,
            Ordering::Equal if !(lo_closed && hi_closed) => None,
            _ if lo == TimePoint::PosInf || hi == TimePoint::NegInf => None,
            _ => Some(Interval { lo, lo_closed, hi, hi_closed }),
        }
    }

    pub fn new(lo: TimePoint, lo_closed: bool, hi: TimePoint, hi_closed: bool) -> Result<Interval, TemporalError> {
        let text = format!(
            "{}{},{}{}",
            if lo_closed { '[' } else { '(' },
            lo,
            hi,
            if hi_closed { ']' } else { ')' }
        );
        Interval::make(lo, lo_closed, hi, hi_closed).ok_or(TemporalError::EmptyInterval(text))
    }

    pub fn closed(lo: TimePoint, hi: TimePoint) -> Interval {
        Interval::new(lo, true, hi, true).expect("closed interval")
    }

    pub fn open(lo: TimePoint, hi: TimePoint) -> Interval {
        Interval::new(lo, false, hi, false).expect("open interval")
    }

    pub fn point(t: TimePoint) -> Interval {
        Interval::closed(t.clone(), t)
    }

    pub fn everything() -> Interval {
        Interval { lo: TimePoint::NegInf, lo_closed: false, hi: TimePoint::PosInf, hi_closed: false }
    }

    pub fn lo(&self) -> &TimePoint {
        &self.lo
    }

    pub fn hi(&self) -> &TimePoint {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_punctual(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_open(&self) -> bool {
        !self.lo_closed && !self.hi_closed
    }

    pub fn contains(&self, t: &TimePoint) -> bool {
        let above = match self.lo.cmp(t) {
            Ordering::Less => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Greater => false,
        };
        let below = match t.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        cmp_lo(self, other) != Ordering::Less && cmp_hi(self, other) != Ordering::Greater
    }

    /// The strict order used to sort rows of temporal tables.
    pub fn precedes(&self, other: &Interval) -> bool {
        self.order(other) == Ordering::Less
    }

    /// Total order underlying [`Interval::precedes`].
    pub fn order(&self, other: &Interval) -> Ordering {
        cmp_lo(self, other).then_with(|| cmp_hi(self, other))
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = if cmp_lo(self, other) == Ordering::Less {
            (other.lo.clone(), other.lo_closed)
        } else {
            (self.lo.clone(), self.lo_closed)
        };
        let (hi, hi_closed) = if cmp_hi(self, other) == Ordering::Greater {
            (other.hi.clone(), other.hi_closed)
        } else {
            (self.hi.clone(), self.hi_closed)
        };
        Interval::make(lo, lo_closed, hi, hi_closed)
    }

    /// True when the union of the two point sets is a single interval.
    pub fn mergeable(&self, other: &Interval) -> bool {
        let (a, b) = if cmp_lo(self, other) == Ordering::Greater { (other, self) } else { (self, other) };
        match a.hi.cmp(&b.lo) {
            Ordering::Greater => true,
            Ordering::Equal => a.hi_closed || b.lo_closed,
            Ordering::Less => false,
        }
    }

    pub fn union_if_interval(&self, other: &Interval) -> Option<Interval> {
        if !self.mergeable(other) {
            return None;
        }
        let (lo, lo_closed) = if cmp_lo(self, other) == Ordering::Greater {
            (other.lo.clone(), other.lo_closed)
        } else {
            (self.lo.clone(), self.lo_closed)
        };
        let (hi, hi_closed) = if cmp_hi(self, other) == Ordering::Less {
            (other.hi.clone(), other.hi_closed)
        } else {
            (self.hi.clone(), self.hi_closed)
        };
        Interval::make(lo, lo_closed, hi, hi_closed)
    }

    pub fn closure(&self) -> Interval {
        Interval::make(self.lo.clone(), true, self.hi.clone(), true).expect("closure of nonempty")
    }

    /// `{t + k | t ∈ ι, k ∈ ϱ}`.
    pub fn plus_o(&self, r: &Range) -> Result<Interval, TemporalError> {
        let r = r.interval();
        let lo = self.lo.checked_add(&r.lo)?;
        let hi = self.hi.checked_add(&r.hi)?;
        Interval::new(lo, self.lo_closed && r.lo_closed, hi, self.hi_closed && r.hi_closed)
    }

    /// `{t − k | t ∈ ι, k ∈ ϱ}`.
    pub fn minus_o(&self, r: &Range) -> Result<Interval, TemporalError> {
        let r = r.interval();
        let lo = self.lo.checked_sub(&r.hi)?;
        let hi = self.hi.checked_sub(&r.lo)?;
        Interval::new(lo, self.lo_closed && r.hi_closed, hi, self.hi_closed && r.lo_closed)
    }

    /// `{t | t − k ∈ ι for all k ∈ ϱ}`, or `None` when empty.
    pub fn plus_c(&self, r: &Range) -> Option<Interval> {
        let ri = r.interval();
        // t − ϱ spans from t − r2 to t − r1
        let (lo, lo_closed) = if ri.hi == TimePoint::PosInf {
            if self.lo != TimePoint::NegInf {
                return None;
            }
            (TimePoint::NegInf, false)
        } else {
            (self.lo.plus(&ri.hi), self.lo_closed || !ri.hi_closed)
        };
        let hi = self.hi.plus(&ri.lo);
        let hi_closed = self.hi_closed || !ri.lo_closed;
        Interval::make(lo, lo_closed, hi, hi_closed)
    }

    /// `{t | t + k ∈ ι for all k ∈ ϱ}`, or `None` when empty.
    pub fn minus_c(&self, r: &Range) -> Option<Interval> {
        let ri = r.interval();
        let lo = self.lo.minus(&ri.lo);
        let lo_closed = self.lo_closed || !ri.lo_closed;
        let (hi, hi_closed) = if ri.hi == TimePoint::PosInf {
            if self.hi != TimePoint::PosInf {
                return None;
            }
            (TimePoint::PosInf, false)
        } else {
            (self.hi.minus(&ri.hi), self.hi_closed || !ri.hi_closed)
        };
        Interval::make(lo, lo_closed, hi, hi_closed)
    }

    pub fn shift(&self, by: &TimePoint) -> Interval {
        Interval::make(self.lo.plus(by), self.lo_closed, self.hi.plus(by), self.hi_closed).expect("shift keeps shape")
    }

    /// Parses `[a,b]`, `(a,b)`, `[a,b)` or `(a,b]`.
    pub fn parse(text: &str) -> Result<Interval, TemporalError> {
        let t = text.trim();
        let bad = || TemporalError::BadInterval(t.to_string());
        let lo_closed = match t.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad()),
        };
        let hi_closed = match t.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad()),
        };
        let inner = &t[1..t.len() - 1];
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let lo = TimePoint::parse(a)?;
        let hi = TimePoint::parse(b)?;
        if (lo_closed && !lo.is_finite()) || (hi_closed && !hi.is_finite()) {
            // (t,∞] is identified with (t,∞)
            return Interval::new(lo, lo_closed, hi, hi_closed);
        }
        Interval::new(lo, lo_closed, hi, hi_closed)
    }

    pub fn display_with(&self, fmt: TimeFormat) -> String {
        let show = |p: &TimePoint| match fmt {
            TimeFormat::Seconds => p.to_string(),
            TimeFormat::Clock => p.to_clock(),
        };
        format!(
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            show(&self.lo),
            show(&self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// How time points are rendered in output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeFormat {
    #[default]
    Seconds,
    Clock,
}

fn cmp_lo(a: &Interval, b: &Interval) -> Ordering {
    a.lo.cmp(&b.lo).then_with(|| b.lo_closed.cmp(&a.lo_closed))
}

fn cmp_hi(a: &Interval, b: &Interval) -> Ordering {
    a.hi.cmp(&b.hi).then_with(|| a.hi_closed.cmp(&b.hi_closed))
}

/// Order on right ends: `)` before `]` at the same point.
pub fn cmp_right_end(a: &Interval, b: &Interval) -> Ordering {
    cmp_hi(a, b)
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order(other)
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(TimeFormat::Seconds))
    }
}

/// An interval with nonnegative endpoints, used as an operator range.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Range(Interval);

impl Range {
    pub fn new(i: Interval) -> Result<Range, TemporalError> {
        if i.lo < TimePoint::zero() {
            return Err(TemporalError::NegativeRange(i.to_string()));
        }
        Ok(Range(i))
    }

    pub fn punctual(r: TimePoint) -> Range {
        Range::new(Interval::point(r)).expect("nonnegative point")
    }

    pub fn interval(&self) -> &Interval {
        &self.0
    }

    pub fn lo(&self) -> &TimePoint {
        &self.0.lo
    }

    pub fn hi(&self) -> &TimePoint {
        &self.0.hi
    }

    pub fn is_punctual(&self) -> bool {
        self.0.is_punctual()
    }

    pub fn is_open(&self) -> bool {
        self.0.is_open()
    }

    /// Punctual or fully open.
    pub fn is_normal(&self) -> bool {
        self.is_punctual() || self.is_open()
    }

    /// Splits into an open part and the punctual closed ends, as present.
    pub fn split(&self) -> Vec<Range> {
        if self.is_normal() {
            return vec![self.clone()];
        }
        let mut out = vec![Range(Interval::open(self.0.lo.clone(), self.0.hi.clone()))];
        if self.0.lo_closed {
            out.push(Range::punctual(self.0.lo.clone()));
        }
        if self.0.hi_closed {
            out.push(Range::punctual(self.0.hi.clone()));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Range, TemporalError> {
        Range::new(Interval::parse(text)?)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `ϱ ⊑ ι`: some shift of the range lies inside the interval.
pub fn fits(r: &Range, i: &Interval) -> bool {
    i.minus_c(r).is_some()
}

/// Length comparison `r2 − r1 ≤ ι_e − ι_b` with ∞-aware arithmetic.
pub fn fits_by_length(r: &Range, i: &Interval) -> bool {
    let len = |lo: &TimePoint, hi: &TimePoint| match (lo, hi) {
        (TimePoint::Finite(a), TimePoint::Finite(b)) => TimePoint::Finite(b.add(&a.neg())),
        _ => TimePoint::PosInf,
    };
    len(r.lo(), r.hi()) <= len(i.lo(), i.hi())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: &str) -> Interval {
        Interval::parse(s).unwrap()
    }

    fn rg(s: &str) -> Range {
        Range::parse(s).unwrap()
    }

    #[test]
    fn add_and_absorb() {
        let a = TimePoint::parse("1.5").unwrap();
        let b = TimePoint::parse("0.25").unwrap();
        assert_eq!(a.checked_add(&b).unwrap(), TimePoint::parse("1.75").unwrap());
        assert_eq!(TimePoint::int(3).checked_add(&TimePoint::PosInf).unwrap(), TimePoint::PosInf);
        assert_eq!(TimePoint::PosInf.checked_add(&TimePoint::NegInf), Err(TemporalError::UndefinedSum));
        let x = TimePoint::parse("0.625").unwrap();
        let y = TimePoint::parse("0.375").unwrap();
        assert_eq!(x.checked_add(&y).unwrap(), TimePoint::int(1));
    }

    #[test]
    fn literals() {
        assert_eq!(TimePoint::parse("1m").unwrap(), TimePoint::int(60));
        assert_eq!(TimePoint::parse("6.5m").unwrap(), TimePoint::int(390));
        assert_eq!(TimePoint::parse("24h").unwrap(), TimePoint::int(86400));
        assert_eq!(TimePoint::parse("13:00:15").unwrap(), TimePoint::int(46815));
        assert!(matches!(TimePoint::parse("0.1"), Err(TemporalError::NotDyadic(_))));
        assert_eq!(TimePoint::parse("0.1m").unwrap(), TimePoint::int(6));
        assert_eq!(TimePoint::dyadic(-5, 3).to_string(), "-0.625");
        assert_eq!(TimePoint::int(46877).to_clock(), "13:01:17");
    }

    #[test]
    fn precedence_examples() {
        assert!(iv("[3,8)").precedes(&iv("[4,7)")));
        assert!(iv("[4,7)").precedes(&iv("(4,6)")));
        assert!(iv("(4,6)").precedes(&iv("(4,7)")));
        assert!(iv("(4,7)").precedes(&iv("(4,7]")));
        assert!(!iv("[1,2]").precedes(&iv("[1,2]")));
    }

    #[test]
    fn set_operations() {
        assert_eq!(iv("[0,4]").intersect(&iv("(2,6)")), Some(iv("(2,4]")));
        assert_eq!(iv("[0,1)").intersect(&iv("[1,2]")), None);
        assert_eq!(iv("(-inf,5]").intersect(&iv("[5,5]")), Some(iv("[5,5]")));
        assert_eq!(iv("[0,1]").union_if_interval(&iv("(1,2)")), Some(iv("[0,2)")));
        assert_eq!(iv("(0,1)").union_if_interval(&iv("(1,2)")), None);
        assert_eq!(iv("(0,3)").union_if_interval(&iv("[2,5]")), Some(iv("(0,5]")));
        assert_eq!(iv("(1,2)").closure(), iv("[1,2]"));
        assert_eq!(iv("(-inf,3)").closure(), iv("(-inf,3]"));
    }

    #[test]
    fn shifts() {
        assert_eq!(iv("(1,2)").plus_o(&rg("[3,3]")).unwrap(), iv("(4,5)"));
        assert_eq!(iv("[1,1]").plus_o(&rg("(0,2)")).unwrap(), iv("(1,3)"));
        assert_eq!(iv("[5,5]").minus_o(&rg("(1,2)")).unwrap(), iv("(3,4)"));
        assert_eq!(iv("(0,4)").plus_c(&rg("(1,2)")), Some(iv("[2,5]")));
        assert_eq!(iv("(0,inf)").minus_c(&rg("(0,inf)")), Some(iv("[0,inf)")));
        assert_eq!(iv("[0,10)").plus_c(&rg("[2,2]")), Some(iv("[2,12)")));
        assert_eq!(iv("(-inf,5)").minus_c(&rg("(0,inf)")), None);
    }

    #[test]
    fn fits_examples() {
        assert!(fits(&rg("(1,2)"), &iv("(0,5)")));
        assert!(!fits(&rg("(1,4)"), &iv("[0,2]")));
        assert!(fits(&rg("[7,7]"), &iv("[0,0]")));
        assert!(fits_by_length(&rg("(0,inf)"), &iv("(-inf,5)")));
        assert!(!fits(&rg("(0,inf)"), &iv("(-inf,5)")));
    }

    #[test]
    fn gcd_examples() {
        let g = |xs: &[&str]| {
            let v: Vec<TimePoint> = xs.iter().map(|s| TimePoint::parse(s).unwrap()).collect();
            gcd_dyadic(&v).unwrap()
        };
        assert_eq!(g(&["0"]), TimePoint::int(1));
        assert_eq!(g(&["1.5", "2"]), TimePoint::parse("0.5").unwrap());
        assert_eq!(g(&["6", "4"]), TimePoint::int(2));
        assert!(gcd_dyadic(&Vec::<TimePoint>::new()).is_err());
    }
}
