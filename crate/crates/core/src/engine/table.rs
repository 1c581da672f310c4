//! Temporal tables: constant tuples paired with intervals.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::EngineError;
use crate::language::Constant;
use crate::temporal::{cmp_right_end, Interval};

pub type Tuple = Vec<Constant>;

/// Rows grouped by tuple, groups in tuple order, intervals in ≺ order.
pub(crate) type Groups = Vec<(Tuple, Vec<Interval>)>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemporalTable {
    attrs: Vec<String>,
    rows: Vec<(Tuple, Interval)>,
}

impl TemporalTable {
    pub fn empty(attrs: Vec<String>) -> TemporalTable {
        TemporalTable { attrs, rows: Vec::new() }
    }

    /// Builds a table from rows in the given order.
    pub fn from_rows(attrs: Vec<String>, rows: Vec<(Tuple, Interval)>) -> Result<TemporalTable, EngineError> {
        if let Some((t, _)) = rows.iter().find(|(t, _)| t.len() != attrs.len()) {
            return Err(EngineError::Schema(format!(
                "row of width {} in table with {} attributes",
                t.len(),
                attrs.len()
            )));
        }
        Ok(TemporalTable { attrs, rows })
    }

    /// Builds a table and sorts its rows by tuple, then by ≺.
    pub fn from_unsorted(attrs: Vec<String>, mut rows: Vec<(Tuple, Interval)>) -> Result<TemporalTable, EngineError> {
        rows.sort();
        TemporalTable::from_rows(attrs, rows)
    }

    /// The zero-attribute table holding ⊤ over the whole line.
    pub fn top() -> TemporalTable {
        TemporalTable { attrs: Vec::new(), rows: vec![(Vec::new(), Interval::everything())] }
    }

    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    pub fn rows(&self) -> &[(Tuple, Interval)] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<(Tuple, Interval)> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Checks that rows sharing a tuple appear in ≺-nondecreasing order.
    pub fn validate_toa(&self) -> Result<(), EngineError> {
        let mut last: HashMap<&Tuple, &Interval> = HashMap::new();
        for (i, (t, iv)) in self.rows.iter().enumerate() {
            if let Some(prev) = last.insert(t, iv) {
                if iv.precedes(prev) {
                    return Err(EngineError::Toa { row: i });
                }
            }
        }
        Ok(())
    }

    /// True when no two rows with the same tuple could be merged.
    pub fn is_coalesced(&self) -> bool {
        match self.groups() {
            Ok(g) => g.iter().all(|(_, ivs)| ivs.windows(2).all(|w| !w[0].mergeable(&w[1]))),
            Err(_) => false,
        }
    }

    /// Hash-partitions rows by tuple, checking TOA along the way.
    pub(crate) fn groups(&self) -> Result<Groups, EngineError> {
        let mut index: HashMap<&Tuple, usize> = HashMap::new();
        let mut out: Vec<(Tuple, Vec<Interval>)> = Vec::new();
        for (i, (t, iv)) in self.rows.iter().enumerate() {
            let g = *index.entry(t).or_insert_with(|| {
                out.push((t.clone(), Vec::new()));
                out.len() - 1
            });
            let list = &mut out[g].1;
            if let Some(prev) = list.last() {
                if iv.precedes(prev) {
                    return Err(EngineError::Toa { row: i });
                }
            }
            list.push(iv.clone());
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    pub(crate) fn from_groups(attrs: Vec<String>, groups: Groups) -> TemporalTable {
        let rows = groups
            .into_iter()
            .flat_map(|(t, ivs)| ivs.into_iter().map(move |iv| (t.clone(), iv)))
            .collect();
        TemporalTable { attrs, rows }
    }

    fn attr_index(&self, a: &str) -> Result<usize, EngineError> {
        self.attrs
            .iter()
            .position(|x| x == a)
            .ok_or_else(|| EngineError::Schema(format!("unknown attribute `{a}`")))
    }
}

/// Merges one ≺-sorted list of intervals into maximal intervals.
pub(crate) fn coalesce_sorted(ivs: Vec<Interval>) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        if let Some(last) = out.last_mut() {
            if let Some(u) = last.union_if_interval(&iv) {
                *last = u;
                continue;
            }
        }
        out.push(iv);
    }
    out
}

/// Sorts then coalesces an arbitrary list of intervals.
pub(crate) fn coalesce_unsorted(mut ivs: Vec<Interval>) -> Vec<Interval> {
    ivs.sort();
    coalesce_sorted(ivs)
}

pub fn coalesce_table(t: &TemporalTable) -> Result<TemporalTable, EngineError> {
    let groups = t.groups()?.into_iter().map(|(k, ivs)| (k, coalesce_sorted(ivs))).collect();
    Ok(TemporalTable::from_groups(t.attrs.clone(), groups))
}

/// Intersections of two coalesced ≺-sorted lists, in ≺ order.
pub(crate) fn intersect_sorted(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        if let Some(x) = a[i].intersect(&b[j]) {
            out.push(x);
        }
        if cmp_right_end(&a[i], &b[j]).is_lt() {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn check_coalesced(groups: &Groups) -> Result<(), EngineError> {
    for (_, ivs) in groups {
        if ivs.windows(2).any(|w| w[0].mergeable(&w[1])) {
            return Err(EngineError::NotCoalesced);
        }
    }
    Ok(())
}

/// Natural join on shared attribute names; output attributes are those of
/// `left` followed by the remaining ones of `right`.
pub fn temporal_join(left: &TemporalTable, right: &TemporalTable) -> Result<TemporalTable, EngineError> {
    join_with(left, right, |a, b| intersect_sorted(a, b))
}

/// Join skeleton shared by the conjunction and SINCE/UNTIL evaluators: `f`
/// maps the interval lists of a matching tuple pair to the output intervals.
pub(crate) fn join_with<F>(left: &TemporalTable, right: &TemporalTable, f: F) -> Result<TemporalTable, EngineError>
where
    F: Fn(&[Interval], &[Interval]) -> Vec<Interval>,
{
    let lg = left.groups()?;
    let rg = right.groups()?;
    check_coalesced(&lg)?;
    check_coalesced(&rg)?;
    let mut shared = Vec::new();
    let mut extra = Vec::new();
    for (j, a) in right.attrs.iter().enumerate() {
        match left.attrs.iter().position(|x| x == a) {
            Some(i) => shared.push((i, j)),
            None => extra.push(j),
        }
    }
    let mut index: HashMap<Vec<&Constant>, Vec<usize>> = HashMap::new();
    for (g, (t, _)) in rg.iter().enumerate() {
        index.entry(shared.iter().map(|&(_, j)| &t[j]).collect()).or_default().push(g);
    }
    let mut attrs = left.attrs.clone();
    attrs.extend(extra.iter().map(|&j| right.attrs[j].clone()));
    let mut out = Vec::new();
    for (lt, livs) in &lg {
        let key: Vec<&Constant> = shared.iter().map(|&(i, _)| &lt[i]).collect();
        let Some(matches) = index.get(&key) else { continue };
        for &g in matches {
            let (rt, rivs) = &rg[g];
            let ivs = f(livs, rivs);
            if ivs.is_empty() {
                continue;
            }
            let mut t = lt.clone();
            t.extend(extra.iter().map(|&j| rt[j].clone()));
            out.push((t, ivs));
        }
    }
    Ok(TemporalTable::from_groups(attrs, out))
}

/// k-way ≺-merge of sorted interval lists.
pub(crate) fn merge_sorted(lists: Vec<&[Interval]>) -> Vec<Interval> {
    if lists.len() == 1 {
        return lists[0].to_vec();
    }
    let mut heap = BinaryHeap::new();
    for (k, l) in lists.iter().enumerate() {
        if let Some(iv) = l.first() {
            heap.push(Reverse((iv, k, 0usize)));
        }
    }
    let mut out = Vec::with_capacity(lists.iter().map(|l| l.len()).sum());
    while let Some(Reverse((iv, k, pos))) = heap.pop() {
        out.push(iv.clone());
        if let Some(next) = lists[k].get(pos + 1) {
            heap.push(Reverse((next, k, pos + 1)));
        }
    }
    out
}

/// Projection onto `attrs` (which may repeat or reorder); the result
/// satisfies TOA but is not coalesced.
pub fn project(t: &TemporalTable, attrs: &[String]) -> Result<TemporalTable, EngineError> {
    let idx = attrs.iter().map(|a| t.attr_index(a)).collect::<Result<Vec<_>, _>>()?;
    let groups = t.groups()?;
    let mut index: HashMap<Tuple, usize> = HashMap::new();
    let mut buckets: Vec<(Tuple, Vec<&[Interval]>)> = Vec::new();
    for (tuple, ivs) in &groups {
        let key: Tuple = idx.iter().map(|&i| tuple[i].clone()).collect();
        let b = *index.entry(key.clone()).or_insert_with(|| {
            buckets.push((key, Vec::new()));
            buckets.len() - 1
        });
        buckets[b].1.push(ivs);
    }
    let mut out: Groups = buckets.into_iter().map(|(k, ls)| (k, merge_sorted(ls))).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(TemporalTable::from_groups(attrs.to_vec(), out))
}

/// Union of two tables with identical attribute lists; TOA, not coalesced.
pub fn union_tables(a: &TemporalTable, b: &TemporalTable) -> Result<TemporalTable, EngineError> {
    if a.attrs != b.attrs {
        return Err(EngineError::Schema(format!(
            "union of ({}) and ({})",
            a.attrs.join(","),
            b.attrs.join(",")
        )));
    }
    let ga = a.groups()?;
    let gb = b.groups()?;
    let mut out = Vec::with_capacity(ga.len() + gb.len());
    let (mut i, mut j) = (0, 0);
    while i < ga.len() || j < gb.len() {
        let ord = match (ga.get(i), gb.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match ord {
            std::cmp::Ordering::Less => {
                out.push(ga[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(gb[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((ga[i].0.clone(), merge_sorted(vec![&ga[i].1, &gb[j].1])));
                i += 1;
                j += 1;
            }
        }
    }
    Ok(TemporalTable::from_groups(a.attrs.clone(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::TimePoint;

    fn iv(s: &str) -> Interval {
        Interval::parse(s).unwrap()
    }

    fn c(s: &str) -> Constant {
        Constant::new(s)
    }

    fn table(attrs: &[&str], rows: &[(&[&str], &str)]) -> TemporalTable {
        TemporalTable::from_rows(
            attrs.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|(t, i)| (t.iter().map(|x| c(x)).collect(), iv(i))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn coalesce_examples() {
        let t = table(&["x"], &[(&["a"], "[0,1]"), (&["a"], "(1,2)"), (&["b"], "[5,5]")]);
        assert_eq!(coalesce_table(&t).unwrap(), table(&["x"], &[(&["a"], "[0,2)"), (&["b"], "[5,5]")]));
        let t = table(&["x"], &[(&["a"], "(0,1)"), (&["a"], "(1,2)")]);
        assert_eq!(coalesce_table(&t).unwrap(), t);
    }

    #[test]
    fn toa_violation() {
        let t = table(&["x"], &[(&["a"], "[3,4]"), (&["b"], "[0,0]"), (&["a"], "[0,1]")]);
        assert_eq!(t.validate_toa(), Err(EngineError::Toa { row: 2 }));
        assert!(coalesce_table(&t).is_err());
    }

    #[test]
    fn join_examples() {
        let a = table(&["x"], &[(&["a"], "[0,4]")]);
        let b = table(&["x"], &[(&["a"], "(2,6)")]);
        assert_eq!(temporal_join(&a, &b).unwrap(), table(&["x"], &[(&["a"], "(2,4]")]));
        let b = table(&["x"], &[(&["b"], "(2,6)")]);
        assert!(temporal_join(&a, &b).unwrap().is_empty());
        let b = table(&["y"], &[(&["b"], "(2,6)")]);
        let j = temporal_join(&a, &b).unwrap();
        assert_eq!(j.attrs(), ["x", "y"]);
        assert_eq!(j.rows(), &[(vec![c("a"), c("b")], iv("(2,4]"))]);
    }

    #[test]
    fn projection_is_reordered() {
        let t = table(&["x"], &[(&["a"], "[1,1]"), (&["b"], "[0,0]")]);
        let p = project(&t, &[]).unwrap();
        assert_eq!(p.rows(), &[(vec![], iv("[0,0]")), (vec![], iv("[1,1]"))]);
        p.validate_toa().unwrap();
    }

    #[test]
    fn union_merges_groups() {
        let a = table(&["x"], &[(&["a"], "[0,1]"), (&["c"], "[0,1]")]);
        let b = table(&["x"], &[(&["a"], "[0,0]"), (&["b"], "[2,3]")]);
        let u = union_tables(&a, &b).unwrap();
        assert_eq!(u.len(), 4);
        u.validate_toa().unwrap();
        assert_eq!(u.rows()[0].1, iv("[0,0]"));
        let bad = table(&["y"], &[]);
        assert!(union_tables(&a, &bad).is_err());
    }

    #[test]
    fn top_table() {
        let t = TemporalTable::top();
        assert!(t.attrs().is_empty());
        assert!(t.rows()[0].1.contains(&TimePoint::int(-5)));
    }
}
