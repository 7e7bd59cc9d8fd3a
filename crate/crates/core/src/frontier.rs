//! Pareto tables and dominance pruning.
//!
//! A table holds mutually non-dominated cost vectors in lexicographic order,
//! one entry per distinct vector. Entries that were reached by several
//! parents keep every predecessor link, so path multiplicity is recovered
//! when backtracking rather than stored as duplicate cost points.
//!
//! Pruning sorts the candidates lexicographically first. For two criteria the
//! first component is then non-decreasing, so one linear scan comparing the
//! second component suffices. For three or more criteria each candidate is
//! checked only against the survivors that precede it in the sort order,
//! since nothing later in lexicographic order can dominate it.

use serde::{Deserialize, Serialize};

use crate::cost::{dominates_unchecked, CostVector};
use crate::error::{Error, Result};

/// Link to the table entry a path was extended from.
///
/// `round` is the dynamic-programming round of the parent's table, so the
/// parent is `rounds[round][vertex].entries()[entry]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Predecessor {
    pub vertex: usize,
    pub round: usize,
    pub entry: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub cost: CostVector,
    /// Sorted and free of duplicates. Empty only for the search origin.
    pub predecessors: Vec<Predecessor>,
    pub first_reached_hop: usize,
}

impl TableEntry {
    pub fn new(cost: CostVector, predecessors: Vec<Predecessor>, first_reached_hop: usize) -> Self {
        let mut predecessors = predecessors;
        predecessors.sort_unstable();
        predecessors.dedup();
        TableEntry {
            cost,
            predecessors,
            first_reached_hop,
        }
    }

    /// An entry with no links, e.g. a bare cost point.
    pub fn point(cost: CostVector) -> Self {
        TableEntry::new(cost, Vec::new(), 0)
    }

    fn absorb(&mut self, other: TableEntry) {
        self.first_reached_hop = self.first_reached_hop.min(other.first_reached_hop);
        if other.predecessors.is_empty() {
            return;
        }
        self.predecessors.extend(other.predecessors);
        self.predecessors.sort_unstable();
        self.predecessors.dedup();
    }
}

/// Lexicographically sorted, duplicate-free set of non-dominated entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoTable {
    entries: Vec<TableEntry>,
}

impl ParetoTable {
    pub fn empty() -> Self {
        ParetoTable::default()
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<TableEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn costs(&self) -> Vec<CostVector> {
        self.entries.iter().map(|e| e.cost.clone()).collect()
    }

    /// Index of the entry holding exactly `cost`.
    pub fn find(&self, cost: &CostVector) -> Option<usize> {
        self.entries.binary_search_by(|e| e.cost.cmp(cost)).ok()
    }
}

/// Sorts by cost, breaking ties by predecessor list then input position,
/// and merges entries with equal cost.
fn sort_and_collapse(mut candidates: Vec<TableEntry>) -> Vec<TableEntry> {
    candidates.sort_by(|a, b| a.cost.cmp(&b.cost).then_with(|| a.predecessors.cmp(&b.predecessors)));
    let mut out: Vec<TableEntry> = Vec::with_capacity(candidates.len());
    for c in candidates {
        match out.last_mut() {
            Some(last) if last.cost == c.cost => last.absorb(c),
            _ => out.push(c),
        }
    }
    out
}

/// Returns exactly the non-dominated candidates, one entry per distinct
/// cost vector, in lexicographic order.
pub fn prune(candidates: Vec<TableEntry>) -> ParetoTable {
    let sorted = sort_and_collapse(candidates);
    let Some(k) = sorted.first().map(|e| e.cost.len()) else {
        return ParetoTable::empty();
    };
    debug_assert!(sorted.iter().all(|e| e.cost.len() == k));
    let entries = match k {
        0 | 1 => sorted.into_iter().take(1).collect(),
        2 => {
            let mut best_second = f64::INFINITY;
            sorted
                .into_iter()
                .filter(|e| {
                    let second = e.cost.as_slice()[1];
                    if second < best_second {
                        best_second = second;
                        true
                    } else {
                        false
                    }
                })
                .collect()
        }
        _ => {
            let mut kept: Vec<TableEntry> = Vec::new();
            for e in sorted {
                if !kept.iter().any(|s| dominates_unchecked(s.cost.as_slice(), e.cost.as_slice())) {
                    kept.push(e);
                }
            }
            kept
        }
    };
    ParetoTable { entries }
}

/// Sort and duplicate collapse without any dominance filtering.
pub(crate) fn collapse_only(candidates: Vec<TableEntry>) -> ParetoTable {
    ParetoTable {
        entries: sort_and_collapse(candidates),
    }
}

/// `true` iff no vector in `entries` dominates another.
pub fn is_pareto_set(entries: &[CostVector]) -> bool {
    entries.iter().enumerate().all(|(i, a)| {
        entries.iter().enumerate().all(|(j, b)| {
            i == j || a.len() != b.len() || !dominates_unchecked(a.as_slice(), b.as_slice())
        })
    })
}

/// Downsamples a table to `cap` entries at equal index intervals along the
/// lexicographic order, keeping both extreme points.
///
/// The result is still a Pareto set but no longer the complete front.
pub fn cap_table(table: ParetoTable, cap: usize) -> Result<ParetoTable> {
    if cap < 2 {
        return Err(Error::OutOfRange(format!("table cap must be >= 2, got {cap}")));
    }
    let n = table.len();
    if n <= cap {
        return Ok(table);
    }
    let mut keep = vec![false; n];
    for i in 0..cap {
        keep[(i * (n - 1) + (cap - 1) / 2) / (cap - 1)] = true;
    }
    let entries = table
        .entries
        .into_iter()
        .zip(keep)
        .filter_map(|(e, k)| k.then_some(e))
        .collect();
    Ok(ParetoTable { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cv(v: &[f64]) -> CostVector {
        CostVector::new(v.to_vec()).unwrap()
    }

    fn points(vs: &[&[f64]]) -> Vec<TableEntry> {
        vs.iter().map(|v| TableEntry::point(cv(v))).collect()
    }

    /// All-pairs dominance filter, deliberately naive.
    fn naive_front(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for (i, a) in vs.iter().enumerate() {
            let dominated = vs.iter().any(|b| {
                b.iter().zip(a).all(|(x, y)| x <= y) && b.iter().zip(a).any(|(x, y)| x < y)
            });
            let earlier_dup = vs[..i].iter().any(|b| b == a);
            if !dominated && !earlier_dup {
                out.push(a.clone());
            }
        }
        out.sort_by(|a, b| cv(a).cmp(&cv(b)));
        out
    }

    #[test]
    fn prunes_the_dominated_point() {
        let t = prune(points(&[&[2.0, 31.0], &[6.0, 20.0], &[5.0, 15.0], &[6.0, 8.7]]));
        assert_eq!(t.costs(), vec![cv(&[2.0, 31.0]), cv(&[5.0, 15.0]), cv(&[6.0, 8.7])]);
    }

    #[test]
    fn empty_and_duplicates() {
        assert!(prune(Vec::new()).is_empty());
        let t = prune(points(&[&[1.0, 1.0], &[1.0, 1.0]]));
        assert_eq!(t.costs(), vec![cv(&[1.0, 1.0])]);
    }

    #[test]
    fn duplicates_merge_predecessors() {
        let a = TableEntry::new(cv(&[2.0, 8.0]), vec![Predecessor { vertex: 3, round: 1, entry: 0 }], 2);
        let b = TableEntry::new(cv(&[2.0, 8.0]), vec![Predecessor { vertex: 1, round: 1, entry: 0 }], 1);
        let t = prune(vec![a, b]);
        assert_eq!(t.len(), 1);
        let e = &t.entries()[0];
        assert_eq!(e.first_reached_hop, 1);
        assert_eq!(e.predecessors.iter().map(|p| p.vertex).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn single_criterion_keeps_the_minimum() {
        let t = prune(points(&[&[3.0], &[1.0], &[2.0], &[1.0]]));
        assert_eq!(t.costs(), vec![cv(&[1.0])]);
    }

    #[test]
    fn three_criteria() {
        let t = prune(points(&[
            &[1.0, 5.0, 5.0],
            &[1.0, 5.0, 6.0],
            &[2.0, 1.0, 9.0],
            &[2.0, 2.0, 9.0],
            &[0.0, 9.0, 9.0],
            &[3.0, 3.0, 0.0],
        ]));
        assert_eq!(
            t.costs(),
            vec![cv(&[0.0, 9.0, 9.0]), cv(&[1.0, 5.0, 5.0]), cv(&[2.0, 1.0, 9.0]), cv(&[3.0, 3.0, 0.0])]
        );
    }

    #[test]
    fn pareto_set_check() {
        assert!(is_pareto_set(&[cv(&[2.0, 31.0]), cv(&[5.0, 15.0]), cv(&[6.0, 8.7])]));
        assert!(!is_pareto_set(&[cv(&[1.0, 1.0]), cv(&[2.0, 2.0])]));
        assert!(is_pareto_set(&[]));
    }

    #[test]
    fn cap_keeps_extremes_at_equal_intervals() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (9 - i) as f64]).collect();
        let t = prune(pts.iter().map(|v| TableEntry::point(cv(v))).collect());
        let capped = cap_table(t.clone(), 4).unwrap();
        let firsts: Vec<f64> = capped.entries().iter().map(|e| e.cost.as_slice()[0]).collect();
        assert_eq!(firsts, vec![0.0, 3.0, 6.0, 9.0]);
        assert_eq!(cap_table(t.clone(), 10).unwrap(), t);
        assert!(cap_table(t, 1).is_err());
    }

    #[test]
    fn find_locates_entries() {
        let t = prune(points(&[&[1.0, 3.0], &[2.0, 2.0], &[3.0, 1.0]]));
        assert_eq!(t.find(&cv(&[2.0, 2.0])), Some(1));
        assert_eq!(t.find(&cv(&[2.0, 3.0])), None);
    }

    fn vec_set() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..=5).prop_flat_map(|k| {
            prop::collection::vec(
                prop::collection::vec(0u8..8, k).prop_map(|v| v.into_iter().map(f64::from).collect()),
                0..200,
            )
        })
    }

    proptest! {
        #[test]
        fn prune_matches_all_pairs_filter(vs in vec_set()) {
            let t = prune(vs.iter().map(|v| TableEntry::point(cv(v))).collect());
            let got: Vec<Vec<f64>> = t.costs().into_iter().map(CostVector::into_inner).collect();
            prop_assert_eq!(got, naive_front(&vs));
            prop_assert!(is_pareto_set(&t.costs()));
        }

        #[test]
        fn prune_is_idempotent(vs in vec_set()) {
            let once = prune(vs.iter().map(|v| TableEntry::point(cv(v))).collect());
            let twice = prune(once.clone().into_entries());
            prop_assert_eq!(once, twice);
        }
    }
}
