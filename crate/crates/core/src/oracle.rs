//! Exhaustive walk enumeration, the independent check on the dynamic
//! program. Exponential; restricted to tiny instances.

use crate::cost::{Aggregation, CostSpec, CostVector};
use crate::error::{Error, Result};
use crate::graph::ActionabilityGraph;

pub const MAX_ORACLE_VERTICES: usize = 12;
pub const MAX_ORACLE_HOPS: usize = 6;

/// Non-dominated cost sets per vertex over **all** walks of at most
/// `max_hops` edges from `source`, each set sorted lexicographically.
pub fn brute_force_oracle(
    g: &ActionabilityGraph,
    source: usize,
    max_hops: usize,
    spec: &CostSpec,
) -> Result<Vec<Vec<CostVector>>> {
    if g.len() > MAX_ORACLE_VERTICES || max_hops > MAX_ORACLE_HOPS {
        return Err(Error::TooLarge(format!(
            "{} vertices, {max_hops} hops (limits {MAX_ORACLE_VERTICES}, {MAX_ORACLE_HOPS})",
            g.len()
        )));
    }
    if source >= g.len() {
        return Err(Error::UnknownVertex(format!("#{source}")));
    }
    if spec.k() != g.k() {
        return Err(Error::LengthMismatch {
            expected: g.k(),
            actual: spec.k(),
        });
    }
    let aggs = spec.aggregations();
    let mut reached: Vec<Vec<Vec<f64>>> = vec![Vec::new(); g.len()];
    let mut stack = vec![(source, vec![0.0; spec.k()], 0usize)];
    while let Some((v, cost, depth)) = stack.pop() {
        if depth < max_hops {
            for e in g.out_edges(v) {
                let next: Vec<f64> = cost
                    .iter()
                    .zip(e.cost.as_slice())
                    .zip(&aggs)
                    .map(|((&p, &w), agg)| match agg {
                        Aggregation::Sum => p + w,
                        Aggregation::Max => if w > p { w } else { p },
                    })
                    .collect();
                stack.push((e.to, next, depth + 1));
            }
        }
        reached[v].push(cost);
    }
    reached
        .into_iter()
        .map(|costs| {
            let mut front: Vec<Vec<f64>> = Vec::new();
            for (i, c) in costs.iter().enumerate() {
                let beaten = costs.iter().any(|o| {
                    o.iter().zip(c).all(|(a, b)| a <= b) && o.iter().zip(c).any(|(a, b)| a < b)
                });
                if !beaten && !costs[..i].contains(c) {
                    front.push(c.clone());
                }
            }
            let mut front = front.into_iter().map(CostVector::new).collect::<Result<Vec<_>>>()?;
            front.sort();
            Ok(front)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Aggregation::Sum;

    fn cv(v: &[f64]) -> CostVector {
        CostVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_vertex() {
        let g = ActionabilityGraph::with_vertex_count(1, CostSpec::external(&[Sum, Sum]).unwrap());
        let sets = brute_force_oracle(&g, 0, 3, g.cost_spec()).unwrap();
        assert_eq!(sets, vec![vec![CostVector::zeros(2)]]);
    }

    #[test]
    fn two_cycle_adds_nothing() {
        let spec = CostSpec::external(&[Sum, Sum]).unwrap();
        let mut g = ActionabilityGraph::with_vertex_count(3, spec);
        g.add_edge(0, 1, cv(&[1.0, 2.0])).unwrap();
        g.add_edge(1, 0, cv(&[2.0, 1.0])).unwrap();
        g.add_edge(1, 2, cv(&[1.0, 1.0])).unwrap();
        let sets = brute_force_oracle(&g, 0, 4, g.cost_spec()).unwrap();
        assert_eq!(sets[0], vec![cv(&[0.0, 0.0])]);
        assert_eq!(sets[1], vec![cv(&[1.0, 2.0])]);
        assert_eq!(sets[2], vec![cv(&[2.0, 3.0])]);
    }

    #[test]
    fn refuses_large_instances() {
        let g = ActionabilityGraph::with_vertex_count(13, CostSpec::external(&[Sum]).unwrap());
        assert!(matches!(brute_force_oracle(&g, 0, 2, g.cost_spec()), Err(Error::TooLarge(_))));
        let g = ActionabilityGraph::with_vertex_count(5, CostSpec::external(&[Sum]).unwrap());
        assert!(matches!(brute_force_oracle(&g, 0, 7, g.cost_spec()), Err(Error::TooLarge(_))));
    }
}
