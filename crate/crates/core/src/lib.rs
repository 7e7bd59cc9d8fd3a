//! Pareto-optimal algorithmic recourse over multi-cost actionability graphs.
//!
//! The pipeline: load a tabular [`Dataset`](data::Dataset), build an
//! [`ActionabilityGraph`](graph::ActionabilityGraph) whose edges are feasible
//! single actions weighted by `k` user-chosen criteria, then run the
//! hop-bounded [`pareto_shortest_paths`](search::pareto_shortest_paths)
//! search and [`backtrack`](search::backtrack) witness paths for every
//! Pareto-optimal cost at each positively classified target.
//!
//! Criteria need not be differentiable: each aggregates along a path by sum
//! or max, and costs are compared by Pareto dominance only, never scalarized.
//!
//! [`epsnet`] covers the scaling layer: κ-shrinking and random ε-net samples.
//!
//! ```
//! use pareto_recourse::cost::{Aggregation, CostSpec, CostVector};
//! use pareto_recourse::graph::ActionabilityGraph;
//! use pareto_recourse::search::{pareto_shortest_paths, SearchOptions};
//!
//! let spec = CostSpec::external(&[Aggregation::Sum, Aggregation::Sum])?;
//! let mut g = ActionabilityGraph::with_vertex_count(3, spec.clone());
//! g.add_edge(0, 1, CostVector::new(vec![1.0, 5.0])?)?;
//! g.add_edge(0, 2, CostVector::new(vec![4.0, 1.0])?)?;
//! g.add_edge(1, 2, CostVector::new(vec![1.0, 1.0])?)?;
//!
//! let result = pareto_shortest_paths(&g, 0, 2, &spec, &SearchOptions::default())?;
//! let front: Vec<Vec<f64>> = result.table(2).costs().into_iter().map(|c| c.into_inner()).collect();
//! assert_eq!(front, vec![vec![2.0, 6.0], vec![4.0, 1.0]]);
//! # Ok::<(), pareto_recourse::Error>(())
//! ```

pub mod config;
pub mod cost;
pub mod data;
pub mod epsnet;
mod error;
pub mod frontier;
pub mod graph;
pub mod oracle;
pub mod search;
pub mod synthetic;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/dominance.md")]
    mod dominance {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/scaling.md")]
    mod scaling {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
