//! Hop-bounded Pareto shortest paths.
//!
//! Round `l` builds every table `D^l_v` from the round `l - 1` tables only:
//!
//! ```text
//! D^l_v = prune( D^{l-1}_v  ∪  { combine(c, w_uv) : (u, v) ∈ E, c ∈ D^{l-1}_u } )
//! ```
//!
//! After `η` rounds, `D^η_v` is exactly the set of Pareto-optimal costs of
//! walks from the source to `v` with at most `η` edges. Aggregations are
//! monotone and costs non-negative, so a dominated prefix never extends to a
//! non-dominated walk.
//!
//! Only entries created in round `l - 1` are extended in round `l`: an older
//! entry already contributed its extensions in the round after it appeared,
//! and those extensions (or something dominating them) are carried in
//! `D^{l-1}_v`. This leaves the cost sets unchanged and makes convergence
//! detectable: a round that creates no entry is a fixpoint.
//!
//! Each entry keeps predecessor links `(vertex, round, entry)` into the
//! stored per-round tables, which is all backtracking needs.
//!
//! With `τ` the largest table and `γ` the largest degree, one round costs
//! `O(|E| τ)` combines plus a sort-based prune per vertex.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{combine_with, CostSpec, CostVector};
use crate::frontier::{cap_table, collapse_only, prune, ParetoTable, Predecessor, TableEntry};
use crate::graph::ActionabilityGraph;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchOptions {
    /// Downsample tables above this size. Forfeits exactness.
    pub table_cap: Option<usize>,
    /// Skip dominance filtering (duplicates still collapse). Only useful to
    /// check that the oracle harness catches a broken solver.
    #[doc(hidden)]
    pub disable_pruning: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    source: usize,
    max_hops: usize,
    /// `rounds[l][v]` is `D^l_v`. Rounds past convergence are not stored.
    rounds: Vec<Vec<Arc<ParetoTable>>>,
    approximate: bool,
}

impl SearchResult {
    pub fn source(&self) -> usize {
        self.source
    }

    pub fn max_hops(&self) -> usize {
        self.max_hops
    }

    /// `true` when a table cap was active and tables may be incomplete.
    pub fn approximate(&self) -> bool {
        self.approximate
    }

    /// Index of the last stored round; every later round is identical.
    pub fn last_round(&self) -> usize {
        self.rounds.len() - 1
    }

    /// `D^η_v`.
    pub fn table(&self, v: usize) -> &ParetoTable {
        &self.rounds[self.last_round()][v]
    }

    /// `D^l_v` for any `l >= 0`.
    pub fn table_at(&self, round: usize, v: usize) -> &ParetoTable {
        &self.rounds[round.min(self.last_round())][v]
    }

    pub fn vertex_count(&self) -> usize {
        self.rounds[0].len()
    }

    fn entry(&self, p: Predecessor) -> &TableEntry {
        &self.table_at(p.round, p.vertex).entries()[p.entry]
    }

    /// Final tables keyed by vertex id, with links.
    pub fn to_json(&self, g: &ActionabilityGraph) -> Result<String> {
        #[derive(Serialize)]
        struct TableDoc<'a> {
            vertex: &'a str,
            entries: &'a [TableEntry],
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            source: &'a str,
            max_hops: usize,
            last_round: usize,
            approximate: bool,
            tables: Vec<TableDoc<'a>>,
        }
        let doc = Doc {
            source: &g.vertices()[self.source].id,
            max_hops: self.max_hops,
            last_round: self.last_round(),
            approximate: self.approximate,
            tables: (0..self.vertex_count())
                .map(|v| TableDoc {
                    vertex: &g.vertices()[v].id,
                    entries: self.table(v).entries(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// Computes `D^η_v` for every vertex.
pub fn pareto_shortest_paths(
    g: &ActionabilityGraph,
    source: usize,
    max_hops: usize,
    spec: &CostSpec,
    options: &SearchOptions,
) -> Result<SearchResult> {
    let n = g.len();
    if source >= n {
        return Err(Error::UnknownVertex(format!("#{source}")));
    }
    if max_hops == 0 || max_hops > n.saturating_sub(1).max(1) {
        return Err(Error::OutOfRange(format!("max hops must be in [1, {}], got {max_hops}", n.saturating_sub(1).max(1))));
    }
    if spec.k() != g.k() {
        return Err(Error::LengthMismatch {
            expected: g.k(),
            actual: spec.k(),
        });
    }
    if let Some(cap) = options.table_cap {
        if cap < 2 {
            return Err(Error::OutOfRange(format!("table cap must be >= 2, got {cap}")));
        }
    }
    let aggs = spec.aggregations();
    let k = spec.k();
    let incoming = g.in_edges();

    let empty = Arc::new(ParetoTable::empty());
    let mut round0: Vec<Arc<ParetoTable>> = vec![empty; n];
    round0[source] = Arc::new(prune(vec![TableEntry::point(CostVector::zeros(k))]));
    let mut rounds = vec![round0];

    for round in 1..=max_hops {
        let prev = &rounds[round - 1];
        let next: Vec<(Arc<ParetoTable>, bool)> = (0..n)
            .into_par_iter()
            .map(|v| -> Result<(Arc<ParetoTable>, bool)> {
                let mut fresh = Vec::new();
                for &(u, w) in &incoming[v] {
                    for (idx, e) in prev[u].entries().iter().enumerate() {
                        if e.first_reached_hop + 1 != round {
                            continue;
                        }
                        let pred = Predecessor {
                            vertex: u,
                            round: round - 1,
                            entry: idx,
                        };
                        fresh.push(TableEntry::new(combine_with(&e.cost, w, &aggs), vec![pred], round));
                    }
                }
                if fresh.is_empty() {
                    return Ok((Arc::clone(&prev[v]), false));
                }
                let mut cands: Vec<TableEntry> = prev[v].entries().to_vec();
                cands.extend(fresh);
                let mut table = if options.disable_pruning {
                    collapse_only(cands)
                } else {
                    prune(cands)
                };
                if let Some(cap) = options.table_cap {
                    table = cap_table(table, cap)?;
                }
                if v == source {
                    table = strip_origin_links(table);
                }
                let created = table.entries().iter().any(|e| e.first_reached_hop == round);
                Ok((Arc::new(table), created))
            })
            .collect::<Result<_>>()?;
        let created = next.iter().any(|(_, c)| *c);
        rounds.push(next.into_iter().map(|(t, _)| t).collect());
        if !created {
            break;
        }
    }

    Ok(SearchResult {
        source,
        max_hops,
        rounds,
        approximate: options.table_cap.is_some(),
    })
}

/// The source's zero entry is the root of every path and takes no links.
fn strip_origin_links(table: ParetoTable) -> ParetoTable {
    let entries = table
        .into_entries()
        .into_iter()
        .map(|mut e| {
            if e.cost.is_zero() {
                e.predecessors.clear();
                e.first_reached_hop = 0;
            }
            e
        })
        .collect();
    collapse_only(entries)
}

/// One relaxation of `D_v` by every entry of `D_u` across the edge `u -> v`.
///
/// `parent` and `parent_round` locate `D_u` for the new predecessor links;
/// new entries are stamped with `hop`.
pub fn update(
    dv: &ParetoTable,
    du: &ParetoTable,
    parent: usize,
    parent_round: usize,
    w_uv: &CostVector,
    spec: &CostSpec,
    hop: usize,
) -> Result<ParetoTable> {
    if w_uv.len() != spec.k() {
        return Err(Error::LengthMismatch {
            expected: spec.k(),
            actual: w_uv.len(),
        });
    }
    let aggs = spec.aggregations();
    let mut cands = dv.entries().to_vec();
    for (idx, e) in du.entries().iter().enumerate() {
        cands.push(TableEntry::new(
            combine_with(&e.cost, w_uv, &aggs),
            vec![Predecessor {
                vertex: parent,
                round: parent_round,
                entry: idx,
            }],
            hop,
        ));
    }
    Ok(prune(cands))
}

/// Final tables of every positive vertex with a non-empty table, by vertex
/// index. Fronts are reported per target and never merged.
pub fn recourse_frontier(result: &SearchResult, g: &ActionabilityGraph) -> Vec<(usize, ParetoTable)> {
    (0..result.vertex_count())
        .filter(|&v| g.vertices()[v].positive && !result.table(v).is_empty())
        .map(|v| (v, result.table(v).clone()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoursePath {
    /// Vertex indices from source to target.
    pub vertices: Vec<usize>,
    pub cost: CostVector,
    pub hops: usize,
    /// Index of the target-table entry this path witnesses.
    pub entry: usize,
}

impl RecoursePath {
    /// Aggregated cost along the vertex sequence, from scratch.
    pub fn recompute_cost(&self, g: &ActionabilityGraph, spec: &CostSpec) -> Result<CostVector> {
        let aggs = spec.aggregations();
        let mut cost = CostVector::zeros(spec.k());
        for pair in self.vertices.windows(2) {
            let w = g.edge_cost(pair[0], pair[1]).ok_or_else(|| {
                Error::InvalidGraph(format!(
                    "path uses missing edge `{}`->`{}`",
                    g.vertices()[pair[0]].id,
                    g.vertices()[pair[1]].id
                ))
            })?;
            cost = combine_with(&cost, w, &aggs);
        }
        Ok(cost)
    }
}

struct Walker<'a> {
    result: &'a SearchResult,
    limit: usize,
    out: Vec<Vec<usize>>,
    suffix: Vec<usize>,
}

impl Walker<'_> {
    fn walk(&mut self, vertex: usize, e: &TableEntry) {
        if self.out.len() >= self.limit {
            return;
        }
        self.suffix.push(vertex);
        if vertex == self.result.source && e.predecessors.is_empty() {
            let mut path = self.suffix.clone();
            path.reverse();
            self.out.push(path);
        } else {
            for &p in &e.predecessors {
                let parent = self.result.entry(p);
                self.walk(p.vertex, parent);
                if self.out.len() >= self.limit {
                    break;
                }
            }
        }
        self.suffix.pop();
    }
}

fn witnesses(result: &SearchResult, target: usize, entry: usize, limit: usize) -> Vec<Vec<usize>> {
    let e = &result.table(target).entries()[entry];
    let mut w = Walker {
        result,
        limit,
        out: Vec::new(),
        suffix: Vec::new(),
    };
    w.walk(target, e);
    w.out
}

/// Materializes paths for the target's table by following predecessor links
/// depth-first.
///
/// Every entry first gets one witness path, then remaining budget goes to
/// further witnesses entry by entry. At most `max_paths` paths come back in
/// total, grouped by entry in table order.
pub fn backtrack(result: &SearchResult, target: usize, max_paths: usize) -> Result<Vec<RecoursePath>> {
    if target >= result.vertex_count() {
        return Err(Error::UnknownVertex(format!("#{target}")));
    }
    if max_paths == 0 {
        return Err(Error::OutOfRange("max_paths must be >= 1".into()));
    }
    let table = result.table(target);
    if table.is_empty() {
        return Err(Error::Unreachable(format!("#{target}")));
    }
    let mut per_entry: Vec<Vec<Vec<usize>>> = (0..table.len())
        .map(|i| if i < max_paths { witnesses(result, target, i, 1) } else { Vec::new() })
        .collect();
    let mut total: usize = per_entry.iter().map(Vec::len).sum();
    for (i, paths) in per_entry.iter_mut().enumerate() {
        if total >= max_paths {
            break;
        }
        let more = witnesses(result, target, i, max_paths - total + paths.len());
        for p in more {
            if total >= max_paths {
                break;
            }
            if !paths.contains(&p) {
                paths.push(p);
                total += 1;
            }
        }
    }
    Ok(per_entry
        .into_iter()
        .enumerate()
        .flat_map(|(i, paths)| {
            let cost = table.entries()[i].cost.clone();
            paths.into_iter().map(move |vertices| RecoursePath {
                hops: vertices.len() - 1,
                vertices,
                cost: cost.clone(),
                entry: i,
            })
        })
        .collect())
}
