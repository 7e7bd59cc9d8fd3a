//! The actionability graph: dataset instances as vertices, feasible single
//! actions as directed edges carrying a cost vector.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{CostSpec, CostVector, CriterionKind, Direction, FeatureSpace};
use crate::data::{kde_nll_scores, Dataset, Instance, Mutability};
use crate::error::{io_err, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub cost: CostVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    /// Largest in- or out-degree of any vertex.
    pub max_degree: usize,
    pub k: usize,
}

/// Directed graph with `k`-dimensional edge costs. No self-loops and at most
/// one edge per ordered vertex pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionabilityGraph {
    vertices: Vec<Vertex>,
    /// Out-edges per vertex, sorted by target.
    out: Vec<Vec<Edge>>,
    spec: CostSpec,
}

impl ActionabilityGraph {
    pub fn new(vertices: Vec<Vertex>, spec: CostSpec) -> Result<Self> {
        let mut ids = std::collections::HashSet::new();
        for v in &vertices {
            if !ids.insert(v.id.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate vertex id `{}`", v.id)));
            }
        }
        let out = vec![Vec::new(); vertices.len()];
        Ok(ActionabilityGraph { vertices, out, spec })
    }

    /// Vertices named `0..n`, all negative.
    pub fn with_vertex_count(n: usize, spec: CostSpec) -> Self {
        let vertices = (0..n)
            .map(|i| Vertex {
                id: i.to_string(),
                positive: false,
            })
            .collect();
        ActionabilityGraph {
            vertices,
            out: vec![Vec::new(); n],
            spec,
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cost: CostVector) -> Result<()> {
        let n = self.vertices.len();
        if from >= n || to >= n {
            return Err(Error::InvalidGraph(format!("edge {from}->{to} out of range for {n} vertices")));
        }
        if from == to {
            return Err(Error::InvalidGraph(format!("self-loop at vertex `{}`", self.vertices[from].id)));
        }
        if cost.len() != self.spec.k() {
            return Err(Error::LengthMismatch {
                expected: self.spec.k(),
                actual: cost.len(),
            });
        }
        let list = &mut self.out[from];
        match list.binary_search_by_key(&to, |e| e.to) {
            Ok(_) => Err(Error::InvalidGraph(format!(
                "parallel edge `{}`->`{}`",
                self.vertices[from].id, self.vertices[to].id
            ))),
            Err(pos) => {
                list.insert(pos, Edge { to, cost });
                Ok(())
            }
        }
    }

    pub fn set_positive(&mut self, v: usize, positive: bool) {
        self.vertices[v].positive = positive;
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn k(&self) -> usize {
        self.spec.k()
    }

    pub fn cost_spec(&self) -> &CostSpec {
        &self.spec
    }

    pub fn out_edges(&self, v: usize) -> &[Edge] {
        &self.out[v]
    }

    pub fn edge_cost(&self, from: usize, to: usize) -> Option<&CostVector> {
        let list = self.out.get(from)?;
        list.binary_search_by_key(&to, |e| e.to).ok().map(|i| &list[i].cost)
    }

    /// `(from, cost)` pairs per target vertex, sorted by source.
    pub fn in_edges(&self) -> Vec<Vec<(usize, &CostVector)>> {
        let mut inc: Vec<Vec<(usize, &CostVector)>> = vec![Vec::new(); self.len()];
        for (u, list) in self.out.iter().enumerate() {
            for e in list {
                inc[e.to].push((u, &e.cost));
            }
        }
        inc
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |e| (u, e)))
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn resolve(&self, id: &str) -> Result<usize> {
        self.vertex_index(id).ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn stats(&self) -> GraphStats {
        graph_stats(self)
    }

    /// `true` iff a topological order exists.
    pub fn is_dag(&self) -> bool {
        let mut indeg = vec![0usize; self.len()];
        for (_, e) in self.edges() {
            indeg[e.to] += 1;
        }
        let mut stack: Vec<usize> = (0..self.len()).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(u) = stack.pop() {
            seen += 1;
            for e in &self.out[u] {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    stack.push(e.to);
                }
            }
        }
        seen == self.len()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = GraphDoc {
            cost_spec: self.spec.clone(),
            vertices: self.vertices.clone(),
            edges: self
                .edges()
                .map(|(u, e)| EdgeDoc {
                    from: self.vertices[u].id.clone(),
                    to: self.vertices[e.to].id.clone(),
                    cost: e.cost.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        doc.cost_spec.validate()?;
        let mut g = ActionabilityGraph::new(doc.vertices, doc.cost_spec)?;
        let index: BTreeMap<&str, usize> = g.vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        let mut resolved = Vec::with_capacity(doc.edges.len());
        for e in doc.edges {
            let from = *index.get(e.from.as_str()).ok_or_else(|| Error::UnknownVertex(e.from.clone()))?;
            let to = *index.get(e.to.as_str()).ok_or_else(|| Error::UnknownVertex(e.to.clone()))?;
            resolved.push((from, to, e.cost));
        }
        for (from, to, cost) in resolved {
            g.add_edge(from, to, cost)?;
        }
        Ok(g)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        ActionabilityGraph::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    from: String,
    to: String,
    cost: CostVector,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    cost_spec: CostSpec,
    vertices: Vec<Vertex>,
    edges: Vec<EdgeDoc>,
}

pub fn graph_stats(g: &ActionabilityGraph) -> GraphStats {
    let mut indeg = vec![0usize; g.len()];
    for (_, e) in g.edges() {
        indeg[e.to] += 1;
    }
    let max_out = g.out.iter().map(Vec::len).max().unwrap_or(0);
    let max_in = indeg.into_iter().max().unwrap_or(0);
    GraphStats {
        vertices: g.len(),
        edges: g.edge_count(),
        max_degree: max_out.max(max_in),
        k: g.k(),
    }
}

/// Required ordering of a label column along every edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelOrder {
    StrictlyIncreasing,
    NonDecreasing,
    StrictlyDecreasing,
    NonIncreasing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelOrderRule {
    pub column: String,
    pub order: LabelOrder,
}

/// Feasibility of a single action `u -> v`, a pure function of the two
/// endpoints. Column constraints apply to raw values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActionPredicate {
    columns: Vec<(usize, Mutability)>,
    label_order: Option<(usize, LabelOrder)>,
}

impl ActionPredicate {
    /// Accepts every pair.
    pub fn trivial() -> Self {
        ActionPredicate::default()
    }

    /// Constraints from schema mutability, `FeatureDelta` directions and an
    /// optional label-order rule.
    pub fn from_dataset(data: &Dataset, spec: &CostSpec, label_order: Option<&LabelOrderRule>) -> Result<Self> {
        let mut columns: Vec<(usize, Mutability)> = (0..data.dim())
            .map(|i| (i, data.mutability(i)))
            .filter(|(_, m)| *m != Mutability::Free)
            .collect();
        for c in spec.criteria() {
            if let CriterionKind::FeatureDelta { column, direction } = &c.kind {
                let i = data
                    .feature_index(column)
                    .ok_or_else(|| Error::InvalidCostSpec(format!("unknown feature `{column}`")))?;
                let m = match direction {
                    Direction::Any => continue,
                    Direction::Up => Mutability::MonotoneUp,
                    Direction::Down => Mutability::MonotoneDown,
                };
                columns.push((i, m));
            }
        }
        columns.sort_by_key(|(i, m)| (*i, *m as u8));
        columns.dedup();
        let label_order = label_order
            .map(|rule| {
                data.label_index(&rule.column)
                    .map(|i| (i, rule.order))
                    .ok_or_else(|| Error::SchemaMismatch(format!("unknown label column `{}`", rule.column)))
            })
            .transpose()?;
        Ok(ActionPredicate { columns, label_order })
    }

    pub fn allows(&self, u: &Instance, v: &Instance) -> bool {
        let columns_ok = self.columns.iter().all(|&(i, m)| {
            let (a, b) = (u.raw[i], v.raw[i]);
            match m {
                Mutability::Free => true,
                Mutability::Immutable => a == b,
                Mutability::MonotoneUp => b >= a,
                Mutability::MonotoneDown => b <= a,
            }
        });
        if !columns_ok {
            return false;
        }
        match self.label_order {
            None => true,
            Some((i, order)) => match (u.labels[i].parse::<f64>(), v.labels[i].parse::<f64>()) {
                (Ok(a), Ok(b)) => match order {
                    LabelOrder::StrictlyIncreasing => b > a,
                    LabelOrder::NonDecreasing => b >= a,
                    LabelOrder::StrictlyDecreasing => b < a,
                    LabelOrder::NonIncreasing => b <= a,
                },
                _ => false,
            },
        }
    }
}

/// Dataset-level scores some criteria read, keyed by criterion name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuxScores {
    pub kde: BTreeMap<String, Vec<f64>>,
}

impl AuxScores {
    /// Computes the normalized KDE NLL scores each `KdeNll` criterion needs.
    pub fn compute(data: &Dataset, spec: &CostSpec) -> Result<Self> {
        let mut kde = BTreeMap::new();
        for c in spec.criteria() {
            if let CriterionKind::KdeNll { bandwidth } = c.kind {
                kde.insert(c.name.clone(), kde_nll_scores(data, bandwidth)?);
            }
        }
        Ok(AuxScores { kde })
    }
}

enum Resolved<'a> {
    Norm {
        p: crate::cost::NormOrder,
        idx: Vec<usize>,
        raw: bool,
    },
    Label(usize),
    Delta(usize),
    Kde(&'a [f64]),
}

/// Edge-cost evaluation with column lookups resolved once.
pub struct CostEvaluator<'a> {
    data: &'a Dataset,
    spec: CostSpec,
    resolved: Vec<Resolved<'a>>,
}

impl<'a> CostEvaluator<'a> {
    pub fn new(data: &'a Dataset, spec: &CostSpec, aux: &'a AuxScores) -> Result<Self> {
        spec.validate_against(data.schema())?;
        let feature = |name: &str| {
            data.feature_index(name)
                .ok_or_else(|| Error::SchemaMismatch(format!("feature `{name}` not in dataset")))
        };
        let resolved = spec
            .criteria()
            .iter()
            .map(|c| {
                Ok(match &c.kind {
                    CriterionKind::LNorm { p, features, space } => Resolved::Norm {
                        p: *p,
                        idx: match features {
                            Some(cols) => cols.iter().map(|s| feature(s)).collect::<Result<_>>()?,
                            None => (0..data.dim()).collect(),
                        },
                        raw: *space == FeatureSpace::Raw,
                    },
                    CriterionKind::LabelAbsDiff { column } => Resolved::Label(data.label_index(column).ok_or_else(
                        || Error::SchemaMismatch(format!("label `{column}` not in dataset")),
                    )?),
                    CriterionKind::FeatureDelta { column, .. } => Resolved::Delta(feature(column)?),
                    CriterionKind::KdeNll { .. } => {
                        let scores = aux.kde.get(&c.name).ok_or_else(|| Error::MissingScores(c.name.clone()))?;
                        if scores.len() != data.len() {
                            return Err(Error::MissingScores(c.name.clone()));
                        }
                        Resolved::Kde(scores)
                    }
                    CriterionKind::External => {
                        return Err(Error::InvalidCostSpec(format!("criterion `{}` is external", c.name)))
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CostEvaluator {
            data,
            spec: spec.clone(),
            resolved,
        })
    }

    pub fn spec(&self) -> &CostSpec {
        &self.spec
    }

    /// Cost of the action from row `u` to row `v`.
    pub fn evaluate(&self, u: usize, v: usize) -> Result<CostVector> {
        if u == v {
            return Err(Error::OutOfRange("an action needs two distinct rows".into()));
        }
        let rows = self.data.rows();
        let (a, b) = (&rows[u], &rows[v]);
        let values = self
            .resolved
            .iter()
            .map(|r| {
                Ok(match r {
                    Resolved::Norm { p, idx, raw } => {
                        let (x, y) = if *raw { (&a.raw, &b.raw) } else { (&a.features, &b.features) };
                        p.distance(idx.iter().map(|&i| x[i] - y[i]))
                    }
                    Resolved::Label(i) => {
                        let parse = |s: &str| {
                            s.parse::<f64>().map_err(|_| Error::Parse {
                                row: 0,
                                column: self.data.label_names()[*i].clone(),
                                message: format!("label `{s}` is not numeric"),
                            })
                        };
                        (parse(&b.labels[*i])? - parse(&a.labels[*i])?).abs()
                    }
                    Resolved::Delta(i) => (b.raw[*i] - a.raw[*i]).abs(),
                    Resolved::Kde(scores) => scores[v],
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        CostVector::new(values)
    }
}

/// Cost vector of the action `u -> v` between two dataset rows.
pub fn evaluate_costs(data: &Dataset, u: usize, v: usize, spec: &CostSpec, aux: &AuxScores) -> Result<CostVector> {
    CostEvaluator::new(data, spec, aux)?.evaluate(u, v)
}

/// The `k_neighbors` nearest rows to `u` under working-space L2, ties broken
/// by lower row index.
fn nearest(data: &Dataset, u: usize, k_neighbors: usize) -> Vec<usize> {
    let rows = data.rows();
    let xu = &rows[u].features;
    let mut cand: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != u)
        .map(|(v, r)| {
            let d2: f64 = xu.iter().zip(&r.features).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, v)
        })
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k_neighbors < cand.len() {
        cand.select_nth_unstable_by(k_neighbors, cmp);
        cand.truncate(k_neighbors);
    }
    cand.sort_by(cmp);
    cand.into_iter().map(|(_, v)| v).collect()
}

/// One-sided KNN candidate edges from every vertex, filtered by `predicate`
/// and weighted by `costs`. `positives[v]` is the classifier output for row
/// `v`; vertex ids are the dataset ids.
pub fn build_knn_graph(
    data: &Dataset,
    k_neighbors: usize,
    predicate: &ActionPredicate,
    costs: &CostEvaluator<'_>,
    positives: &[bool],
) -> Result<ActionabilityGraph> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if k_neighbors == 0 || k_neighbors >= n {
        return Err(Error::OutOfRange(format!("k_neighbors must be in [1, {}), got {k_neighbors}", n)));
    }
    if positives.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: positives.len(),
        });
    }
    let rows = data.rows();
    let adjacency: Vec<Vec<(usize, CostVector)>> = (0..n)
        .into_par_iter()
        .map(|u| {
            nearest(data, u, k_neighbors)
                .into_iter()
                .filter(|&v| predicate.allows(&rows[u], &rows[v]))
                .map(|v| Ok((v, costs.evaluate(u, v)?)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let vertices = rows
        .iter()
        .zip(positives)
        .map(|(r, &positive)| Vertex {
            id: r.id.clone(),
            positive,
        })
        .collect();
    let mut g = ActionabilityGraph::new(vertices, costs.spec().clone())?;
    for (u, list) in adjacency.into_iter().enumerate() {
        for (v, cost) in list {
            g.add_edge(u, v, cost)?;
        }
    }
    Ok(g)
}
