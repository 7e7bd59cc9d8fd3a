//! Generators for the files under `fixtures/`. The shipped files must equal
//! this output byte for byte.

use anyhow::Result;

use pareto_recourse::cost::{Aggregation, CostSpec, CostVector};
use pareto_recourse::graph::ActionabilityGraph;
use pareto_recourse::synthetic::{digit_vectors_csv, two_clusters_csv};

pub const DIGIT_ROWS: usize = 256;
pub const DIGIT_SIDE: usize = 8;
pub const DIGIT_NOISE: f64 = 0.08;
pub const DIGIT_SEED: u64 = 2;

pub const CLUSTER_ROWS: usize = 2048;
pub const CLUSTER_SEPARATION: f64 = 6.0;
pub const CLUSTER_SPREAD: f64 = 1.0;
pub const CLUSTER_SEED: u64 = 11;

fn graph(ids: &[&str], k: usize, edges: &[(usize, usize, &[f64])], positive: &[usize]) -> Result<String> {
    let spec = CostSpec::external(&vec![Aggregation::Sum; k])?;
    let vertices = ids
        .iter()
        .enumerate()
        .map(|(i, id)| pareto_recourse::graph::Vertex {
            id: id.to_string(),
            positive: positive.contains(&i),
        })
        .collect();
    let mut g = ActionabilityGraph::new(vertices, spec)?;
    for &(u, v, c) in edges {
        g.add_edge(u, v, CostVector::new(c.to_vec())?)?;
    }
    Ok(g.to_json()? + "\n")
}

/// `s -> a -> t` at (1,4)+(1,4) and `s -> b -> t` at (3,1)+(3,1).
pub fn diamond_graph() -> Result<String> {
    graph(
        &["s", "a", "b", "t"],
        2,
        &[(0, 1, &[1.0, 4.0]), (0, 2, &[3.0, 1.0]), (1, 3, &[1.0, 4.0]), (2, 3, &[3.0, 1.0])],
        &[3],
    )
}

/// `p` with edges to `i`, `j`, `r` costing 4, 2 and 1.
pub fn toy_shrink_graph() -> Result<String> {
    graph(
        &["p", "i", "j", "r"],
        1,
        &[(0, 1, &[4.0]), (0, 2, &[2.0]), (0, 3, &[1.0])],
        &[],
    )
}

pub fn digits_csv() -> String {
    digit_vectors_csv(DIGIT_ROWS, DIGIT_SIDE, DIGIT_NOISE, DIGIT_SEED)
}

pub fn digits_schema() -> String {
    let mut s = String::from("[columns.id]\nrole = \"id\"\n");
    for p in 0..DIGIT_SIDE * DIGIT_SIDE {
        s.push_str(&format!("\n[columns.px{p}]\nrole = \"feature\"\nstandardize = true\n"));
    }
    s.push_str("\n[columns.digit]\nrole = \"label\"\n");
    s
}

pub const DIGITS_COSTS: &str = r#"# cost_1: largest digit change in one step; cost_2: summed pixel distance.
[[criterion]]
name = "label_step"
kind = "label_abs_diff"
column = "digit"
aggregation = "max"

[[criterion]]
name = "l2"
kind = "lnorm"
p = 2
aggregation = "sum"

[classifier]
kind = "label_column"
column = "digit"
positive = 8

[actionability]
label_order = { column = "digit", order = "non_decreasing" }
"#;

pub fn clusters_csv() -> String {
    two_clusters_csv(CLUSTER_ROWS, CLUSTER_SEPARATION, CLUSTER_SPREAD, CLUSTER_SEED)
}

pub const CLUSTERS_SCHEMA: &str = r#"[columns.id]
role = "id"

[columns.x]
role = "feature"
standardize = true

[columns.y]
role = "feature"
standardize = true

[columns.band]
role = "label"

[columns.cluster]
role = "label"
"#;

pub const CLUSTERS_COSTS: &str = r#"# cost_1: largest jump across unit bands of x; cost_2: summed distance.
[[criterion]]
name = "band_step"
kind = "label_abs_diff"
column = "band"
aggregation = "max"

[[criterion]]
name = "l2"
kind = "lnorm"
p = 2
aggregation = "sum"

[classifier]
kind = "label_column"
column = "cluster"
positive = "B"
"#;

/// `(file name, contents)` for every shipped fixture.
pub fn all() -> Result<Vec<(&'static str, String)>> {
    Ok(vec![
        ("diamond.graph.json", diamond_graph()?),
        ("toy_shrink.graph.json", toy_shrink_graph()?),
        ("digits.csv", digits_csv()),
        ("digits.schema.toml", digits_schema()),
        ("digits.costs.toml", DIGITS_COSTS.to_string()),
        ("clusters.csv", clusters_csv()),
        ("clusters.schema.toml", CLUSTERS_SCHEMA.to_string()),
        ("clusters.costs.toml", CLUSTERS_COSTS.to_string()),
    ])
}
