//! Seeded generators for random test graphs and desk-scale datasets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cost::{Aggregation, CostSpec, CostVector};
use crate::error::Result;
use crate::graph::ActionabilityGraph;

/// SplitMix64 finalizer; derives independent per-trial seeds from one root.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RandomGraphParams {
    pub max_vertices: usize,
    pub max_out_degree: usize,
    pub k_choices: Vec<usize>,
    pub min_hops: usize,
    pub max_hops: usize,
    pub max_cost: u32,
}

impl Default for RandomGraphParams {
    fn default() -> Self {
        RandomGraphParams {
            max_vertices: 10,
            max_out_degree: 4,
            k_choices: vec![2, 3],
            min_hops: 2,
            max_hops: 5,
            max_cost: 9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub graph: ActionabilityGraph,
    pub source: usize,
    pub max_hops: usize,
}

/// Random graph with integer costs, mixed Sum/Max criteria and random
/// positive flags. The vertex count always leaves room for `max_hops`.
pub fn random_instance(params: &RandomGraphParams, seed: u64) -> Result<RandomInstance> {
    let mut rng = rng(seed);
    let max_hops = rng.gen_range(params.min_hops..=params.max_hops);
    let n = rng.gen_range((max_hops + 1).min(params.max_vertices)..=params.max_vertices);
    let k = *params.k_choices.choose(&mut rng).expect("k choices");
    let aggs: Vec<Aggregation> = (0..k)
        .map(|_| if rng.gen_bool(0.5) { Aggregation::Sum } else { Aggregation::Max })
        .collect();
    let mut g = ActionabilityGraph::with_vertex_count(n, CostSpec::external(&aggs)?);
    for u in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&v| v != u).collect();
        others.shuffle(&mut rng);
        let deg = rng.gen_range(0..=params.max_out_degree.min(n - 1));
        for &v in &others[..deg] {
            let cost: Vec<f64> = (0..k).map(|_| f64::from(rng.gen_range(0..=params.max_cost))).collect();
            g.add_edge(u, v, CostVector::new(cost)?)?;
        }
        g.set_positive(u, rng.gen_bool(0.4));
    }
    Ok(RandomInstance { graph: g, source: 0, max_hops })
}

/// Points in the unit square with directed edges whose single Sum cost is
/// sandwiched as `Δ(u, v) <= c(u, v) <= κ Δ(u, v)`.
///
/// Edges join pairs within `reach` of each other (a geometric graph); each
/// direction is kept independently with probability `keep`.
pub fn lipschitz_graph(n: usize, kappa: f64, reach: f64, keep: f64, seed: u64) -> Result<(ActionabilityGraph, Vec<[f64; 2]>)> {
    let mut rng = rng(seed);
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let mut g = ActionabilityGraph::with_vertex_count(n, CostSpec::external(&[Aggregation::Sum])?);
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let d = ((pts[u][0] - pts[v][0]).powi(2) + (pts[u][1] - pts[v][1]).powi(2)).sqrt();
            if d > reach || !rng.gen_bool(keep) {
                continue;
            }
            let lambda = rng.gen_range(1.0..=kappa);
            g.add_edge(u, v, CostVector::new(vec![d * lambda])?)?;
        }
    }
    Ok((g, pts))
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// CSV text of `n` flattened `side x side` "digit" images, labels `0..=9`.
///
/// Each digit is a blob drifting along a fixed arc as the label grows, so
/// nearby labels look alike and distant labels differ more; pixel noise
/// keeps same-label images apart.
pub fn digit_vectors_csv(n: usize, side: usize, noise: f64, seed: u64) -> String {
    let mut rng = rng(seed);
    let mut out = String::from("id");
    for p in 0..side * side {
        out.push_str(&format!(",px{p}"));
    }
    out.push_str(",digit\n");
    for i in 0..n {
        let digit = i % 10;
        let t = digit as f64 / 9.0;
        let angle = std::f64::consts::PI * (0.15 + 0.7 * t);
        let c = (side as f64 - 1.0) / 2.0;
        let cx = c + 0.35 * side as f64 * angle.cos() + 0.6 * gaussian(&mut rng);
        let cy = c + 0.35 * side as f64 * angle.sin() - 0.15 * side as f64 + 0.6 * gaussian(&mut rng);
        let width = 1.2 + 0.25 * gaussian(&mut rng).abs();
        out.push_str(&format!("d{i:04}"));
        for p in 0..side * side {
            let (x, y) = ((p % side) as f64, (p / side) as f64);
            let blob = (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * width * width)).exp();
            let v = (blob + noise * gaussian(&mut rng)).clamp(0.0, 1.0);
            out.push_str(&format!(",{:.4}", v));
        }
        out.push_str(&format!(",{digit}\n"));
    }
    out
}

/// CSV text of two Gaussian clusters in the plane with an integer `band`
/// column (the x coordinate's unit cell) and a `cluster` label.
pub fn two_clusters_csv(n: usize, separation: f64, spread: f64, seed: u64) -> String {
    let mut rng = rng(seed);
    let mut out = String::from("id,x,y,band,cluster\n");
    for i in 0..n {
        let b = i % 2 == 1;
        let cx = if b { separation } else { 0.0 };
        let x = cx + spread * gaussian(&mut rng);
        let y = spread * gaussian(&mut rng);
        let band = x.floor() as i64;
        out.push_str(&format!(
            "p{i:05},{x:.6},{y:.6},{band},{}\n",
            if b { "B" } else { "A" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_respect_params() {
        let p = RandomGraphParams::default();
        for seed in 0..50 {
            let inst = random_instance(&p, seed).unwrap();
            let s = inst.graph.stats();
            assert!(s.vertices <= 10 && s.vertices > inst.max_hops);
            assert!((2..=5).contains(&inst.max_hops));
            assert!(inst.graph.vertices().iter().enumerate().all(|(v, _)| inst.graph.out_edges(v).len() <= 4));
            assert!(s.k == 2 || s.k == 3);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(digit_vectors_csv(20, 4, 0.1, 3), digit_vectors_csv(20, 4, 0.1, 3));
        assert_eq!(two_clusters_csv(20, 3.0, 1.0, 3), two_clusters_csv(20, 3.0, 1.0, 3));
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }

    #[test]
    fn lipschitz_costs_are_sandwiched() {
        let (g, pts) = lipschitz_graph(10, 2.0, 0.6, 0.7, 5).unwrap();
        for (u, e) in g.edges() {
            let d = ((pts[u][0] - pts[e.to][0]).powi(2) + (pts[u][1] - pts[e.to][1]).powi(2)).sqrt();
            let c = e.cost.as_slice()[0];
            assert!(d <= c && c <= 2.0 * d + 1e-12);
        }
    }
}
