use anyhow::{ensure, Result};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use pareto_recourse::data::{load_csv, FeatureSchema};
use pareto_recourse::epsnet::{
    ball_vc_dim, certified_sample, replay_shrink, shrink_graph, verify_ball_net, BallNetVerdict, ShrinkConfig,
    ShrinkScope,
};
use pareto_recourse::synthetic::rng;

use crate::{write_json, Outcome, RunConfig};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub vertex: String,
    pub representative: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkFileReport {
    pub command: String,
    pub kappa: f64,
    /// Criterion index, or `None` for all criteria at once.
    pub criterion: Option<usize>,
    pub vertices: usize,
    pub order: Vec<String>,
    pub survivors: Vec<String>,
    pub merges: Vec<Merge>,
    pub reduction_ratio: f64,
    pub replay_valid: bool,
}

pub fn cmd_shrink(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let g = cfg.load_graph()?;
    let scope = match cfg.criterion {
        Some(c) => ShrinkScope::Criterion(c),
        None => ShrinkScope::All,
    };
    let shrink = ShrinkConfig::new(cfg.kappa, scope)?;
    let mut order: Vec<usize> = if cfg.order.is_empty() {
        (0..g.len()).collect()
    } else {
        cfg.order.iter().map(|id| g.resolve(id)).collect::<Result<_, _>>()?
    };
    if cfg.shuffle_order {
        order.shuffle(&mut rng(cfg.seed));
    }
    let report = shrink_graph(&g, &shrink, &order)?;
    let replay_valid = replay_shrink(&g, &shrink, &report)?;
    let id = |v: usize| g.vertices()[v].id.clone();
    let doc = ShrinkFileReport {
        command: "shrink".into(),
        kappa: cfg.kappa,
        criterion: cfg.criterion,
        vertices: g.len(),
        order: report.order.iter().map(|&v| id(v)).collect(),
        survivors: report.survivors.iter().map(|&v| id(v)).collect(),
        merges: report
            .merges
            .iter()
            .map(|&(v, r)| Merge {
                vertex: id(v),
                representative: id(r),
            })
            .collect(),
        reduction_ratio: report.reduction_ratio(g.len()),
        replay_valid,
    };
    let out = cfg.out_or("shrink.json");
    write_json(&out, &doc)?;
    Ok(Outcome {
        ok: replay_valid,
        lines: vec![format!(
            "shrink: {} of {} vertices survive (κ = {})",
            doc.survivors.len(),
            doc.vertices,
            cfg.kappa
        )],
        written: vec![out],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub command: String,
    pub rows: usize,
    pub dim: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub vc_dim: usize,
    pub seed: u64,
    pub requested: usize,
    pub ids: Vec<String>,
    pub radius: Option<f64>,
    pub verdict: Option<BallNetVerdict>,
}

/// Draws a certified random ε-net sample, optionally checking it on balls.
pub fn cmd_sample(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let data = cfg.require(&cfg.data, "--data")?;
    let schema = FeatureSchema::from_path(cfg.require(&cfg.schema, "--schema")?)?;
    let mut data = load_csv(data, &schema)?;
    if schema.columns().iter().any(|c| c.standardize) {
        data = data.standardize()?;
    }
    let vc_dim = cfg.vc_dim.unwrap_or_else(|| ball_vc_dim(data.dim()));
    let sample = certified_sample(&data, cfg.epsilon, cfg.delta, vc_dim, cfg.seed)?;
    let verdict = match cfg.radius {
        Some(r) => Some(verify_ball_net(&data, &sample, r, cfg.epsilon)?),
        None => None,
    };
    ensure!(!sample.ids.is_empty(), "empty sample");
    let doc = SampleReport {
        command: "sample".into(),
        rows: data.len(),
        dim: data.dim(),
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        vc_dim,
        seed: cfg.seed,
        requested: sample.requested,
        ids: sample.ids.iter().map(|&i| data.rows()[i].id.clone()).collect(),
        radius: cfg.radius,
        verdict,
    };
    let out = cfg.out_or("sample.json");
    write_json(&out, &doc)?;
    let mut lines = vec![format!("sample: {} of {} rows (m = {})", doc.ids.len(), doc.rows, doc.requested)];
    if let Some(v) = verdict {
        lines.push(format!(
            "ball check: {} ({} heavy balls)",
            if v.holds { "holds" } else { "violated" },
            v.heavy_balls
        ));
    }
    Ok(Outcome {
        ok: true,
        lines,
        written: vec![out],
    })
}

pub fn cmd_build_graph(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    ensure!(cfg.graph.is_none(), "build-graph takes --data/--schema/--costs, not --graph");
    let g = cfg.load_graph()?;
    let out = cfg.out_or("graph.json");
    let mut text = g.to_json()?;
    text.push('\n');
    crate::write_text(&out, &text)?;
    let s = g.stats();
    Ok(Outcome {
        ok: true,
        lines: vec![format!(
            "build-graph: {} vertices, {} edges, max degree {}, k = {}",
            s.vertices, s.edges, s.max_degree, s.k
        )],
        written: vec![out],
    })
}
