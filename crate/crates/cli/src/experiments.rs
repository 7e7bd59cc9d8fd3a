use std::time::Instant;

use anyhow::{bail, ensure, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pareto_recourse::cost::CostVector;
use pareto_recourse::epsnet::sample_indices;
use pareto_recourse::frontier::{is_pareto_set, prune, TableEntry};
use pareto_recourse::oracle::brute_force_oracle;
use pareto_recourse::search::{backtrack, pareto_shortest_paths, recourse_frontier, SearchOptions};
use pareto_recourse::synthetic::{derive_seed, random_instance, RandomGraphParams};

use crate::{costs_match, csv_row, sidecar, write_json, write_text, Outcome, RunConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleTrial {
    pub trial: usize,
    pub seed: u64,
    pub vertices: usize,
    pub edges: usize,
    pub k: usize,
    pub max_hops: usize,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub trial: usize,
    pub seed: u64,
    pub vertex: String,
    pub expected: Vec<Vec<f64>>,
    pub got: Vec<Vec<f64>>,
    pub graph: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub command: String,
    pub seed: u64,
    pub trials: usize,
    pub max_vertices: usize,
    pub max_out_degree: usize,
    pub k_choices: Vec<usize>,
    pub hop_range: [usize; 2],
    pub max_cost: u32,
    pub fault_injected: bool,
    pub agreed: usize,
    pub records: Vec<OracleTrial>,
    pub disagreements: Vec<Disagreement>,
}

fn plain(costs: Vec<CostVector>) -> Vec<Vec<f64>> {
    costs.into_iter().map(CostVector::into_inner).collect()
}

/// Random graphs checked vertex by vertex against exhaustive enumeration.
pub fn cmd_oracle_check(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let trials = cfg.trials.unwrap_or(200);
    ensure!(trials >= 1, "--trials must be >= 1");
    let params = RandomGraphParams::default();
    let opts = SearchOptions {
        table_cap: None,
        disable_pruning: cfg.inject_fault,
    };
    let results: Vec<(OracleTrial, Option<Disagreement>)> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<_> {
            let seed = derive_seed(cfg.seed, trial as u64);
            let inst = random_instance(&params, seed)?;
            let g = &inst.graph;
            let res = pareto_shortest_paths(g, inst.source, inst.max_hops, g.cost_spec(), &opts)?;
            let want = brute_force_oracle(g, inst.source, inst.max_hops, g.cost_spec())?;
            let bad = (0..g.len()).find(|&v| res.table(v).costs() != want[v]);
            let record = OracleTrial {
                trial,
                seed,
                vertices: g.len(),
                edges: g.edge_count(),
                k: g.k(),
                max_hops: inst.max_hops,
                agree: bad.is_none(),
            };
            let detail = match bad {
                Some(v) => Some(Disagreement {
                    trial,
                    seed,
                    vertex: g.vertices()[v].id.clone(),
                    expected: plain(want[v].clone()),
                    got: plain(res.table(v).costs()),
                    graph: serde_json::from_str(&g.to_json()?)?,
                }),
                None => None,
            };
            Ok((record, detail))
        })
        .collect::<Result<_>>()?;

    let (records, details): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let disagreements: Vec<Disagreement> = details.into_iter().flatten().collect();
    let report = OracleReport {
        command: "oracle-check".into(),
        seed: cfg.seed,
        trials,
        max_vertices: params.max_vertices,
        max_out_degree: params.max_out_degree,
        k_choices: params.k_choices.clone(),
        hop_range: [params.min_hops, params.max_hops],
        max_cost: params.max_cost,
        fault_injected: cfg.inject_fault,
        agreed: records.iter().filter(|r| r.agree).count(),
        records,
        disagreements,
    };
    let out = cfg.out_or("oracle-check.json");
    write_json(&out, &report)?;
    let mut lines = vec![format!("oracle-check: {}/{} trials agree", report.agreed, trials)];
    if let Some(d) = report.disagreements.first() {
        lines.push(format!(
            "first disagreement: trial {} seed {} vertex {} expected {:?} got {:?}",
            d.trial, d.seed, d.vertex, d.expected, d.got
        ));
        lines.push(format!("graph: {}", d.graph));
    }
    Ok(Outcome {
        ok: report.disagreements.is_empty(),
        lines,
        written: vec![out],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityTrial {
    pub size: usize,
    pub trial: usize,
    pub seed: u64,
    pub edges: usize,
    pub targets_reached: usize,
    /// Non-dominated costs over all reached targets, lexicographic.
    pub frontier: Vec<Vec<f64>>,
    pub paths_checked: usize,
    pub paths_consistent: bool,
}

/// Best second-criterion cost per trial at first-criterion cost `<= cost_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetStats {
    pub cost_1: f64,
    /// Trials with at least one frontier entry within budget.
    pub feasible: usize,
    /// Quartiles over all trials, infeasible ones counting as +inf
    /// (`None` when the quartile itself is infinite).
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub size: usize,
    pub budgets: Vec<BudgetStats>,
}

/// Median `cost_2` per size at the smallest `cost_1` value that occurs in
/// some frontier at every size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub cost_1: Option<f64>,
    pub medians: Vec<Option<f64>>,
    /// Adjacent size pairs where the median goes up.
    pub inversions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityReport {
    pub command: String,
    pub seed: u64,
    pub source: String,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub knn: usize,
    pub max_hops: usize,
    pub criteria: Vec<String>,
    pub records: Vec<ScalabilityTrial>,
    pub summary: Vec<SizeSummary>,
    pub trend: Trend,
}

/// Linear-interpolation quantile of sorted values; `+inf` propagates.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    if lo == hi || sorted[hi].is_infinite() {
        return sorted[hi];
    }
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn best_within(frontier: &[Vec<f64>], budget: f64) -> f64 {
    frontier
        .iter()
        .filter(|c| c[0] <= budget)
        .map(|c| c[1])
        .fold(f64::INFINITY, f64::min)
}

fn budget_stats(records: &[&ScalabilityTrial], budget: f64) -> BudgetStats {
    let mut best: Vec<f64> = records.iter().map(|r| best_within(&r.frontier, budget)).collect();
    best.sort_by(f64::total_cmp);
    BudgetStats {
        cost_1: budget,
        feasible: best.iter().filter(|b| b.is_finite()).count(),
        q1: finite(quantile(&best, 0.25)),
        median: finite(quantile(&best, 0.5)),
        q3: finite(quantile(&best, 0.75)),
    }
}

/// Repeated random subsamples of the dataset at growing sizes, each solved
/// from the same source.
pub fn cmd_scalability(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let trials = cfg.trials.unwrap_or(32);
    let sizes = if cfg.sizes.is_empty() { vec![128, 256, 512, 1024] } else { cfg.sizes.clone() };
    ensure!(trials >= 2, "--trials must be >= 2");
    ensure!(sizes.windows(2).all(|w| w[0] < w[1]), "--sizes must be strictly ascending");
    let (problem, data) = cfg.load_problem()?;
    let spec = problem.cost_spec()?;
    ensure!(spec.k() >= 2, "scalability needs at least two criteria");
    let n = data.len();
    let largest = *sizes.last().expect("non-empty sizes");
    if largest > n {
        bail!("dataset has {n} rows, fewer than the largest size {largest}");
    }
    ensure!(sizes[0] > cfg.knn, "smallest size must exceed --knn");
    let positives = problem.classifier.classify_all(&data)?;
    let src = match &cfg.source {
        Some(id) => data.row_by_id(id).ok_or_else(|| anyhow::anyhow!("unknown source `{id}`"))?,
        None => positives.iter().position(|p| !p).unwrap_or(0),
    };

    let jobs: Vec<(usize, usize, usize)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(si, &size)| (0..trials).map(move |t| (si, size, t)))
        .collect();
    let runs: Vec<(ScalabilityTrial, f64)> = jobs
        .into_par_iter()
        .map(|(si, size, trial)| -> Result<_> {
            let started = Instant::now();
            let seed = derive_seed(derive_seed(cfg.seed, si as u64), trial as u64);
            // The source is always kept; the rest is a uniform sample.
            let mut rows: Vec<usize> = sample_indices(n - 1, size - 1, seed)?
                .ids
                .into_iter()
                .map(|i| if i >= src { i + 1 } else { i })
                .collect();
            rows.push(src);
            rows.sort_unstable();
            let sub = data.subset(&rows)?;
            let g = problem.build_graph(&sub, cfg.knn)?;
            let s = rows.binary_search(&src).expect("source kept");
            let hops = cfg.max_hops.min(size - 1);
            let opts = SearchOptions {
                table_cap: cfg.table_cap,
                ..SearchOptions::default()
            };
            let res = pareto_shortest_paths(&g, s, hops, &spec, &opts)?;
            let mut points = Vec::new();
            let mut paths_checked = 0;
            let mut paths_consistent = true;
            let fronts = recourse_frontier(&res, &g);
            for (t, table) in &fronts {
                for p in backtrack(&res, *t, table.len())? {
                    paths_checked += 1;
                    paths_consistent &= p.hops <= hops
                        && costs_match(p.recompute_cost(&g, &spec)?.as_slice(), p.cost.as_slice());
                }
                points.extend(table.costs().into_iter().map(TableEntry::point));
            }
            let frontier: Vec<Vec<f64>> = prune(points).costs().into_iter().map(CostVector::into_inner).collect();
            let record = ScalabilityTrial {
                size,
                trial,
                seed,
                edges: g.edge_count(),
                targets_reached: fronts.len(),
                frontier,
                paths_checked,
                paths_consistent,
            };
            Ok((record, started.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_>>()?;
    let (records, millis): (Vec<_>, Vec<_>) = runs.into_iter().unzip();

    let mut budgets: Vec<f64> = records.iter().flat_map(|r| r.frontier.iter().map(|c| c[0])).collect();
    budgets.sort_by(f64::total_cmp);
    budgets.dedup();
    let by_size = |size: usize| records.iter().filter(|r| r.size == size).collect::<Vec<_>>();
    let summary: Vec<SizeSummary> = sizes
        .iter()
        .map(|&size| {
            let rs = by_size(size);
            SizeSummary {
                size,
                budgets: budgets.iter().map(|&b| budget_stats(&rs, b)).collect(),
            }
        })
        .collect();
    let reference = budgets.iter().copied().find(|&b| {
        sizes
            .iter()
            .all(|&size| by_size(size).iter().any(|r| r.frontier.iter().any(|c| c[0] == b)))
    });
    let medians: Vec<Option<f64>> = match reference {
        Some(b) => sizes.iter().map(|&size| budget_stats(&by_size(size), b).median).collect(),
        None => vec![None; sizes.len()],
    };
    let inversions = medians
        .windows(2)
        .filter(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => b > a,
            (None, None) => false,
            (Some(_), None) => true,
            (None, Some(_)) => false,
        })
        .count();

    let report = ScalabilityReport {
        command: "scalability".into(),
        seed: cfg.seed,
        source: data.rows()[src].id.clone(),
        sizes: sizes.clone(),
        trials,
        knn: cfg.knn,
        max_hops: cfg.max_hops,
        criteria: spec.names().into_iter().map(str::to_owned).collect(),
        records,
        summary,
        trend: Trend {
            cost_1: reference,
            medians,
            inversions,
        },
    };
    let out = cfg.out_or("scalability.json");
    write_json(&out, &report)?;

    let boxplot = sidecar(&out, "boxplot.csv");
    let mut csv = csv_row(["size", "cost_1", "trial", "best_cost_2"].map(String::from));
    for &b in &budgets {
        for r in &report.records {
            let best = best_within(&r.frontier, b);
            if best.is_finite() {
                csv.push_str(&csv_row([r.size.to_string(), b.to_string(), r.trial.to_string(), best.to_string()]));
            }
        }
    }
    write_text(&boxplot, &csv)?;
    let timings = sidecar(&out, "timings.csv");
    let mut csv = csv_row(["size", "trial", "millis"].map(String::from));
    for (r, ms) in report.records.iter().zip(&millis) {
        csv.push_str(&csv_row([r.size.to_string(), r.trial.to_string(), format!("{ms:.3}")]));
    }
    write_text(&timings, &csv)?;

    let consistent = report.records.iter().all(|r| r.paths_consistent);
    let pareto = report
        .records
        .iter()
        .all(|r| r.frontier.iter().map(|c| CostVector::new(c.clone())).collect::<Result<Vec<_>, _>>().is_ok_and(|c| is_pareto_set(&c)));
    let fmt = |m: &Option<f64>| m.map_or("-".to_string(), |v| format!("{v:.3}"));
    Ok(Outcome {
        ok: consistent && pareto,
        lines: vec![format!(
            "scalability: cost_1 budget {:?}, median cost_2 by size [{}], {} inversion(s)",
            report.trend.cost_1,
            report.trend.medians.iter().map(fmt).collect::<Vec<_>>().join(", "),
            report.trend.inversions
        )],
        written: vec![out, boxplot, timings],
    })
}
