use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};

use pareto_recourse::cost::CostVector;
use pareto_recourse::frontier::is_pareto_set;
use pareto_recourse::graph::GraphStats;
use pareto_recourse::search::{backtrack, pareto_shortest_paths, recourse_frontier, SearchOptions};

use crate::{costs_match, csv_row, pick_source, sidecar, write_json, write_text, Outcome, RunConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub cost: Vec<f64>,
    pub first_reached_hop: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub entry: usize,
    pub hops: usize,
    pub vertices: Vec<String>,
    pub cost: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: String,
    pub entries: Vec<EntryReport>,
    pub paths: Vec<PathReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveChecks {
    pub pareto_sets: bool,
    /// Every path recomputes to its entry cost from the graph's edges.
    pub path_costs: bool,
    pub paths_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub command: String,
    pub source: String,
    pub max_hops: usize,
    pub rounds: usize,
    pub approximate: bool,
    pub graph: GraphStats,
    pub criteria: Vec<String>,
    pub targets: Vec<TargetReport>,
    pub checks: SolveChecks,
}

/// Runs the search from one source and backtracks paths for every reachable
/// positive target.
pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let g = cfg.load_graph()?;
    let spec = g.cost_spec().clone();
    let source = pick_source(&g, cfg.source.as_deref())?;
    let max_hops = cfg.max_hops.min(g.len().saturating_sub(1).max(1));
    let opts = SearchOptions {
        table_cap: cfg.table_cap,
        ..SearchOptions::default()
    };
    let result = pareto_shortest_paths(&g, source, max_hops, &spec, &opts)?;
    let id = |v: usize| g.vertices()[v].id.clone();

    let mut checks = SolveChecks {
        pareto_sets: true,
        path_costs: true,
        paths_checked: 0,
    };
    let mut targets = Vec::new();
    for (t, table) in recourse_frontier(&result, &g) {
        checks.pareto_sets &= is_pareto_set(&table.costs());
        let mut paths = Vec::new();
        for p in backtrack(&result, t, cfg.max_paths)? {
            let again = p.recompute_cost(&g, &spec)?;
            checks.path_costs &= costs_match(again.as_slice(), p.cost.as_slice()) && p.hops <= max_hops;
            checks.paths_checked += 1;
            paths.push(PathReport {
                entry: p.entry,
                hops: p.hops,
                vertices: p.vertices.iter().map(|&v| id(v)).collect(),
                cost: p.cost.into_inner(),
            });
        }
        targets.push(TargetReport {
            target: id(t),
            entries: table
                .entries()
                .iter()
                .map(|e| EntryReport {
                    cost: e.cost.as_slice().to_vec(),
                    first_reached_hop: e.first_reached_hop,
                })
                .collect(),
            paths,
        });
    }
    let report = SolveReport {
        command: "solve".into(),
        source: id(source),
        max_hops,
        rounds: result.last_round(),
        approximate: result.approximate(),
        graph: g.stats(),
        criteria: spec.names().into_iter().map(str::to_owned).collect(),
        targets,
        checks,
    };

    let out = cfg.out_or("solve.json");
    write_json(&out, &report)?;
    let frontier = sidecar(&out, "frontier.csv");
    let mut csv = csv_row(["target".to_string(), "entry".to_string()].into_iter().chain(report.criteria.clone()));
    for t in &report.targets {
        for (i, e) in t.entries.iter().enumerate() {
            csv.push_str(&csv_row(
                [t.target.clone(), i.to_string()].into_iter().chain(e.cost.iter().map(f64::to_string)),
            ));
        }
    }
    write_text(&frontier, &csv)?;

    let reparsed = validate_solve_report(&std::fs::read_to_string(&out)?)?;
    let ok = checks.pareto_sets && checks.path_costs && reparsed;
    let entries: usize = report.targets.iter().map(|t| t.entries.len()).sum();
    Ok(Outcome {
        ok,
        lines: vec![format!(
            "solve: {} targets, {entries} frontier entries, {} paths from `{}` (η = {max_hops})",
            report.targets.len(),
            checks.paths_checked,
            report.source
        )],
        written: vec![out, frontier],
    })
}

/// Re-parses a solve report and checks what it can without the graph: Pareto
/// tables, path endpoints, hop bounds and path costs against their entries.
pub fn validate_solve_report(text: &str) -> Result<bool> {
    let r: SolveReport = serde_json::from_str(text).context("parsing solve report")?;
    ensure!(r.command == "solve", "not a solve report");
    for t in &r.targets {
        let costs = t
            .entries
            .iter()
            .map(|e| CostVector::new(e.cost.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        if !is_pareto_set(&costs) {
            return Ok(false);
        }
        for p in &t.paths {
            let Some(e) = t.entries.get(p.entry) else {
                return Ok(false);
            };
            if !costs_match(&e.cost, &p.cost)
                || p.hops > r.max_hops
                || p.vertices.len() != p.hops + 1
                || p.vertices.first() != Some(&r.source)
                || p.vertices.last() != Some(&t.target)
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
