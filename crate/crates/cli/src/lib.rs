//! Command implementations behind the `pareto-recourse` binary.
//!
//! Every command reads a [`RunConfig`], writes its report files and returns
//! an [`Outcome`]. Reports are pretty JSON with struct-ordered keys, so equal
//! seeds give equal bytes; wall-clock timings only go to sidecar CSVs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use serde::Serialize;

use pareto_recourse::config::ProblemConfig;
use pareto_recourse::data::{load_csv, Dataset, FeatureSchema};
use pareto_recourse::graph::ActionabilityGraph;

mod experiments;
pub mod fixtures;
mod scaling;
mod solve;

pub use experiments::{
    cmd_oracle_check, cmd_scalability, BudgetStats, Disagreement, OracleReport, OracleTrial, ScalabilityReport,
    ScalabilityTrial, SizeSummary, Trend,
};
pub use scaling::{cmd_build_graph, cmd_sample, cmd_shrink, Merge, SampleReport, ShrinkFileReport};
pub use solve::{cmd_solve, validate_solve_report, EntryReport, PathReport, SolveChecks, SolveReport, TargetReport};

/// Flags shared by every subcommand. Each command reads the ones it needs.
#[derive(Args, Clone, Debug)]
pub struct RunConfig {
    /// CSV dataset.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Column schema (TOML).
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Criteria, classifier and actionability rules (TOML).
    #[arg(long)]
    pub costs: Option<PathBuf>,
    /// Prebuilt graph JSON, instead of --data/--schema/--costs.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Report path. Sidecar CSVs are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Neighbors per vertex in the KNN graph.
    #[arg(long, default_value_t = 10)]
    pub knn: usize,
    /// Source vertex id. Defaults to the first negatively classified vertex.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated, ascending.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    pub max_paths: usize,
    /// η, the hop bound.
    #[arg(long, default_value_t = 5)]
    pub max_hops: usize,
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Defaults to d + 1 (balls in feature space).
    #[arg(long)]
    pub vc_dim: Option<usize>,
    /// τ_max; downsample larger tables (inexact).
    #[arg(long)]
    pub table_cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shrink on one criterion index instead of all.
    #[arg(long)]
    pub criterion: Option<usize>,
    /// Shrink processing order as vertex ids; others are never merged.
    #[arg(long, value_delimiter = ',')]
    pub order: Vec<String>,
    /// Shuffle the shrink order with --seed.
    #[arg(long)]
    pub shuffle_order: bool,
    /// Ball radius for ε-net verification in `sample`.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            schema: None,
            costs: None,
            graph: None,
            out: None,
            knn: 10,
            source: None,
            trials: None,
            sizes: Vec::new(),
            max_paths: 16,
            max_hops: 5,
            kappa: 2.0,
            epsilon: 0.1,
            delta: 0.1,
            vc_dim: None,
            table_cap: None,
            seed: 0,
            criterion: None,
            order: Vec::new(),
            shuffle_order: false,
            radius: None,
            inject_fault: false,
        }
    }
}

impl RunConfig {
    /// Every referenced input file must exist.
    pub fn validate(&self) -> Result<()> {
        for p in [&self.data, &self.schema, &self.costs, &self.graph].into_iter().flatten() {
            ensure!(p.is_file(), "no such file: {}", p.display());
        }
        ensure!(self.max_paths >= 1, "--max-paths must be >= 1");
        ensure!(self.max_hops >= 1, "--max-hops must be >= 1");
        ensure!(self.knn >= 1, "--knn must be >= 1");
        Ok(())
    }

    fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    fn require<'a>(&self, p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        p.as_deref().with_context(|| format!("{flag} is required"))
    }

    fn load_problem(&self) -> Result<(ProblemConfig, Dataset)> {
        let data = self.require(&self.data, "--data")?;
        let schema = self.require(&self.schema, "--schema")?;
        let costs = self.require(&self.costs, "--costs")?;
        let schema = FeatureSchema::from_path(schema)?;
        let problem = ProblemConfig::from_path(costs)?;
        problem.cost_spec()?.validate_against(&schema)?;
        let raw = load_csv(data, &schema).with_context(|| format!("loading {}", data.display()))?;
        let data = problem.prepare(&raw)?;
        Ok((problem, data))
    }

    /// The graph from --graph, or built from the dataset flags.
    fn load_graph(&self) -> Result<ActionabilityGraph> {
        if let Some(p) = &self.graph {
            return Ok(ActionabilityGraph::read(p)?);
        }
        let (problem, data) = self.load_problem()?;
        Ok(problem.build_graph(&data, self.knn)?)
    }
}

/// What a command reports back to `main`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// `false` when a self-check failed; maps to exit code 1.
    pub ok: bool,
    pub lines: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// `report.json` -> `report.<suffix>`.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Resolves `--source`, or picks the first vertex the classifier rejects.
fn pick_source(g: &ActionabilityGraph, source: Option<&str>) -> Result<usize> {
    match source {
        Some(id) => Ok(g.resolve(id)?),
        None => match g.vertices().iter().position(|v| !v.positive) {
            Some(v) => Ok(v),
            None if !g.is_empty() => Ok(0),
            None => bail!("graph has no vertices"),
        },
    }
}

/// Exact match, or within `1e-9` relative per component.
pub fn costs_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(&x, &y)| x == y || (x - y).abs() <= 1e-9 * x.abs().max(y.abs()))
}

fn csv_row(values: impl IntoIterator<Item = String>) -> String {
    let mut s = values.into_iter().collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}
