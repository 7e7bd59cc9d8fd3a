//! Graph shrinking and ε-net sampling.
//!
//! A vertex `i` is κ-shrinkable to `j` when every in-edge `(p, i)` has a
//! counterpart `(p, j)` costing at most κ times as much. Merging shrinkable
//! vertices yields a shrunk graph `G_S`; which one depends on the processing
//! order, and finding the smallest is not attempted here.
//!
//! Random sampling stands in for an explicit shrink: by the Haussler-Welzl
//! theorem a uniform sample of size
//!
//! ```text
//! m = ceil(max( (4/ε) ln(4/δ), (8 d_VC / ε) ln(16/ε) ))
//! ```
//!
//! is an ε-net with probability at least `1 - δ`. The constants are the
//! classical explicit ones; only the asymptotic form is fixed by the theory.
//! For costs sandwiched between the data-space distance and κ times it, the
//! ranges are balls, with VC dimension at most `d + 1` in `d` dimensions.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::ActionabilityGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShrinkScope {
    /// Only this criterion index is compared.
    Criterion(usize),
    /// Every criterion must satisfy the inequality.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkConfig {
    kappa: f64,
    scope: ShrinkScope,
}

impl ShrinkConfig {
    pub fn new(kappa: f64, scope: ShrinkScope) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(Error::OutOfRange(format!("kappa must be >= 1, got {kappa}")));
        }
        Ok(ShrinkConfig { kappa, scope })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn scope(&self) -> ShrinkScope {
        self.scope
    }

    fn check_scope(&self, k: usize) -> Result<()> {
        match self.scope {
            ShrinkScope::Criterion(c) if c >= k => {
                Err(Error::OutOfRange(format!("criterion index {c} >= k = {k}")))
            }
            _ => Ok(()),
        }
    }
}

struct Shrinker<'a> {
    g: &'a ActionabilityGraph,
    incoming: Vec<Vec<(usize, &'a crate::cost::CostVector)>>,
    cfg: ShrinkConfig,
}

impl<'a> Shrinker<'a> {
    fn new(g: &'a ActionabilityGraph, cfg: ShrinkConfig) -> Result<Self> {
        cfg.check_scope(g.k())?;
        Ok(Shrinker {
            g,
            incoming: g.in_edges(),
            cfg,
        })
    }

    fn shrinkable(&self, i: usize, j: usize) -> bool {
        self.incoming[i].iter().all(|&(p, c_pi)| match self.g.edge_cost(p, j) {
            None => false,
            Some(c_pj) => {
                let (a, b) = (c_pj.as_slice(), c_pi.as_slice());
                match self.cfg.scope {
                    ShrinkScope::Criterion(x) => a[x] <= self.cfg.kappa * b[x],
                    ShrinkScope::All => a.iter().zip(b).all(|(a, b)| *a <= self.cfg.kappa * b),
                }
            }
        })
    }
}

/// `true` iff every in-edge `(p, i)` has an edge `(p, j)` with
/// `c(p, j) <= κ c(p, i)` over the configured criteria.
pub fn is_shrinkable(g: &ActionabilityGraph, i: usize, j: usize, cfg: &ShrinkConfig) -> Result<bool> {
    for v in [i, j] {
        if v >= g.len() {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
    }
    if i == j {
        return Err(Error::OutOfRange("a vertex cannot shrink to itself".into()));
    }
    Ok(Shrinker::new(g, *cfg)?.shrinkable(i, j))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkReport {
    /// Surviving vertices of `G_S`, ascending.
    pub survivors: Vec<usize>,
    /// `(shrunk vertex, representative)` in merge order.
    pub merges: Vec<(usize, usize)>,
    /// The processing order used.
    pub order: Vec<usize>,
}

impl ShrinkReport {
    /// Representative of every vertex; survivors map to themselves.
    pub fn representatives(&self, n: usize) -> Vec<usize> {
        let mut rep: Vec<usize> = (0..n).collect();
        for &(i, r) in &self.merges {
            rep[i] = r;
        }
        rep
    }

    pub fn reduction_ratio(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        1.0 - self.survivors.len() as f64 / n as f64
    }
}

/// Greedy shrinking in `order`.
///
/// Each vertex merges into the lowest-index surviving vertex it is
/// shrinkable to. Vertices that already absorbed others stay put, so every
/// representative is a survivor. Passes repeat until one makes no merge.
/// Shrinkability is always tested on the original graph. Vertices missing
/// from `order` never merge.
pub fn shrink_graph(g: &ActionabilityGraph, cfg: &ShrinkConfig, order: &[usize]) -> Result<ShrinkReport> {
    let n = g.len();
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::OutOfRange(format!("vertex #{v} repeated in shrink order")));
        }
    }
    let shrinker = Shrinker::new(g, *cfg)?;
    let mut alive = vec![true; n];
    let mut absorbed = vec![false; n];
    let mut merges = Vec::new();
    loop {
        let mut changed = false;
        for &i in order {
            if !alive[i] || absorbed[i] {
                continue;
            }
            if let Some(j) = (0..n).find(|&j| j != i && alive[j] && shrinker.shrinkable(i, j)) {
                alive[i] = false;
                absorbed[j] = true;
                merges.push((i, j));
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(ShrinkReport {
        survivors: (0..n).filter(|&v| alive[v]).collect(),
        merges,
        order: order.to_vec(),
    })
}

/// Replays every recorded merge and confirms it was legal when made.
pub fn replay_shrink(g: &ActionabilityGraph, cfg: &ShrinkConfig, report: &ShrinkReport) -> Result<bool> {
    let shrinker = Shrinker::new(g, *cfg)?;
    let n = g.len();
    let mut alive = vec![true; n];
    let mut absorbed = vec![false; n];
    for &(i, j) in &report.merges {
        if i >= n || j >= n || i == j || !alive[i] || !alive[j] || absorbed[i] || !shrinker.shrinkable(i, j) {
            return Ok(false);
        }
        alive[i] = false;
        absorbed[j] = true;
    }
    let survivors: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    Ok(survivors == report.survivors)
}

/// A pair whose rerouted cost in `G_S` exceeds `κ l` times the original.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RerouteViolation {
    pub from: usize,
    pub to: usize,
    pub hops: usize,
    pub original_cost: f64,
    /// `None` when the representatives are disconnected in `G_S`.
    pub shrunk_cost: Option<f64>,
}

/// Min-cost table over walks of at most `h` edges for each `h < n`, single
/// criterion summed. Unreached entries are `INFINITY`.
fn hop_costs(n: usize, edges: &[(usize, usize, f64)], from: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![f64::INFINITY; n]];
    rows[0][from] = 0.0;
    for h in 1..n.max(1) {
        let mut next = rows[h - 1].clone();
        for &(u, v, c) in edges {
            let cand = rows[h - 1][u] + c;
            if cand < next[v] {
                next[v] = cand;
            }
        }
        rows.push(next);
    }
    rows
}

/// Brute-force check of `cost_{G_S}(rep s, rep t) <= κ l cost_G(s, t)` for
/// every ordered pair joined in `G`, where `l` is the fewest hops of a
/// min-cost `s -> t` path. Uses criterion `criterion` with Sum semantics.
pub fn check_rerouting_bound(
    g: &ActionabilityGraph,
    report: &ShrinkReport,
    kappa: f64,
    criterion: usize,
) -> Result<Option<RerouteViolation>> {
    if criterion >= g.k() {
        return Err(Error::OutOfRange(format!("criterion index {criterion} >= k = {}", g.k())));
    }
    let n = g.len();
    let rep = report.representatives(n);
    let alive: Vec<bool> = {
        let mut a = vec![false; n];
        for &s in &report.survivors {
            a[s] = true;
        }
        a
    };
    let all: Vec<(usize, usize, f64)> = g.edges().map(|(u, e)| (u, e.to, e.cost.as_slice()[criterion])).collect();
    let induced: Vec<(usize, usize, f64)> = all.iter().copied().filter(|&(u, v, _)| alive[u] && alive[v]).collect();
    for s in 0..n {
        let orig = hop_costs(n, &all, s);
        let best = &orig[orig.len() - 1];
        let shrunk = hop_costs(n, &induced, rep[s]);
        let shrunk_best = &shrunk[shrunk.len() - 1];
        for t in 0..n {
            if t == s || !best[t].is_finite() {
                continue;
            }
            let hops = (0..orig.len())
                .find(|&h| orig[h][t] <= best[t] * (1.0 + 1e-12))
                .unwrap_or(orig.len() - 1);
            let bound = kappa * hops as f64 * best[t];
            let got = if rep[t] == rep[s] { 0.0 } else { shrunk_best[rep[t]] };
            if !(got <= bound * (1.0 + 1e-9) + 1e-12) {
                return Ok(Some(RerouteViolation {
                    from: s,
                    to: t,
                    hops,
                    original_cost: best[t],
                    shrunk_cost: got.is_finite().then_some(got),
                }));
            }
        }
    }
    Ok(None)
}

/// Haussler-Welzl sample size with explicit constants.
pub fn sample_size(epsilon: f64, delta: f64, vc_dim: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange(format!("epsilon must be in (0, 1), got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange(format!("delta must be in (0, 1), got {delta}")));
    }
    if vc_dim == 0 {
        return Err(Error::OutOfRange("vc_dim must be >= 1".into()));
    }
    let confidence = 4.0 / epsilon * (4.0 / delta).ln();
    let complexity = 8.0 * vc_dim as f64 / epsilon * (16.0 / epsilon).ln();
    Ok(confidence.max(complexity).ceil() as usize)
}

/// VC dimension of closed balls in `d` dimensions, as bounded by halfspaces.
pub fn ball_vc_dim(d: usize) -> usize {
    d + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetCertificate {
    pub epsilon: f64,
    pub delta: f64,
    pub vc_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetSample {
    /// Sampled row indices, ascending and distinct.
    pub ids: Vec<usize>,
    /// Requested size `m`; `ids.len() == min(m, n)`.
    pub requested: usize,
    pub seed: u64,
    pub certificate: Option<NetCertificate>,
}

/// `min(m, n)` distinct indices from `0..n`, uniform without replacement.
pub fn sample_indices(n: usize, m: usize, seed: u64) -> Result<NetSample> {
    if m == 0 {
        return Err(Error::OutOfRange("sample size must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = index::sample(&mut rng, n, m.min(n)).into_vec();
    ids.sort_unstable();
    Ok(NetSample {
        ids,
        requested: m,
        seed,
        certificate: None,
    })
}

pub fn sample_epsilon_net(data: &Dataset, m: usize, seed: u64) -> Result<NetSample> {
    sample_indices(data.len(), m, seed)
}

/// Samples `sample_size(ε, δ, d_VC)` rows and records the guarantee.
pub fn certified_sample(data: &Dataset, epsilon: f64, delta: f64, vc_dim: usize, seed: u64) -> Result<NetSample> {
    let m = sample_size(epsilon, delta, vc_dim)?;
    let mut s = sample_epsilon_net(data, m, seed)?;
    s.certificate = Some(NetCertificate { epsilon, delta, vc_dim });
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallNetVerdict {
    pub holds: bool,
    /// Lowest-index center whose heavy ball misses the sample.
    pub first_violation: Option<usize>,
    /// Number of centers whose ball holds more than `ε n` points.
    pub heavy_balls: usize,
}

/// Checks the ε-net property for closed balls of `radius` centered at every
/// data point (a finite stand-in for all balls), in working feature space.
pub fn verify_ball_net(data: &Dataset, sample: &NetSample, radius: f64, epsilon: f64) -> Result<BallNetVerdict> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::OutOfRange(format!("radius must be >= 0, got {radius}")));
    }
    let rows = data.rows();
    let n = rows.len();
    if let Some(&bad) = sample.ids.iter().find(|&&i| i >= n) {
        return Err(Error::OutOfRange(format!("sample index {bad} >= {n}")));
    }
    let mut in_sample = vec![false; n];
    for &i in &sample.ids {
        in_sample[i] = true;
    }
    let r2 = radius * radius;
    let threshold = epsilon * n as f64;
    let per_center: Vec<(bool, bool)> = (0..n)
        .into_par_iter()
        .map(|c| {
            let center = &rows[c].features;
            let mut count = 0usize;
            let mut hit = false;
            for (j, r) in rows.iter().enumerate() {
                let d2: f64 = center.iter().zip(&r.features).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 <= r2 {
                    count += 1;
                    hit |= in_sample[j];
                }
            }
            let heavy = count as f64 > threshold;
            (heavy, heavy && !hit)
        })
        .collect();
    let first_violation = per_center.iter().position(|&(_, miss)| miss);
    Ok(BallNetVerdict {
        holds: first_violation.is_none(),
        first_violation,
        heavy_balls: per_center.iter().filter(|(h, _)| *h).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{Aggregation, CostSpec, CostVector};

    /// p=0, i=1, j=2, r=3 with c(p,i) = κ c(p,j) = κ² c(p,r) at κ = 2.
    fn toy() -> ActionabilityGraph {
        let mut g = ActionabilityGraph::with_vertex_count(4, CostSpec::external(&[Aggregation::Sum]).unwrap());
        for (to, c) in [(1, 4.0), (2, 2.0), (3, 1.0)] {
            g.add_edge(0, to, CostVector::new(vec![c]).unwrap()).unwrap();
        }
        g
    }

    fn cfg() -> ShrinkConfig {
        ShrinkConfig::new(2.0, ShrinkScope::All).unwrap()
    }

    #[test]
    fn toy_shrinkability() {
        let g = toy();
        assert!(is_shrinkable(&g, 1, 2, &cfg()).unwrap());
        assert!(!is_shrinkable(&g, 3, 1, &cfg()).unwrap());
        // p has no in-edges.
        assert!(is_shrinkable(&g, 0, 3, &cfg()).unwrap());
        assert!(is_shrinkable(&g, 9, 1, &cfg()).is_err());
    }

    #[test]
    fn missing_counterpart_edge() {
        let mut g = toy();
        g.add_edge(1, 3, CostVector::new(vec![1.0]).unwrap()).unwrap();
        // (1,3) is an in-edge of r but there is no edge (1,2).
        assert!(!is_shrinkable(&g, 3, 2, &cfg()).unwrap());
    }

    #[test]
    fn toy_shrink_orders() {
        let g = toy();
        let a = shrink_graph(&g, &cfg(), &[1, 2, 3]).unwrap();
        assert_eq!(a.merges, vec![(1, 2), (3, 2)]);
        assert_eq!(a.survivors, vec![0, 2]);
        let b = shrink_graph(&g, &cfg(), &[2, 1, 3]).unwrap();
        assert_eq!(b.merges, vec![(2, 1)]);
        assert_eq!(b.survivors, vec![0, 1, 3]);
        assert!(replay_shrink(&g, &cfg(), &a).unwrap());
        assert!(replay_shrink(&g, &cfg(), &b).unwrap());
        let mut forged = b.clone();
        forged.merges.push((3, 1));
        assert!(!replay_shrink(&g, &cfg(), &forged).unwrap());
    }

    #[test]
    fn nothing_shrinkable() {
        // A directed 3-cycle: every vertex has an in-edge from a vertex that
        // has no edge to any other candidate.
        let mut g = ActionabilityGraph::with_vertex_count(3, CostSpec::external(&[Aggregation::Sum]).unwrap());
        for (u, v) in [(0, 1), (1, 2), (2, 0)] {
            g.add_edge(u, v, CostVector::new(vec![1.0]).unwrap()).unwrap();
        }
        let r = shrink_graph(&g, &ShrinkConfig::new(1.0, ShrinkScope::All).unwrap(), &[0, 1, 2]).unwrap();
        assert_eq!(r.survivors, vec![0, 1, 2]);
        assert!(r.merges.is_empty());
    }

    #[test]
    fn kappa_below_one_is_rejected() {
        assert!(ShrinkConfig::new(0.5, ShrinkScope::All).is_err());
        assert!(ShrinkConfig::new(f64::NAN, ShrinkScope::All).is_err());
    }

    #[test]
    fn sample_size_fixed_constants() {
        assert_eq!(sample_size(0.1, 0.1, 3).unwrap(), 1219);
        assert!(sample_size(0.0, 0.1, 3).is_err());
        assert!(sample_size(0.1, 1.0, 3).is_err());
        assert!(sample_size(0.1, 0.1, 0).is_err());
        assert_eq!(ball_vc_dim(2), 3);
    }

    #[test]
    fn halving_epsilon_never_shrinks_the_sample() {
        let mut eps = 0.9;
        while eps > 1e-3 {
            assert!(sample_size(eps / 2.0, 0.05, 4).unwrap() >= sample_size(eps, 0.05, 4).unwrap());
            eps /= 2.0;
        }
    }

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let a = sample_indices(1024, 256, 7).unwrap();
        let b = sample_indices(1024, 256, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ids.len(), 256);
        let mut dedup = a.ids.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 256);
        let all = sample_indices(10, 50, 1).unwrap();
        assert_eq!(all.ids, (0..10).collect::<Vec<_>>());
        assert!(sample_indices(10, 0, 1).is_err());
    }

    #[test]
    fn ball_net_trivial_and_violated() {
        let pts: Vec<Vec<f64>> = (0..100).map(|i| vec![(i % 10) as f64 * 0.01, (i / 10) as f64 * 0.01]).collect();
        let d = Dataset::from_points(pts).unwrap();
        let all = sample_epsilon_net(&d, 100, 0).unwrap();
        assert!(verify_ball_net(&d, &all, 0.05, 0.5).unwrap().holds);
        let empty = NetSample {
            ids: vec![],
            requested: 0,
            seed: 0,
            certificate: None,
        };
        let v = verify_ball_net(&d, &empty, 1.0, 0.5).unwrap();
        assert!(!v.holds);
        assert_eq!(v.first_violation, Some(0));
        assert_eq!(v.heavy_balls, 100);
    }

    #[test]
    fn rerouting_bound_on_toy() {
        let g = toy();
        let r = shrink_graph(&g, &cfg(), &[1, 2, 3]).unwrap();
        assert_eq!(check_rerouting_bound(&g, &r, 2.0, 0).unwrap(), None);
    }
}
