//! Parameters, state types, payoffs and the within-period opinion solve.
//!
//! Agents are indexed `0..n` in nondecreasing order of opinion. Each step an
//! agent `i` holds a subjective opinion `x_prev[i]`, picks a set of peers, and
//! then professes `x[i] = f * mean(peers' x) + (1 - f) * x_prev[i]`. Because
//! every agent does this simultaneously, the professed profile is the fixed
//! point of that linear map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residual required of a within-period solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// The iteration keeps going past [`SOLVE_TOLERANCE`] until it hits this
/// residual or stops improving, so solved profiles are accurate to roughly
/// machine precision.
const SOLVE_TARGET: f64 = 1e-15;

const MAX_SOLVE_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Gross benefit of one out-link.
    pub v: f64,
    /// Flexibility: weight on the conformity term.
    pub f: f64,
    /// Number of agents.
    pub n: usize,
    /// Horizon for a dynamic run.
    pub max_steps: usize,
}

impl ModelParams {
    pub const DEFAULT_MAX_STEPS: usize = 500;

    pub fn new(v: f64, f: f64, n: usize, max_steps: usize) -> Result<Self> {
        let params = ModelParams { v, f, n, max_steps };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f > 0.0 && self.f < 1.0) {
            return Err(Error::InvalidParams(format!("f = {} must lie in (0, 1)", self.f)));
        }
        if !(self.v >= 0.0) || !self.v.is_finite() {
            return Err(Error::InvalidParams(format!("V = {} must be a finite nonnegative number", self.v)));
        }
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n = {} must be at least 2", self.n)));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidParams("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Opinions of all agents at one time step, index order mirroring opinion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpinionProfile(Vec<f64>);

impl OpinionProfile {
    /// Builds a profile, rejecting non-finite values and any decrease along the index order.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 agents, got {}", values.len())));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite opinion {bad}")));
        }
        if let Some(index) = values.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::Unordered { index, left: values[index], right: values[index + 1] });
        }
        Ok(OpinionProfile(values))
    }

    /// Wraps values produced by the dynamics. Ordering holds mathematically there,
    /// but float rounding can leave ties out of order by an ulp.
    pub(crate) fn from_dynamics(values: Vec<f64>) -> Self {
        OpinionProfile(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Largest violation of the ordering, zero for an ordered profile.
    pub fn order_violation(&self) -> f64 {
        self.0.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &OpinionProfile) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for OpinionProfile {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Directed peer choices for one step; row `i` lists the agents `i` links to, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeerGraph {
    rows: Vec<Vec<usize>>,
}

impl PeerGraph {
    pub fn empty(n: usize) -> Self {
        PeerGraph { rows: vec![Vec::new(); n] }
    }

    pub fn complete(n: usize) -> Self {
        PeerGraph { rows: (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect() }
    }

    /// Builds a graph from per-agent peer lists. Rows are sorted and deduplicated;
    /// self-loops and out-of-range indices are rejected.
    pub fn from_rows(mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            if row.contains(&i) {
                return Err(Error::InvalidGraph(format!("self-loop at agent {i}")));
            }
            if let Some(&j) = row.iter().find(|&&j| j >= n) {
                return Err(Error::InvalidGraph(format!("agent {i} links to {j}, but n = {n}")));
            }
        }
        Ok(PeerGraph { rows })
    }

    /// Builds a graph from a directed edge list.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut rows = vec![Vec::new(); n];
        for (src, dst) in edges {
            if src >= n {
                return Err(Error::InvalidGraph(format!("edge source {src} out of range")));
            }
            rows[src].push(dst);
        }
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n()];
        for row in &self.rows {
            for &j in row {
                deg[j] += 1;
            }
        }
        deg
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.rows[src].binary_search(&dst).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
    }

    pub fn is_complete(&self) -> bool {
        let n = self.n();
        self.rows.iter().all(|row| row.len() == n - 1)
    }

    pub(crate) fn set_row(&mut self, i: usize, row: Vec<usize>) {
        self.rows[i] = row;
    }

    /// True when every row is a contiguous run over the other agents in index order.
    pub fn is_windowed(&self) -> bool {
        (0..self.n()).all(|i| is_window(&self.rows[i], i))
    }

    /// Window-endpoint monotonicity: for `i < j` with nonempty rows, both ends of
    /// `i`'s window (with `i` itself included) are at most those of `j`.
    pub fn has_monotone_windows(&self) -> bool {
        let ends: Vec<(usize, usize)> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(_, row)| !row.is_empty())
            .map(|(i, row)| (row[0].min(i), row[row.len() - 1].max(i)))
            .collect();
        ends.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1)
    }
}

/// Checks that a sorted peer list is hole-free over the agents other than `owner`.
pub fn is_window(peers: &[usize], owner: usize) -> bool {
    if peers.contains(&owner) {
        return false;
    }
    peers.windows(2).all(|w| {
        let gap = w[1] - w[0];
        gap == 1 || (gap == 2 && w[0] + 1 == owner)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborStats {
    pub mu: f64,
    pub sigma2: f64,
    pub d: usize,
}

impl NeighborStats {
    /// Mean and population variance of `x` over `peers`. With no peers the mean
    /// falls back to the owner's own opinion and the variance is zero.
    pub fn of(peers: &[usize], x: &[f64], owner: usize) -> Self {
        let d = peers.len();
        if d == 0 {
            return NeighborStats { mu: x[owner], sigma2: 0.0, d };
        }
        let mu = peers.iter().map(|&j| x[j]).sum::<f64>() / d as f64;
        let sigma2 = peers.iter().map(|&j| (x[j] - mu).powi(2)).sum::<f64>() / d as f64;
        NeighborStats { mu, sigma2, d }
    }
}

/// Equilibrium payoff of an agent with `d` peers whose professed opinions have
/// mean `mu` and variance `sigma2`, given her subjective opinion `x_prev`.
pub fn realized_payoff(params: &ModelParams, d: usize, mu: f64, sigma2: f64, x_prev: f64) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let f = params.f;
    d as f64 * (params.v - f * (1.0 - f) * (mu - x_prev).powi(2) - f * sigma2)
}

/// Payoff agent `i` expects from `window` when she treats the others' opinions
/// as frozen at `x_prev`.
pub fn anticipated_payoff(params: &ModelParams, window: &[usize], x_prev: &OpinionProfile, i: usize) -> Result<f64> {
    let x = x_prev.values();
    if window.iter().any(|&j| j >= x.len()) {
        return Err(Error::InvalidWindow { agent: i, reason: "index out of range".into() });
    }
    let mut sorted = window.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != window.len() {
        return Err(Error::InvalidWindow { agent: i, reason: "duplicate members".into() });
    }
    if sorted.contains(&i) {
        return Err(Error::InvalidWindow { agent: i, reason: "contains the agent itself".into() });
    }
    if !is_window(&sorted, i) {
        return Err(Error::InvalidWindow { agent: i, reason: "has holes".into() });
    }
    let stats = NeighborStats::of(&sorted, x, i);
    Ok(realized_payoff(params, stats.d, stats.mu, stats.sigma2, x[i]))
}

/// Payoff computed term by term from the primitive utility: every link earns
/// `v`, minus the disagreement with that peer and the distance from `anchor`.
pub fn direct_payoff(v: f64, f: f64, own: f64, anchor: f64, peer_opinions: impl IntoIterator<Item = f64>) -> f64 {
    peer_opinions
        .into_iter()
        .map(|xj| v - f * (own - xj).powi(2) - (1.0 - f) * (own - anchor).powi(2))
        .sum()
}

/// Iteration cap for a contraction of modulus `f` reaching [`SOLVE_TOLERANCE`],
/// with a tenfold margin.
pub fn iteration_cap(f: f64) -> usize {
    if f <= 0.0 {
        return 10;
    }
    let needed = (SOLVE_TOLERANCE.ln() / f.ln()).ceil();
    if !needed.is_finite() {
        return MAX_SOLVE_ITERATIONS;
    }
    ((10.0 * needed.max(1.0)) as usize).min(MAX_SOLVE_ITERATIONS)
}

/// Largest violation of the best-response equations at `x`.
pub fn best_response_residual(graph: &PeerGraph, flex: &[f64], x: &[f64], anchor: &[f64]) -> f64 {
    (0..x.len())
        .map(|i| {
            let row = graph.row(i);
            if row.is_empty() {
                (x[i] - anchor[i]).abs()
            } else {
                let mu = row.iter().map(|&j| x[j]).sum::<f64>() / row.len() as f64;
                (x[i] - flex[i] * mu - (1.0 - flex[i]) * anchor[i]).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Solves `x_i = f_i * mean_{j in row i} x_j + (1 - f_i) * anchor_i` for agents
/// with peers, holding isolated agents at their anchor. Jacobi iteration from
/// the anchor; the map contracts in the sup norm with modulus `max f_i`.
pub fn solve_best_responses(graph: &PeerGraph, flex: &[f64], anchor: &[f64]) -> Result<Vec<f64>> {
    let n = anchor.len();
    assert_eq!(graph.n(), n, "graph and profile sizes differ");
    assert_eq!(flex.len(), n, "flexibility vector and profile sizes differ");

    let f_max = flex.iter().copied().fold(0.0, f64::max);
    let cap = iteration_cap(f_max);
    let mut x = anchor.to_vec();
    let mut next = vec![0.0; n];
    let mut best_change = f64::INFINITY;
    let mut stalled = 0;
    let mut iterations = 0;

    while iterations < cap {
        iterations += 1;
        let mut change: f64 = 0.0;
        for i in 0..n {
            let row = graph.row(i);
            next[i] = if row.is_empty() {
                anchor[i]
            } else {
                let mu = row.iter().map(|&j| x[j]).sum::<f64>() / row.len() as f64;
                flex[i] * mu + (1.0 - flex[i]) * anchor[i]
            };
            change = change.max((next[i] - x[i]).abs());
        }
        std::mem::swap(&mut x, &mut next);
        if change <= SOLVE_TARGET {
            break;
        }
        // Rounding floor reached.
        if change < best_change {
            best_change = change;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 3 {
                break;
            }
        }
    }

    let residual = best_response_residual(graph, flex, &x, anchor);
    if residual < SOLVE_TOLERANCE {
        Ok(x)
    } else {
        Err(Error::NonConvergence { residual, iterations })
    }
}

/// Professed opinions for step `t` given the step's graph and `x_prev`.
pub fn solve_within_period(params: &ModelParams, graph: &PeerGraph, x_prev: &OpinionProfile) -> Result<OpinionProfile> {
    if graph.n() != x_prev.len() {
        return Err(Error::InvalidGraph(format!("graph has {} agents, profile has {}", graph.n(), x_prev.len())));
    }
    let flex = vec![params.f; x_prev.len()];
    solve_best_responses(graph, &flex, x_prev.values()).map(OpinionProfile::from_dynamics)
}

/// One application of the hearing matrix: `x[i] = f * mean(x_prev over row i) + (1 - f) * x_prev[i]`,
/// isolated agents unchanged. This is the first Jacobi sweep of the within-period solve,
/// i.e. peers' opinions are taken at their previous values.
pub fn hearing_update(params: &ModelParams, graph: &PeerGraph, x_prev: &OpinionProfile) -> Result<OpinionProfile> {
    if graph.n() != x_prev.len() {
        return Err(Error::InvalidGraph(format!("graph has {} agents, profile has {}", graph.n(), x_prev.len())));
    }
    let f = params.f;
    let x = x_prev.values();
    let next = (0..x.len())
        .map(|i| {
            let row = graph.row(i);
            if row.is_empty() {
                x[i]
            } else {
                f * (row.iter().map(|&j| x[j]).sum::<f64>() / row.len() as f64) + (1.0 - f) * x[i]
            }
        })
        .collect();
    Ok(OpinionProfile::from_dynamics(next))
}
