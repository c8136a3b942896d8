//! Bounded-confidence baseline: every agent averages over all opinions within `eps`
//! of its own, itself included, and mixes that mean with its previous opinion.

use crate::dynamics::{classify, StepRecord, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::model::{ModelParams, OpinionProfile, PeerGraph};

/// Slack on the confidence radius so grid distances such as `20 * 0.01 <= 0.2` count.
pub const EPS_SLACK: f64 = 1e-12;
/// Largest opinion change at a steady state.
pub const HK_STEADY_TOLERANCE: f64 = 1e-9;

fn check(f: f64, eps: f64) -> Result<()> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidParams(format!("f = {f} must lie in (0, 1)")));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParams(format!("eps = {eps} must be nonnegative")));
    }
    Ok(())
}

/// Range `lo..hi` of agents within `eps` of agent `i` on a sorted profile.
fn neighborhood(x: &[f64], i: usize, eps: f64) -> (usize, usize) {
    let r = eps + EPS_SLACK;
    let lo = x.partition_point(|&v| v < x[i] - r);
    let hi = x.partition_point(|&v| v <= x[i] + r);
    (lo, hi)
}

/// Confidence neighborhoods excluding self, as a symmetric graph.
pub fn hk_graph(eps: f64, x_prev: &OpinionProfile) -> PeerGraph {
    let x = x_prev.values();
    let rows = (0..x.len())
        .map(|i| {
            let (lo, hi) = neighborhood(x, i, eps);
            (lo..hi).filter(|&j| j != i).collect()
        })
        .collect();
    PeerGraph::from_rows(rows).expect("self excluded")
}

pub fn hk_step(f: f64, eps: f64, x_prev: &OpinionProfile) -> Result<OpinionProfile> {
    check(f, eps)?;
    let x = x_prev.values();
    let mut prefix = vec![0.0; x.len() + 1];
    for (i, v) in x.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    let next = (0..x.len())
        .map(|i| {
            let (lo, hi) = neighborhood(x, i, eps);
            let mean = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            f * mean + (1.0 - f) * x[i]
        })
        .collect();
    Ok(OpinionProfile::from_dynamics(next))
}

/// Iterates [`hk_step`] until no opinion moves by [`HK_STEADY_TOLERANCE`] or
/// `max_steps` is reached. Step records carry the neighborhood graphs.
pub fn hk_run(f: f64, eps: f64, initial: &OpinionProfile, max_steps: usize) -> Result<Trajectory> {
    check(f, eps)?;
    let params = ModelParams::new(0.0, f, initial.len(), max_steps)?;
    let mut x = initial.clone();
    let mut steps = Vec::new();
    let mut termination = Termination::HorizonReached;
    let mut graph = PeerGraph::empty(initial.len());
    for t in 1..=max_steps {
        graph = hk_graph(eps, &x);
        let next = hk_step(f, eps, &x)?;
        let change = next.max_abs_diff(&x);
        steps.push(StepRecord { t, graph: Some(graph.clone()), opinions: next.clone() });
        x = next;
        if change < HK_STEADY_TOLERANCE {
            termination = Termination::SteadyState;
            break;
        }
    }
    let mut trajectory =
        Trajectory { params, initial: initial.clone(), steps, final_graph: graph, termination, classification: None };
    trajectory.classification = classify(&trajectory).ok();
    Ok(trajectory)
}

/// Clusters of a profile: maximal runs whose adjacent gaps are at most `eps`.
pub fn clusters(x: &[f64], eps: f64) -> usize {
    if x.is_empty() {
        return 0;
    }
    1 + x.windows(2).filter(|w| w[1] - w[0] > eps).count()
}
