//! The repeated process: form a network from last period's opinions, solve the
//! period's opinions, repeat until the network freezes into converged cliques.

use serde::{Deserialize, Serialize};

use crate::analysis::graph::{components_complete, weak_components};
use crate::error::{Error, Result};
use crate::model::{hearing_update, solve_within_period, ModelParams, OpinionProfile, PeerGraph};
use crate::network::{form_network_with, FormationOptions};

/// Largest within-component opinion range at a steady state.
pub const STEADY_TOLERANCE: f64 = 1e-9;
/// Increments at most this large carry no sign.
pub const MONOTONE_TOLERANCE: f64 = 1e-12;
/// Limit opinions closer than this belong to the same consensus.
pub const DISTINCT_TOLERANCE: f64 = 1e-6;

/// How professed opinions follow from the period's network.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Simultaneous best responses: the fixed point of `x = f D x + (1 - f) x_prev`.
    #[default]
    Equilibrium,
    /// One DeGroot step with the hearing matrix: `x = ((1 - f) I + f D) x_prev`.
    Hearing,
}

impl UpdateRule {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateRule::Equilibrium => "equilibrium",
            UpdateRule::Hearing => "hearing",
        }
    }
}

impl std::str::FromStr for UpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equilibrium" => Ok(UpdateRule::Equilibrium),
            "hearing" => Ok(UpdateRule::Hearing),
            other => Err(Error::InvalidParams(format!("unknown update rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    SteadyState,
    HorizonReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    MonotoneConsensus,
    TemporaryDisagreement,
    PersistentDisagreement,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::MonotoneConsensus => "monotone_consensus",
            Classification::TemporaryDisagreement => "temporary_disagreement",
            Classification::PersistentDisagreement => "persistent_disagreement",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    /// Present only when graphs are recorded.
    pub graph: Option<PeerGraph>,
    pub opinions: OpinionProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub initial: OpinionProfile,
    pub steps: Vec<StepRecord>,
    /// Graph of the last step, kept even when graphs are not recorded.
    pub final_graph: PeerGraph,
    pub termination: Termination,
    /// Missing when the run stopped at its horizon before settling.
    pub classification: Option<Classification>,
}

impl Trajectory {
    pub fn final_opinions(&self) -> &OpinionProfile {
        self.steps.last().map_or(&self.initial, |s| &s.opinions)
    }

    /// Profiles from `t = 0` on.
    pub fn profiles(&self) -> impl Iterator<Item = &OpinionProfile> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.opinions))
    }

    pub fn final_components(&self) -> Vec<Vec<usize>> {
        weak_components(&self.final_graph)
    }

    /// Opinion each agent converges to. At a steady state every component is
    /// a clique, and cliques keep their mean, so the limit is the component mean.
    pub fn limit_opinions(&self) -> Vec<f64> {
        component_means(&self.final_graph, self.final_opinions().values())
    }

    pub fn graph_at(&self, t: usize) -> Option<&PeerGraph> {
        self.steps.get(t.checked_sub(1)?)?.graph.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub record_graphs: bool,
    pub formation: FormationOptions,
    /// Stop as soon as the graph repeats and every component is a clique,
    /// without waiting for opinions to contract; the limit is then read off
    /// the component means.
    pub early_exit: bool,
    pub update: UpdateRule,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { record_graphs: true, formation: FormationOptions::parallel(), early_exit: false, update: UpdateRule::Equilibrium }
    }
}

/// Per-agent mean of the agent's weak component.
pub fn component_means(graph: &PeerGraph, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for c in weak_components(graph) {
        let mean = c.iter().map(|&i| x[i]).sum::<f64>() / c.len() as f64;
        for i in c {
            out[i] = mean;
        }
    }
    out
}

/// One period: links from `x_prev`, then the simultaneous best responses.
/// [`step_with`] selects the update rule.
pub fn step(params: &ModelParams, x_prev: &OpinionProfile) -> Result<(PeerGraph, OpinionProfile)> {
    step_with(params, x_prev, &FormationOptions::parallel(), UpdateRule::Equilibrium)
}

pub fn step_with(
    params: &ModelParams,
    x_prev: &OpinionProfile,
    formation: &FormationOptions,
    update: UpdateRule,
) -> Result<(PeerGraph, OpinionProfile)> {
    let graph = form_network_with(params, x_prev, formation);
    let x = match update {
        UpdateRule::Equilibrium => solve_within_period(params, &graph, x_prev)?,
        UpdateRule::Hearing => hearing_update(params, &graph, x_prev)?,
    };
    Ok((graph, x))
}

fn component_range(components: &[Vec<usize>], x: &[f64]) -> f64 {
    components
        .iter()
        .map(|c| {
            let (lo, hi) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(x[i]), hi.max(x[i])));
            hi - lo
        })
        .fold(0.0, f64::max)
}

pub fn run(params: &ModelParams, initial: &OpinionProfile) -> Result<Trajectory> {
    run_with(params, initial, &RunOptions::default())
}

pub fn run_with(params: &ModelParams, initial: &OpinionProfile, opts: &RunOptions) -> Result<Trajectory> {
    params.validate()?;
    if initial.len() != params.n {
        return Err(Error::InvalidParams(format!("profile has {} agents, n = {}", initial.len(), params.n)));
    }
    let mut steps = Vec::new();
    let mut x = initial.clone();
    let mut prev_graph: Option<PeerGraph> = None;
    let mut termination = Termination::HorizonReached;
    for t in 1..=params.max_steps {
        let (graph, next) = step_with(params, &x, &opts.formation, opts.update)?;
        let repeated = graph.edge_count() == 0 || prev_graph.as_ref() == Some(&graph);
        let mut settled = false;
        if repeated {
            let components = weak_components(&graph);
            if components_complete(&graph, &components) {
                settled = opts.early_exit || component_range(&components, next.values()) < STEADY_TOLERANCE;
            }
        }
        steps.push(StepRecord { t, graph: opts.record_graphs.then(|| graph.clone()), opinions: next.clone() });
        x = next;
        prev_graph = Some(graph);
        if settled {
            termination = Termination::SteadyState;
            break;
        }
    }
    let mut trajectory = Trajectory {
        params: *params,
        initial: initial.clone(),
        steps,
        final_graph: prev_graph.expect("max_steps >= 1"),
        termination,
        classification: None,
    };
    trajectory.classification = classify(&trajectory).ok();
    Ok(trajectory)
}

/// Change between the last two profiles.
pub fn last_change(trajectory: &Trajectory) -> f64 {
    let profiles: Vec<&OpinionProfile> = trajectory.profiles().collect();
    match profiles.len() {
        0 | 1 => 0.0,
        k => profiles[k - 1].max_abs_diff(profiles[k - 2]),
    }
}

fn has_distinct_limits(trajectory: &Trajectory) -> bool {
    let means = trajectory.limit_opinions();
    trajectory.final_components().len() >= 2 && {
        let mut reps: Vec<f64> = trajectory.final_components().iter().map(|c| means[c[0]]).collect();
        reps.sort_by(f64::total_cmp);
        reps.windows(2).any(|w| w[1] - w[0] > DISTINCT_TOLERANCE)
    }
}

/// Whether every agent's increments keep one sign, ignoring increments within tolerance.
pub fn is_monotone(trajectory: &Trajectory) -> bool {
    let n = trajectory.initial.len();
    let mut sign = vec![0i8; n];
    let profiles: Vec<&OpinionProfile> = trajectory.profiles().collect();
    for pair in profiles.windows(2) {
        for i in 0..n {
            let inc = pair[1][i] - pair[0][i];
            if inc.abs() <= MONOTONE_TOLERANCE {
                continue;
            }
            let s = if inc > 0.0 { 1 } else { -1 };
            if sign[i] == -s {
                return false;
            }
            sign[i] = s;
        }
    }
    true
}

/// Agents whose increments change sign at least once.
pub fn non_monotone_agents(trajectory: &Trajectory) -> Vec<usize> {
    let n = trajectory.initial.len();
    let mut sign = vec![0i8; n];
    let mut flipped = vec![false; n];
    let profiles: Vec<&OpinionProfile> = trajectory.profiles().collect();
    for pair in profiles.windows(2) {
        for i in 0..n {
            let inc = pair[1][i] - pair[0][i];
            if inc.abs() > MONOTONE_TOLERANCE {
                let s = if inc > 0.0 { 1 } else { -1 };
                flipped[i] |= sign[i] == -s;
                sign[i] = s;
            }
        }
    }
    (0..n).filter(|&i| flipped[i]).collect()
}

/// Persistent disagreement when the final components hold distinct limits;
/// otherwise monotone consensus unless some agent reverses direction.
pub fn classify(trajectory: &Trajectory) -> Result<Classification> {
    if trajectory.termination == Termination::HorizonReached {
        let change = last_change(trajectory);
        if change > DISTINCT_TOLERANCE {
            return Err(Error::Unterminated(change));
        }
    }
    Ok(classify_unchecked(trajectory))
}

/// Classification that also accepts unsettled runs: at least two components
/// at the horizon count as persistent disagreement.
pub fn classify_lenient(trajectory: &Trajectory) -> Classification {
    if trajectory.termination == Termination::HorizonReached && trajectory.final_components().len() >= 2 {
        return Classification::PersistentDisagreement;
    }
    classify_unchecked(trajectory)
}

fn classify_unchecked(trajectory: &Trajectory) -> Classification {
    if has_distinct_limits(trajectory) {
        Classification::PersistentDisagreement
    } else if is_monotone(trajectory) {
        Classification::MonotoneConsensus
    } else {
        Classification::TemporaryDisagreement
    }
}
