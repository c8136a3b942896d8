//! One-shot game with fully rational agents: links are chosen anticipating the
//! opinion equilibrium they induce.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::graph::weak_components;
use crate::error::{Error, Result};
use crate::model::{direct_payoff, solve_best_responses, OpinionProfile, PeerGraph};
use crate::network::best_window_for;

pub const NASH_SIZE_LIMIT: usize = 10;
pub const ENUMERATION_SIZE_LIMIT: usize = 5;
pub const ALL_SUBSETS_SIZE_LIMIT: usize = 4;
/// A deviation must gain more than this (relative to the payoff scale) to count.
pub const IMPROVEMENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalInstance {
    pub theta: OpinionProfile,
    pub f_vec: Vec<f64>,
    pub v: f64,
}

impl RationalInstance {
    pub fn new(theta: OpinionProfile, f_vec: Vec<f64>, v: f64) -> Result<Self> {
        if f_vec.len() != theta.len() {
            return Err(Error::InvalidParams(format!("{} flexibilities for {} agents", f_vec.len(), theta.len())));
        }
        if let Some(f) = f_vec.iter().find(|&&f| !(f > 0.0 && f < 1.0)) {
            return Err(Error::InvalidParams(format!("f = {f} must lie in (0, 1)")));
        }
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParams(format!("V = {v} must be a finite nonnegative number")));
        }
        Ok(RationalInstance { theta, f_vec, v })
    }

    pub fn homogeneous(theta: OpinionProfile, f: f64, v: f64) -> Result<Self> {
        let n = theta.len();
        Self::new(theta, vec![f; n], v)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }
}

/// Unique opinion equilibrium on a fixed network; isolated agents keep `theta`.
pub fn solve_given_network(instance: &RationalInstance, graph: &PeerGraph) -> Result<Vec<f64>> {
    if graph.n() != instance.n() {
        return Err(Error::InvalidGraph(format!("graph has {} agents, instance has {}", graph.n(), instance.n())));
    }
    solve_best_responses(graph, &instance.f_vec, instance.theta.values())
}

/// Realized utility of agent `i` at the equilibrium `x` of `graph`.
pub fn agent_payoff(instance: &RationalInstance, graph: &PeerGraph, x: &[f64], i: usize) -> f64 {
    direct_payoff(instance.v, instance.f_vec[i], x[i], instance.theta[i], graph.row(i).iter().map(|&j| x[j]))
}

/// Which peer sets an agent may choose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategySpace {
    /// The empty set and every contiguous window over the other agents.
    Windows,
    /// Every subset of the other agents.
    AllSubsets,
}

/// Strategies of agent `i`, in canonical order: empty first, then
/// lexicographic by sorted member list.
pub fn strategies(n: usize, i: usize, space: StrategySpace) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let mut out = vec![Vec::new()];
    match space {
        StrategySpace::Windows => {
            for lo in 0..others.len() {
                for hi in lo..others.len() {
                    out.push(others[lo..=hi].to_vec());
                }
            }
        }
        StrategySpace::AllSubsets => {
            for mask in 1u32..(1 << others.len()) {
                out.push((0..others.len()).filter(|&k| mask >> k & 1 == 1).map(|k| others[k]).collect());
            }
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub agent: usize,
    pub peers: Vec<usize>,
    pub payoff_before: f64,
    pub payoff_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashCheck {
    pub is_nash: bool,
    /// First strictly improving deviation found, scanning agents then strategies in order.
    pub witness: Option<Deviation>,
}

fn improves(after: f64, before: f64) -> bool {
    after - before > IMPROVEMENT_TOLERANCE * before.abs().max(after.abs()).max(1.0)
}

fn check(instance: &RationalInstance, graph: &PeerGraph, menus: &[Vec<Vec<usize>>]) -> Result<NashCheck> {
    let x = solve_given_network(instance, graph)?;
    for (i, menu) in menus.iter().enumerate() {
        let before = agent_payoff(instance, graph, &x, i);
        for peers in menu {
            if peers.as_slice() == graph.row(i) {
                continue;
            }
            let mut deviated = graph.clone();
            deviated.set_row(i, peers.clone());
            let y = solve_given_network(instance, &deviated)?;
            let after = agent_payoff(instance, &deviated, &y, i);
            if improves(after, before) {
                let witness = Deviation { agent: i, peers: peers.clone(), payoff_before: before, payoff_after: after };
                return Ok(NashCheck { is_nash: false, witness: Some(witness) });
            }
        }
    }
    Ok(NashCheck { is_nash: true, witness: None })
}

/// Whether no agent gains by switching to another window (others' links held fixed,
/// opinions re-solved).
pub fn is_nash(instance: &RationalInstance, graph: &PeerGraph) -> Result<NashCheck> {
    is_nash_in(instance, graph, StrategySpace::Windows)
}

pub fn is_nash_in(instance: &RationalInstance, graph: &PeerGraph, space: StrategySpace) -> Result<NashCheck> {
    let n = instance.n();
    if n > NASH_SIZE_LIMIT {
        return Err(Error::SizeLimit { n, limit: NASH_SIZE_LIMIT });
    }
    let menus: Vec<_> = (0..n).map(|i| strategies(n, i, space)).collect();
    check(instance, graph, &menus)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub graph: PeerGraph,
    pub opinions: Vec<f64>,
}

/// Every Nash profile over per-agent windows, ordered by the agents' rows.
pub fn enumerate_equilibria(instance: &RationalInstance) -> Result<Vec<Equilibrium>> {
    enumerate_equilibria_in(instance, StrategySpace::Windows)
}

pub fn enumerate_equilibria_in(instance: &RationalInstance, space: StrategySpace) -> Result<Vec<Equilibrium>> {
    let n = instance.n();
    let limit = match space {
        StrategySpace::Windows => ENUMERATION_SIZE_LIMIT,
        StrategySpace::AllSubsets => ALL_SUBSETS_SIZE_LIMIT,
    };
    if n > limit {
        return Err(Error::SizeLimit { n, limit });
    }
    let menus: Vec<_> = (0..n).map(|i| strategies(n, i, space)).collect();
    let total: usize = menus.iter().map(Vec::len).product();
    // Mixed-radix index with agent 0 most significant, so index order is row order.
    let profile = |mut k: usize| {
        let mut rows = vec![Vec::new(); n];
        for i in (0..n).rev() {
            let m = menus[i].len();
            rows[i] = menus[i][k % m].clone();
            k /= m;
        }
        PeerGraph::from_rows(rows).expect("strategies exclude the owner")
    };
    let found: Vec<Option<Equilibrium>> = (0..total)
        .into_par_iter()
        .map(|k| {
            let graph = profile(k);
            let verdict = check(instance, &graph, &menus)?;
            if verdict.is_nash {
                let opinions = solve_given_network(instance, &graph)?;
                Ok(Some(Equilibrium { graph, opinions }))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Disconnection gap `(1 + f) sqrt(V / (f (1 - f)))` for one agent's flexibility.
pub fn rational_threshold(v: f64, f: f64) -> f64 {
    (1.0 + f) * (v / (f * (1.0 - f))).sqrt()
}

/// `1 + #{i : theta_{i+1} - theta_i > phi}`. With heterogeneous flexibility the
/// largest agent threshold is used.
pub fn component_lower_bound(instance: &RationalInstance) -> usize {
    let phi = instance.f_vec.iter().map(|&f| rational_threshold(instance.v, f)).fold(0.0, f64::max);
    let theta = instance.theta.values();
    1 + theta.windows(2).filter(|w| w[1] - w[0] > phi).count()
}

/// Myopic period-1 network against the rational equilibrium set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MyopicComparison {
    pub myopic_graph: PeerGraph,
    pub myopic_is_equilibrium: bool,
    pub equilibria: usize,
    /// Component counts of the rational equilibria, in enumeration order.
    pub equilibrium_components: Vec<usize>,
    pub myopic_components: usize,
}

pub fn compare_myopic(instance: &RationalInstance) -> Result<MyopicComparison> {
    let theta = instance.theta.values();
    let rows = (0..instance.n()).map(|i| best_window_for(instance.v, instance.f_vec[i], theta, i, None)).collect();
    let myopic_graph = PeerGraph::from_rows(rows)?;
    let equilibria = enumerate_equilibria(instance)?;
    Ok(MyopicComparison {
        myopic_is_equilibrium: equilibria.iter().any(|e| e.graph == myopic_graph),
        equilibria: equilibria.len(),
        equilibrium_components: equilibria.iter().map(|e| weak_components(&e.graph).len()).collect(),
        myopic_components: weak_components(&myopic_graph).len(),
        myopic_graph,
    })
}
