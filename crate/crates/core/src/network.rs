//! Myopic link formation.
//!
//! At the start of a step each agent picks the peer set maximizing her
//! anticipated payoff on last period's opinions. Optimal peer sets in an
//! ordered configuration are hole-free, so the search runs over contiguous
//! windows of the other agents (in index order) plus the empty set.
//!
//! Ties are broken in two stages: a nonempty window beats the empty set when
//! its payoff is tied with zero, and among tied windows the lexicographically
//! smallest sorted index sequence wins. Payoffs within [`TIE_TOLERANCE`]
//! (relative) count as tied.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::thresholds::uniform_radii;
use crate::model::{ModelParams, OpinionProfile, PeerGraph};

/// Relative tolerance under which two anticipated payoffs are treated as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Human-readable description of the tie-break stack, embedded in run metadata.
pub const TIE_BREAK_RULE: &str = "payoffs within 1e-12 (relative) tie; a nonempty window beats the empty set at a tie with 0; \
     then the lexicographically smallest sorted index sequence";

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FormationOptions {
    /// Upper bound on window width. When the best capped window touches the cap
    /// the agent is re-searched without it.
    pub max_width: Option<usize>,
    /// Evaluate rows on the rayon pool.
    pub parallel: bool,
}

impl FormationOptions {
    pub fn parallel() -> Self {
        FormationOptions { max_width: None, parallel: true }
    }

    /// Width cap `ceil(2 * vartheta * n) + 8`, from the extremal linking radius on a uniform grid.
    pub fn pruned_for(params: &ModelParams) -> Self {
        let radii = uniform_radii(params);
        let width = (2.0 * radii.vartheta * params.n as f64).ceil() as usize + 8;
        FormationOptions { max_width: Some(width), parallel: true }
    }
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Scans windows of the others-sequence `[lo, hi]` in lexicographic order and
/// returns the best one, `None` for the empty set, plus whether the winner
/// has the maximum allowed width.
fn search(v: f64, f: f64, x: &[f64], i: usize, max_width: usize) -> (Option<(usize, usize)>, bool) {
    let n = x.len();
    let m = n - 1;
    let xi = x[i];
    // Prefix sums of opinions relative to the agent's own, over the others in index order.
    let mut s1 = Vec::with_capacity(n);
    let mut s2 = Vec::with_capacity(n);
    s1.push(0.0);
    s2.push(0.0);
    for (j, &xj) in x.iter().enumerate() {
        if j == i {
            continue;
        }
        let y = xj - xi;
        s1.push(s1.last().unwrap() + y);
        s2.push(s2.last().unwrap() + y * y);
    }

    let mut best: Option<(usize, usize)> = None;
    let mut best_payoff = 0.0;
    for lo in 0..m {
        let hi_end = m.min(lo + max_width);
        for hi in lo..hi_end {
            let d = (hi - lo + 1) as f64;
            let sum = s1[hi + 1] - s1[lo];
            let sum_sq = s2[hi + 1] - s2[lo];
            // d*(V - f(1-f)(mu - x_i)^2 - f*sigma^2), expanded in the shifted sums.
            let payoff = d * v - f * sum_sq + f * f * sum * sum / d;
            let better = match best {
                None => payoff > 0.0 || ties(payoff, 0.0),
                Some(_) => payoff > best_payoff && !ties(payoff, best_payoff),
            };
            if better {
                best = Some((lo, hi));
                best_payoff = payoff;
            }
        }
    }
    let at_cap = best.is_some_and(|(lo, hi)| hi - lo + 1 >= max_width && max_width < m);
    (best, at_cap)
}

fn window_members(n: usize, i: usize, lo: usize, hi: usize) -> Vec<usize> {
    (lo..=hi).map(|k| if k < i { k } else { k + 1 }).filter(|&j| j < n).collect()
}

/// Best window for agent `i` under explicit `(v, f)`; shared with the one-shot game.
pub fn best_window_for(v: f64, f: f64, x_prev: &[f64], i: usize, max_width: Option<usize>) -> Vec<usize> {
    let n = x_prev.len();
    let m = n - 1;
    let cap = max_width.unwrap_or(m).clamp(1, m);
    let (mut best, at_cap) = search(v, f, x_prev, i, cap);
    if at_cap {
        best = search(v, f, x_prev, i, m).0;
    }
    match best {
        Some((lo, hi)) => window_members(n, i, lo, hi),
        None => Vec::new(),
    }
}

/// Optimal peer set of agent `i` given last period's opinions.
pub fn best_window(params: &ModelParams, x_prev: &OpinionProfile, i: usize) -> Vec<usize> {
    best_window_for(params.v, params.f, x_prev.values(), i, None)
}

/// Every agent's best window, all computed from the same snapshot.
pub fn form_network(params: &ModelParams, x_prev: &OpinionProfile) -> PeerGraph {
    form_network_with(params, x_prev, &FormationOptions::parallel())
}

/// Windows are taken in opinion order. Profiles produced by the hearing update
/// at large `f` can leave index order, in which case agents are ranked first
/// (ties by index) and the rows are mapped back to agent indices.
pub fn form_network_with(params: &ModelParams, x_prev: &OpinionProfile, opts: &FormationOptions) -> PeerGraph {
    let x = x_prev.values();
    let ordered = x.windows(2).all(|w| w[0] <= w[1]);
    let (perm, sorted): (Vec<usize>, Vec<f64>) = if ordered {
        ((0..x.len()).collect(), x.to_vec())
    } else {
        let mut perm: Vec<usize> = (0..x.len()).collect();
        perm.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        let sorted = perm.iter().map(|&k| x[k]).collect();
        (perm, sorted)
    };
    let row = |r: usize| best_window_for(params.v, params.f, &sorted, r, opts.max_width);
    let ranked: Vec<Vec<usize>> = if opts.parallel {
        (0..x.len()).into_par_iter().map(row).collect()
    } else {
        (0..x.len()).map(row).collect()
    };
    let mut rows = vec![Vec::new(); x.len()];
    for (r, peers) in ranked.into_iter().enumerate() {
        rows[perm[r]] = peers.into_iter().map(|q| perm[q]).collect();
    }
    PeerGraph::from_rows(rows).expect("windows never contain the owner")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::uniform_grid;
    use crate::model::anticipated_payoff;

    fn params(v: f64, f: f64, n: usize) -> ModelParams {
        ModelParams::new(v, f, n, 100).unwrap()
    }

    #[test]
    fn unordered_profiles_use_opinion_order() {
        let p = params(0.01, 0.5, 4);
        let x = OpinionProfile::from_dynamics(vec![0.0, 0.9, 0.1, 1.0]);
        let g = form_network_with(&p, &x, &FormationOptions::default());
        let sorted = OpinionProfile::new(vec![0.0, 0.1, 0.9, 1.0]).unwrap();
        let h = form_network_with(&p, &sorted, &FormationOptions::default());
        let relabel = [0, 2, 1, 3];
        for i in 0..4 {
            let mut mapped: Vec<usize> = h.row(i).iter().map(|&j| relabel[j]).collect();
            mapped.sort();
            assert_eq!(g.row(relabel[i]), mapped.as_slice());
        }
        assert!(g.edge_count() > 0);
    }

    #[test]
    fn windows_skip_owner() {
        assert_eq!(window_members(5, 2, 1, 2), vec![1, 3]);
        assert_eq!(window_members(5, 0, 0, 3), vec![1, 2, 3, 4]);
        assert_eq!(window_members(5, 4, 2, 3), vec![2, 3]);
    }

    #[test]
    fn indifferent_pair_links() {
        let f: f64 = 0.5;
        let gap: f64 = 0.3;
        let v = f * (1.0 - f) * gap * gap;
        let x = OpinionProfile::new(vec![0.0, gap]).unwrap();
        let p = params(v, f, 2);
        assert_eq!(best_window(&p, &x, 0), vec![1]);
        assert_eq!(best_window(&p, &x, 1), vec![0]);
    }

    #[test]
    fn three_agents_dense_and_sparse() {
        let x = uniform_grid(3).unwrap();
        let g = form_network(&params(1.0, 0.5, 3), &x);
        assert!(g.is_complete());
        let g = form_network(&params(1e-9, 0.5, 3), &x);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn equal_opinions_give_complete_graph() {
        let x = OpinionProfile::new(vec![0.4; 6]).unwrap();
        assert!(form_network(&params(1e-6, 0.3, 6), &x).is_complete());
    }

    #[test]
    fn wide_gaps_give_empty_graph() {
        let p = params(0.01, 0.5, 4);
        // xi = 0.2
        let x = OpinionProfile::new(vec![0.0, 0.21, 0.43, 0.7]).unwrap();
        assert_eq!(form_network(&p, &x).edge_count(), 0);
    }

    #[test]
    fn matches_direct_payoff_evaluation() {
        let p = params(0.02, 0.4, 9);
        let x = OpinionProfile::new(vec![0.0, 0.05, 0.1, 0.3, 0.32, 0.5, 0.8, 0.81, 1.0]).unwrap();
        for i in 0..9 {
            let chosen = best_window(&p, &x, i);
            let chosen_payoff = anticipated_payoff(&p, &chosen, &x, i).unwrap();
            let others: Vec<usize> = (0..9).filter(|&j| j != i).collect();
            for lo in 0..others.len() {
                for hi in lo..others.len() {
                    let w = &others[lo..=hi];
                    assert!(anticipated_payoff(&p, w, &x, i).unwrap() <= chosen_payoff + 1e-12);
                }
            }
        }
    }

    #[test]
    fn pruning_matches_full_search() {
        let p = params(0.02, 0.5, 101);
        let x = uniform_grid(101).unwrap();
        let full = form_network_with(&p, &x, &FormationOptions::default());
        let pruned = form_network_with(&p, &x, &FormationOptions::pruned_for(&p));
        assert_eq!(full, pruned);
        // A cap that binds everywhere still falls back to the exact answer.
        let tight = FormationOptions { max_width: Some(3), parallel: false };
        assert_eq!(full, form_network_with(&p, &x, &tight));
    }

    #[test]
    fn formation_is_ordered() {
        let p = params(0.0350916, 0.5, 101);
        let g = form_network(&p, &uniform_grid(101).unwrap());
        assert!(g.is_windowed());
        assert!(g.has_monotone_windows());
    }
}
