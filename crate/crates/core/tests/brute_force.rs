use std::collections::BTreeSet;

use endonet::distributions::uniform_grid;
use endonet::network::{best_window_for, form_network_with, FormationOptions};
use endonet::sweep::linspace;
use endonet::rational::{enumerate_equilibria_in, RationalInstance, StrategySpace};
use endonet::{ModelParams, OpinionProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Anticipated payoff of linking to `peers`, written out from scratch:
/// dV - f * sum of squared gaps + f^2 * (sum of gaps)^2 / d.
fn oracle_payoff(v: f64, f: f64, x: &[f64], i: usize, peers: &[usize]) -> f64 {
    if peers.is_empty() {
        return 0.0;
    }
    let d = peers.len() as f64;
    let s: f64 = peers.iter().map(|&j| x[j] - x[i]).sum();
    let q: f64 = peers.iter().map(|&j| (x[j] - x[i]).powi(2)).sum();
    d * v - f * q + f * f * s * s / d
}

fn subsets(n: usize, i: usize) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    (0u32..1 << others.len()).map(|m| (0..others.len()).filter(|&k| m >> k & 1 == 1).map(|k| others[k]).collect()).collect()
}

fn random_profile(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    x.sort_by(f64::total_cmp);
    x
}

#[test]
fn best_window_matches_exhaustive_subsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut decided = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let x = random_profile(&mut rng, n);
        let v = rng.random_range(0.0..0.1);
        let f = rng.random_range(0.02..0.98);
        for i in 0..n {
            let mut scored: Vec<(f64, Vec<usize>)> = subsets(n, i).into_iter().map(|s| (oracle_payoff(v, f, &x, i, &s), s)).collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            let got = best_window_for(v, f, &x, i, None);
            let got_payoff = oracle_payoff(v, f, &x, i, &got);
            let (top, ref top_set) = scored[0];
            assert!(
                (got_payoff - top).abs() <= 1e-12 * top.abs().max(1.0),
                "n={n} i={i} v={v} f={f}: window {got:?} pays {got_payoff}, subset {top_set:?} pays {top}"
            );
            let clear = scored.len() < 2 || top - scored[1].0 > 1e-9;
            if clear {
                assert_eq!(&got, top_set, "n={n} i={i} v={v} f={f}");
                decided += 1;
            }
        }
    }
    assert!(decided > 300, "too few unambiguous optima: {decided}");
}

#[test]
fn pruned_formation_matches_full_search_on_uniform_grids() {
    let x = uniform_grid(81).unwrap();
    for f in linspace((0.05, 0.95), 10) {
        for v in linspace((0.002, 0.2), 10) {
            let params = ModelParams::new(v, f, 81, 1).unwrap();
            let full = form_network_with(&params, &x, &FormationOptions::default());
            let pruned = form_network_with(&params, &x, &FormationOptions::pruned_for(&params));
            assert_eq!(full, pruned, "f={f} v={v}");
        }
    }
}

fn equilibrium_set(instance: &RationalInstance, space: StrategySpace) -> BTreeSet<Vec<Vec<usize>>> {
    enumerate_equilibria_in(instance, space).unwrap().into_iter().map(|e| e.graph.rows().to_vec()).collect()
}

#[test]
fn window_equilibria_match_all_subset_equilibria() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    for _ in 0..40 {
        let n = rng.random_range(2..=4);
        let theta = OpinionProfile::new(random_profile(&mut rng, n)).unwrap();
        let v = rng.random_range(0.0..0.1);
        let f = rng.random_range(0.05..0.95);
        let instance = RationalInstance::homogeneous(theta, f, v).unwrap();
        let windows = equilibrium_set(&instance, StrategySpace::Windows);
        let all = equilibrium_set(&instance, StrategySpace::AllSubsets);
        assert_eq!(windows, all, "theta={:?} v={v} f={f}", instance.theta.values());
    }
}
