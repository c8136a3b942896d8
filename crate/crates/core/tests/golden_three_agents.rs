//! Golden report for three agents at 0, 1/2, 1 with f = 1/3. Regenerate with
//! `UPDATE_GOLDEN=1 cargo test -p endonet-core --test golden_three_agents`.

mod common;

use common::three_agents::{golden_path, report};
use endonet::model::PeerGraph;
use endonet::rational::{solve_given_network, RationalInstance};
use endonet::OpinionProfile;

#[test]
fn matches_golden_report() {
    let got = report();
    let path = golden_path();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file missing; run with UPDATE_GOLDEN=1");
    assert_eq!(got, want);
}

#[test]
fn mutual_pair_solves_to_eighth_and_three_eighths() {
    let theta = OpinionProfile::new(vec![0.0, 0.5]).unwrap();
    let instance = RationalInstance::homogeneous(theta, 1.0 / 3.0, 0.04).unwrap();
    let g = PeerGraph::from_rows(vec![vec![1], vec![0]]).unwrap();
    let x = solve_given_network(&instance, &g).unwrap();
    assert!((x[0] - 0.125).abs() <= 1e-12 && (x[1] - 0.375).abs() <= 1e-12, "{x:?}");
}

#[test]
fn chain_with_isolated_end_matches_hand_solution() {
    let theta = OpinionProfile::new(vec![0.0, 0.5, 1.0]).unwrap();
    let instance = RationalInstance::homogeneous(theta, 1.0 / 3.0, 0.04).unwrap();
    let g = PeerGraph::from_rows(vec![vec![1], vec![0, 2], vec![]]).unwrap();
    let x = solve_given_network(&instance, &g).unwrap();
    let want = [3.0 / 17.0, 9.0 / 17.0, 1.0];
    for (a, b) in x.iter().zip(want) {
        assert!((a - b).abs() <= 1e-12, "{x:?}");
    }
}
