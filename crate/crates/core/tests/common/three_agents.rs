//! Three agents at 0, 1/2, 1 with f = 1/3, for V between 1/32 and 3/64.
//! Lists, per V, every Nash network over windows and whether the two
//! mirror-image pair networks are among them.

use std::fmt::Write as _;
use std::path::PathBuf;

use endonet::rational::{enumerate_equilibria, RationalInstance};
use endonet::OpinionProfile;

pub fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/three_agents.csv")
}

fn rows_label(rows: &[Vec<usize>]) -> String {
    rows.iter().map(|r| r.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")).collect::<Vec<_>>().join("|")
}

pub fn report() -> String {
    let left = vec![vec![1], vec![0], vec![]];
    let right = vec![vec![], vec![2], vec![1]];
    let (lo, hi) = (1.0 / 32.0, 3.0 / 64.0);
    let mut out = String::from("v,equilibria,left_pair,right_pair,networks\n");
    for k in 0..20 {
        let v = lo + (hi - lo) * (k as f64 + 0.5) / 20.0;
        let theta = OpinionProfile::new(vec![0.0, 0.5, 1.0]).unwrap();
        let instance = RationalInstance::homogeneous(theta, 1.0 / 3.0, v).unwrap();
        let eqs = enumerate_equilibria(&instance).unwrap();
        let has = |rows: &Vec<Vec<usize>>| eqs.iter().any(|e| e.graph.rows() == rows.as_slice());
        let networks: Vec<String> = eqs.iter().map(|e| rows_label(e.graph.rows())).collect();
        let _ = writeln!(out, "{v:?},{},{},{},{}", eqs.len(), has(&left), has(&right), networks.join(";"));
    }
    out
}
