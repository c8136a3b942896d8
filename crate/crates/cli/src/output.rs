use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use endonet::analysis::{directed_diameter, esteban_ray, second_eigenvalue_modulus, weak_components, Diameter, HearingMatrix, PolarizationParams};
use endonet::dynamics::Trajectory;
use endonet::sweep::format_real;
use endonet::PeerGraph;
use serde::Serialize;

/// Per-step summary. Graph fields are absent at `t = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct StepMetrics {
    pub t: usize,
    pub diameter: Option<Diameter>,
    pub components: Option<usize>,
    pub edges: Option<usize>,
    pub lambda2: Option<f64>,
    /// One value per configured alpha.
    pub polarization: Vec<f64>,
}

/// `spectral` is the flexibility for the hearing matrix; `None` skips it.
pub fn step_metrics(tr: &Trajectory, polar: &[PolarizationParams], spectral: Option<f64>) -> Vec<StepMetrics> {
    let graph_metrics = |g: &PeerGraph| {
        let lambda2 = spectral.and_then(|f| second_eigenvalue_modulus(&HearingMatrix::from_graph(g, f)).ok());
        (directed_diameter(g), weak_components(g).len(), g.edge_count(), lambda2)
    };
    tr.profiles()
        .enumerate()
        .map(|(t, x)| {
            let polarization = polar.iter().map(|p| esteban_ray(x.values(), p)).collect();
            let g = tr.graph_at(t);
            let m = g.map(graph_metrics);
            StepMetrics {
                t,
                diameter: m.map(|m| m.0),
                components: m.map(|m| m.1),
                edges: m.map(|m| m.2),
                lambda2: m.and_then(|m| m.3),
                polarization,
            }
        })
        .collect()
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t,agent,opinion\n");
    for (t, x) in tr.profiles().enumerate() {
        for (i, v) in x.values().iter().enumerate() {
            let _ = writeln!(out, "{t},{i},{}", format_real(*v));
        }
    }
    out
}

pub fn edges_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t,src,dst\n");
    for s in &tr.steps {
        if let Some(g) = &s.graph {
            for (i, j) in g.edges() {
                let _ = writeln!(out, "{},{i},{j}", s.t);
            }
        }
    }
    out
}

pub fn polarization_csv(alphas: &[f64], rows: impl IntoIterator<Item = (usize, Vec<f64>)>) -> String {
    let mut out = String::from("t");
    for a in alphas {
        let _ = write!(out, ",P_alpha_{}", format_real(*a));
    }
    out.push('\n');
    for (t, values) in rows {
        let _ = write!(out, "{t}");
        for v in values {
            let _ = write!(out, ",{}", format_real(v));
        }
        out.push('\n');
    }
    out
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).context("serializing record")?;
    s.push('\n');
    write(dir, name, &s)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
