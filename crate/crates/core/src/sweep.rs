//! Phase diagrams: one dynamics run per `(f, V)` grid cell.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::graph::{directed_diameter, weak_components, Diameter};
use crate::dynamics::{classify_lenient, run_with, Classification, RunOptions, Termination, UpdateRule};
use crate::error::{Error, Result};
use crate::model::{ModelParams, OpinionProfile};
use crate::network::{form_network_with, FormationOptions};

pub const CSV_HEADER: &str = "f,V,diameter_t1,components_final,classification,steps_to_steady,consensus_value";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n: usize,
    pub max_steps: usize,
    pub f_range: (f64, f64),
    pub v_range: (f64, f64),
    /// Grid points along `f` and along `V`, endpoints included.
    pub dims: (usize, usize),
    pub initial: OpinionProfile,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub update: UpdateRule,
    /// Cap window widths during formation (exact thanks to the fallback search).
    pub pruning: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let (nf, nv) = self.dims;
        if nf < 2 || nv < 2 {
            return Err(Error::InvalidParams(format!("grid {nf}x{nv} must be at least 2x2")));
        }
        let (f0, f1) = self.f_range;
        if !(f0 > 0.0 && f1 < 1.0 && f0 <= f1) {
            return Err(Error::InvalidParams(format!("f range [{f0}, {f1}] must lie in (0, 1)")));
        }
        let (v0, v1) = self.v_range;
        if !(v0 >= 0.0 && v1 <= 0.5 && v0 <= v1) {
            return Err(Error::InvalidParams(format!("V range [{v0}, {v1}] must lie in [0, 0.5]")));
        }
        if self.initial.len() != self.n {
            return Err(Error::InvalidParams(format!("initial profile has {} agents, n = {}", self.initial.len(), self.n)));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidParams("jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn f_values(&self) -> Vec<f64> {
        linspace(self.f_range, self.dims.0)
    }

    pub fn v_values(&self) -> Vec<f64> {
        linspace(self.v_range, self.dims.1)
    }
}

pub fn linspace((lo, hi): (f64, f64), k: usize) -> Vec<f64> {
    (0..k).map(|i| if i + 1 == k { hi } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub f: f64,
    pub v: f64,
    pub diameter_t1: Option<Diameter>,
    pub components_final: Option<usize>,
    pub classification: Option<Classification>,
    /// Steps until the steady state; `None` when the horizon was reached.
    pub steps_to_steady: Option<usize>,
    /// Common limit opinion when the run ends in one component.
    pub consensus_value: Option<f64>,
    pub error: Option<String>,
}

fn run_cell(cfg: &SweepConfig, f: f64, v: f64) -> SweepCell {
    let mut cell = SweepCell {
        f,
        v,
        diameter_t1: None,
        components_final: None,
        classification: None,
        steps_to_steady: None,
        consensus_value: None,
        error: None,
    };
    let outcome = (|| {
        let params = ModelParams::new(v, f, cfg.n, cfg.max_steps)?;
        let formation = if cfg.pruning {
            FormationOptions { parallel: false, ..FormationOptions::pruned_for(&params) }
        } else {
            FormationOptions::default()
        };
        let opts = RunOptions { record_graphs: false, formation, early_exit: true, update: cfg.update };
        let g1 = form_network_with(&params, &cfg.initial, &formation);
        let tr = run_with(&params, &cfg.initial, &opts)?;
        Ok::<_, Error>((tr, directed_diameter(&g1)))
    })();
    match outcome {
        Ok((tr, d1)) => {
            let components = weak_components(&tr.final_graph);
            cell.diameter_t1 = Some(d1);
            cell.components_final = Some(components.len());
            cell.classification = Some(classify_lenient(&tr));
            cell.steps_to_steady = (tr.termination == Termination::SteadyState).then_some(tr.steps.len());
            if components.len() == 1 {
                cell.consensus_value = Some(tr.final_opinions().mean());
            }
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

/// Runs every cell, `f`-major. Output order and content do not depend on the
/// number of workers.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    cfg.validate()?;
    let grid: Vec<(f64, f64)> = cfg.f_values().into_iter().flat_map(|f| cfg.v_values().into_iter().map(move |v| (f, v))).collect();
    let work = || grid.par_iter().map(|&(f, v)| run_cell(cfg, f, v)).collect();
    match cfg.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::InvalidParams(format!("cannot start {jobs} workers: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Shortest representation that parses back to the same double.
pub fn format_real(x: f64) -> String {
    format!("{x:?}")
}

pub fn to_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in cells {
        let opt = |s: Option<String>| s.unwrap_or_default();
        let classification = match (&c.error, c.classification) {
            (Some(_), _) => "error".to_string(),
            (None, cls) => opt(cls.map(|k| k.to_string())),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_real(c.f),
            format_real(c.v),
            opt(c.diameter_t1.map(|d| d.to_string())),
            opt(c.components_final.map(|k| k.to_string())),
            classification,
            c.steps_to_steady.map_or("horizon".to_string(), |s| s.to_string()),
            opt(c.consensus_value.map(format_real)),
        );
    }
    out
}
