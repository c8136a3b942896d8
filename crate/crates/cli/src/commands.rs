use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use endonet::analysis::{esteban_ray, threshold_phi, threshold_xi, PolarizationParams};
use endonet::distributions::{bimodal, piecewise_normal_with_construction, uniform_grid, VARIANCE_TOLERANCE};
use endonet::dynamics::{
    non_monotone_agents, run_with, Classification, RunOptions, Trajectory, UpdateRule, DISTINCT_TOLERANCE, MONOTONE_TOLERANCE,
    STEADY_TOLERANCE,
};
use endonet::hk::{clusters, hk_run, EPS_SLACK, HK_STEADY_TOLERANCE};
use endonet::model::SOLVE_TOLERANCE;
use endonet::network::{FormationOptions, TIE_BREAK_RULE, TIE_TOLERANCE};
use endonet::rational::{
    compare_myopic, component_lower_bound, enumerate_equilibria_in, is_nash, solve_given_network, RationalInstance, StrategySpace,
};
use endonet::sweep::{run_sweep, to_csv, SweepConfig};
use endonet::{ModelParams, OpinionProfile, PeerGraph};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{edges_csv, ensure_dir, polarization_csv, step_metrics, trajectory_csv, write, write_json, StepMetrics};
use crate::plot::{heatmap_svg, trajectory_svg};
use crate::{AnalyzeArgs, CliError, Dist, HkArgs, InitialArgs, RationalArgs, SimulateArgs, SweepArgs};

type CmdResult = Result<(), CliError>;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Initial profile plus a description of how it was generated.
fn initial_profile(a: &InitialArgs, n: usize) -> Result<(OpinionProfile, Value), CliError> {
    match a.dist {
        Dist::Uniform => Ok((uniform_grid(n).map_err(usage)?, json!({ "name": "uniform", "n": n, "grid": "i / (n - 1)" }))),
        Dist::Normal => {
            let (x, c) = piecewise_normal_with_construction(n, a.variance).map_err(usage)?;
            let meta = json!({
                "name": "normal",
                "n": n,
                "target_variance": a.variance,
                "variance_tolerance": VARIANCE_TOLERANCE,
                "construction": c,
            });
            Ok((x, meta))
        }
        Dist::Bimodal => {
            let x = bimodal(n, a.mode_gap, a.mode_width).map_err(usage)?;
            Ok((x, json!({ "name": "bimodal", "n": n, "mode_gap": a.mode_gap, "mode_width": a.mode_width })))
        }
    }
}

fn polarization_params(alphas: &[f64], segments: usize) -> Result<Vec<PolarizationParams>, CliError> {
    alphas.iter().map(|&a| PolarizationParams::new(1.0, a, segments).map_err(usage)).collect()
}

fn metadata(update: Option<UpdateRule>, generator: Value) -> Value {
    json!({
        "tie_break_rule": TIE_BREAK_RULE,
        "update_rule": update.map(UpdateRule::as_str),
        "tolerances": {
            "tie": TIE_TOLERANCE,
            "within_period_residual": SOLVE_TOLERANCE,
            "steady_state": STEADY_TOLERANCE,
            "monotone": MONOTONE_TOLERANCE,
            "distinct_limits": DISTINCT_TOLERANCE,
            "hk_eps_slack": EPS_SLACK,
            "hk_steady_state": HK_STEADY_TOLERANCE,
        },
        "generator": generator,
        "polarization_k": 1.0,
    })
}

#[derive(Serialize)]
struct RunRecord<'a, F: Serialize> {
    model: &'static str,
    flags: &'a F,
    params: ModelParams,
    metadata: Value,
    termination: endonet::dynamics::Termination,
    classification: Option<Classification>,
    steps: usize,
    final_components: usize,
    consensus_value: Option<f64>,
    limit_opinions: Vec<f64>,
    non_monotone_agents: usize,
    alphas: Vec<f64>,
    metrics: Vec<StepMetrics>,
    /// Opinions for `t = 0, 1, ...`.
    trajectory: Vec<&'a [f64]>,
}

fn record<'a, F: Serialize>(model: &'static str, flags: &'a F, tr: &'a Trajectory, metadata: Value, alphas: &[f64], metrics: Vec<StepMetrics>) -> RunRecord<'a, F> {
    let components = tr.final_components().len();
    RunRecord {
        model,
        flags,
        params: tr.params,
        metadata,
        termination: tr.termination,
        classification: tr.classification,
        steps: tr.steps.len(),
        final_components: components,
        consensus_value: (components == 1).then(|| tr.final_opinions().mean()),
        limit_opinions: tr.limit_opinions(),
        non_monotone_agents: non_monotone_agents(tr).len(),
        alphas: alphas.to_vec(),
        metrics,
        trajectory: tr.profiles().map(|p| p.values()).collect(),
    }
}

fn write_trajectory_files(out: &Path, tr: &Trajectory, edges: bool, plot: bool, title: &str) -> anyhow::Result<()> {
    write(out, "trajectory.csv", &trajectory_csv(tr))?;
    if edges {
        write(out, "edges.csv", &edges_csv(tr))?;
    }
    if plot {
        let profiles: Vec<&[f64]> = tr.profiles().map(|p| p.values()).collect();
        write(out, "trajectory.svg", &trajectory_svg(&profiles, title))?;
    }
    Ok(())
}

fn summary_line(tr: &Trajectory) -> String {
    let cls = tr.classification.map_or("unterminated", Classification::as_str);
    let limits = tr.limit_opinions();
    let mut distinct: Vec<f64> = Vec::new();
    for v in limits {
        if distinct.last().is_none_or(|&u| (v - u).abs() > DISTINCT_TOLERANCE) {
            distinct.push(v);
        }
    }
    let shown: Vec<String> = distinct.iter().map(|v| format!("{v:.6}")).collect();
    format!("{cls}: {} steps, {} component(s), limits [{}]", tr.steps.len(), tr.final_components().len(), shown.join(", "))
}

pub fn simulate(a: &SimulateArgs) -> CmdResult {
    let n = a.initial.n.unwrap_or(101);
    let params = ModelParams::new(a.v, a.f, n, a.steps).map_err(usage)?;
    let (initial, generator) = initial_profile(&a.initial, n)?;
    let polar = polarization_params(&a.alpha, a.segments)?;
    let update: UpdateRule = a.update.into();
    let opts = RunOptions { record_graphs: true, formation: FormationOptions::default(), early_exit: false, update };
    let tr = run_with(&params, &initial, &opts).map_err(|e| anyhow!(e))?;
    let metrics = step_metrics(&tr, &polar, Some(a.f));
    ensure_dir(&a.out)?;
    write_json(&a.out, "run.json", &record("strategic", a, &tr, metadata(Some(update), generator), &a.alpha, metrics))?;
    let title = format!("n = {n}, f = {}, V = {}", a.f, a.v);
    write_trajectory_files(&a.out, &tr, a.edges, a.plot, &title)?;
    println!("{}", summary_line(&tr));
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> CmdResult {
    let n = a.initial.n.unwrap_or(81);
    let (initial, generator) = initial_profile(&a.initial, n)?;
    let cfg = SweepConfig {
        n,
        max_steps: a.steps,
        f_range: (a.f_range[0], a.f_range[1]),
        v_range: (a.v_range[0], a.v_range[1]),
        dims: a.grid,
        initial,
        jobs: a.jobs,
        update: a.update.into(),
        pruning: !a.no_pruning,
    };
    cfg.validate().map_err(usage)?;
    if a.steps == 0 {
        return Err(usage("steps must be positive"));
    }
    let cells = run_sweep(&cfg).map_err(|e| anyhow!(e))?;
    ensure_dir(&a.out)?;
    write(&a.out, "grid.csv", &to_csv(&cells))?;
    write_json(&a.out, "sweep.json", &json!({ "flags": a, "metadata": metadata(Some(cfg.update), generator) }))?;
    if a.plot {
        let title = format!("period-1 diameter, n = {n}, T = {}", a.steps);
        write(&a.out, "heatmap.svg", &heatmap_svg(&cells, &cfg.f_values(), &cfg.v_values(), &title))?;
    }
    let failed = cells.iter().filter(|c| c.error.is_some()).count();
    let split = cells.iter().filter(|c| c.components_final.is_some_and(|k| k >= 2)).count();
    println!("{} cells, {split} with several final components, {failed} failed", cells.len());
    Ok(())
}

pub fn hk(a: &HkArgs) -> CmdResult {
    let n = a.initial.n.unwrap_or(101);
    ModelParams::new(0.0, a.f, n, a.steps).map_err(usage)?;
    if !(a.eps >= 0.0) {
        return Err(usage(format!("eps = {} must be nonnegative", a.eps)));
    }
    let (initial, generator) = initial_profile(&a.initial, n)?;
    let polar = polarization_params(&a.alpha, a.segments)?;
    let tr = hk_run(a.f, a.eps, &initial, a.steps).map_err(|e| anyhow!(e))?;
    let metrics = step_metrics(&tr, &polar, None);
    ensure_dir(&a.out)?;
    write_json(&a.out, "run.json", &record("hk", a, &tr, metadata(None, generator), &a.alpha, metrics))?;
    let title = format!("bounded confidence, n = {n}, f = {}, eps = {}", a.f, a.eps);
    write_trajectory_files(&a.out, &tr, a.edges, a.plot, &title)?;
    if let Some(g) = tr.graph_at(1) {
        let max = (0..n).map(|i| g.degree(i)).max().unwrap_or(0);
        println!("step 1: extreme degree {}, max degree {max}", g.degree(0).max(g.degree(n - 1)));
    }
    let final_clusters = clusters(tr.final_opinions().values(), DISTINCT_TOLERANCE);
    println!("{} steps, {final_clusters} cluster(s)", tr.steps.len());
    Ok(())
}

fn rows_text(g: &PeerGraph) -> String {
    let rows: Vec<String> =
        g.rows().iter().map(|r| format!("[{}]", r.iter().map(usize::to_string).collect::<Vec<_>>().join(","))).collect();
    rows.join(" ")
}

pub fn rational(a: &RationalArgs) -> CmdResult {
    let theta = OpinionProfile::new(a.theta.clone()).map_err(usage)?;
    let n = theta.len();
    let instance = match a.f.as_slice() {
        [f] => RationalInstance::homogeneous(theta, *f, a.v),
        fs => RationalInstance::new(theta, fs.to_vec(), a.v),
    }
    .map_err(usage)?;
    let space = if a.all_subsets { StrategySpace::AllSubsets } else { StrategySpace::Windows };
    let mut report = json!({
        "flags": a,
        "phi": instance.f_vec.iter().map(|&f| {
            let p = ModelParams { v: a.v, f, n, max_steps: 1 };
            json!({ "xi": threshold_xi(&p), "phi": threshold_phi(&p) })
        }).collect::<Vec<_>>(),
        "component_lower_bound": component_lower_bound(&instance),
    });
    println!("component lower bound: {}", component_lower_bound(&instance));
    if a.enumerate {
        let eqs = enumerate_equilibria_in(&instance, space).map_err(usage)?;
        println!("{} equilibri{}", eqs.len(), if eqs.len() == 1 { "um" } else { "a" });
        for (k, e) in eqs.iter().enumerate() {
            let x: Vec<String> = e.opinions.iter().map(|v| format!("{v:.6}")).collect();
            println!("  {k}: peers {}  opinions ({})", rows_text(&e.graph), x.join(", "));
        }
        report["equilibria"] = serde_json::to_value(&eqs).context("serializing equilibria")?;
        if space == StrategySpace::Windows {
            report["myopic"] = serde_json::to_value(compare_myopic(&instance).map_err(|e| anyhow!(e))?).context("serializing")?;
        }
    } else {
        let cmp_rows = (0..n)
            .map(|i| endonet::network::best_window_for(a.v, instance.f_vec[i], instance.theta.values(), i, None))
            .collect();
        let myopic = PeerGraph::from_rows(cmp_rows).map_err(|e| anyhow!(e))?;
        let verdict = is_nash(&instance, &myopic).map_err(usage)?;
        let x = solve_given_network(&instance, &myopic).map_err(|e| anyhow!(e))?;
        println!("myopic network {} is {}a Nash equilibrium", rows_text(&myopic), if verdict.is_nash { "" } else { "not " });
        report["myopic"] = json!({ "graph": myopic, "opinions": x, "nash": verdict });
    }
    ensure_dir(&a.out)?;
    write_json(&a.out, "rational.json", &report)?;
    Ok(())
}

pub fn analyze(a: &AnalyzeArgs) -> CmdResult {
    let text = fs::read_to_string(&a.run).with_context(|| format!("reading {}", a.run.display()))?;
    let run: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.run.display()))?;
    let trajectory: Vec<Vec<f64>> = serde_json::from_value(run.get("trajectory").cloned().ok_or_else(|| anyhow!("run file has no trajectory"))?)
        .context("reading trajectory")?;
    let polar = polarization_params(&a.alpha, a.segments)?;
    let out = match &a.out {
        Some(dir) => dir.clone(),
        None => a.run.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let last = trajectory.last().ok_or_else(|| anyhow!("empty trajectory"))?;
    println!(
        "{} periods, final spread {:.6}, {} opinion cluster(s)",
        trajectory.len() - 1,
        last.iter().copied().fold(f64::NEG_INFINITY, f64::max) - last.iter().copied().fold(f64::INFINITY, f64::min),
        clusters(last, DISTINCT_TOLERANCE)
    );
    if a.polarization {
        let rows = trajectory.iter().enumerate().map(|(t, x)| (t, polar.iter().map(|p| esteban_ray(x, p)).collect()));
        ensure_dir(&out)?;
        write(&out, "polarization.csv", &polarization_csv(&a.alpha, rows))?;
    }
    Ok(())
}
