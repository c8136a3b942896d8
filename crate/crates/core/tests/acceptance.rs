//! Acceptance report: one PASS/FAIL line per criterion, plus `info` lines for
//! the alternative opinion rule and for numbers worth seeing. Always exits 0;
//! the summary line counts the failures.

mod common;

use std::time::Instant;

use endonet::analysis::graph::refines;
use endonet::analysis::{
    directed_diameter, esteban_ray, predicted_diameter, second_eigenvalue_modulus, weak_components, Diameter, HearingMatrix,
    PolarizationParams,
};
use endonet::analysis::thresholds::{consensus_boundary, divergence_boundary};
use endonet::distributions::uniform_grid;
use endonet::dynamics::{classify_lenient, non_monotone_agents, run_with, Classification, RunOptions, Trajectory, UpdateRule};
use endonet::hk::{clusters, hk_graph, hk_run};
use endonet::model::{best_response_residual, SOLVE_TOLERANCE};
use endonet::network::{best_window_for, form_network, form_network_with, FormationOptions};
use endonet::rational::{enumerate_equilibria_in, solve_given_network, RationalInstance, StrategySpace};
use endonet::sweep::{run_sweep, SweepCell, SweepConfig};
use endonet::{ModelParams, OpinionProfile, PeerGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N_FIG1: usize = 101;
const F_FIG1: f64 = 0.5;
const V_SPLIT: f64 = 0.0350916;
const V_MERGE: f64 = 0.0350917;
const RULES: [UpdateRule; 2] = [UpdateRule::Hearing, UpdateRule::Equilibrium];

#[derive(Default)]
struct Report {
    passed: usize,
    failed: Vec<usize>,
}

impl Report {
    fn verdict(&mut self, id: usize, name: &str, ok: bool, detail: &str) {
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(id);
        }
        println!("{} {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn info(detail: &str) {
    println!("     info {detail}");
}

fn fig1_run(v: f64, update: UpdateRule) -> Trajectory {
    let params = ModelParams::new(v, F_FIG1, N_FIG1, 200).unwrap();
    let opts = RunOptions { update, ..RunOptions::default() };
    run_with(&params, &uniform_grid(N_FIG1).unwrap(), &opts).unwrap()
}

fn splits(tr: &Trajectory) -> bool {
    tr.final_components().len() >= 2
}

/// Bracket `[lo, hi]` of width at most 1e-7 with a split at `lo` and none at `hi`.
fn bisect_split(update: UpdateRule, mut lo: f64, mut hi: f64) -> Option<(f64, f64)> {
    if !splits(&fig1_run(lo, update)) || splits(&fig1_run(hi, update)) {
        return None;
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if splits(&fig1_run(mid, update)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

fn describe(tr: &Trajectory) -> String {
    let limit = tr.limit_opinions();
    format!(
        "{} after {} steps, {} component(s), mean limit {:.7}, {} reversing agent(s)",
        classify_lenient(tr),
        tr.steps.len(),
        tr.final_components().len(),
        limit.iter().sum::<f64>() / limit.len() as f64,
        non_monotone_agents(tr).len()
    )
}

fn graphs(tr: &Trajectory) -> Vec<&PeerGraph> {
    tr.steps.iter().map(|s| s.graph.as_ref().unwrap()).collect()
}

/// First period from which the graph never changes again.
fn frozen_from(tr: &Trajectory) -> usize {
    let g = graphs(tr);
    let mut t = g.len();
    while t > 1 && g[t - 2] == g[t - 1] {
        t -= 1;
    }
    t
}

/// Period at which the graph first becomes complete, and the length of the
/// run of identical graphs just before it.
fn plateau_then_complete(tr: &Trajectory) -> Option<(usize, usize)> {
    let g = graphs(tr);
    let k = g.iter().position(|g| g.is_complete())?;
    if k == 0 || g[k..].iter().any(|g| !g.is_complete()) {
        return None;
    }
    let mut start = k - 1;
    while start > 0 && g[start - 1] == g[k - 1] {
        start -= 1;
    }
    Some((k + 1, k - start))
}

fn criterion_1(report: &mut Report) -> Option<(f64, f64)> {
    let mut bracket = None;
    for update in RULES {
        let low = fig1_run(V_SPLIT, update);
        let high = fig1_run(V_MERGE, update);
        let low_ok = classify_lenient(&low) == Classification::PersistentDisagreement && low.final_components().len() == 2;
        let high_limit = high.limit_opinions();
        let high_ok = high.final_components().len() == 1
            && (high_limit[0] - 0.5).abs() <= 1e-6
            && !non_monotone_agents(&high).is_empty();
        let literal = low_ok && high_ok;
        let found = bisect_split(update, 0.034, 0.036);
        let fallback = found.is_some_and(|(lo, hi)| {
            classify_lenient(&fig1_run(lo, update)) == Classification::PersistentDisagreement
                && classify_lenient(&fig1_run(hi, update)) == Classification::TemporaryDisagreement
        });
        let detail = format!(
            "[{} rule] V={V_SPLIT}: {}; V={V_MERGE}: {}; literal {}; V* {}",
            update.as_str(),
            describe(&low),
            describe(&high),
            if literal { "holds" } else { "fails" },
            match found {
                Some((lo, hi)) => format!("in [{lo:.9}, {hi:.9}] ({})", if fallback { "split below, temporary above" } else { "wrong classes" }),
                None => "not bracketed in [0.034, 0.036]".into(),
            }
        );
        if update == UpdateRule::Hearing {
            bracket = found;
            report.verdict(1, "regime split", literal || fallback, &detail);
        } else {
            info(&detail);
        }
    }
    bracket
}

fn criterion_2_3(report: &mut Report, bracket: Option<(f64, f64)>) {
    let v_split = bracket.map_or(V_SPLIT, |b| b.0);
    let split = fig1_run(v_split, UpdateRule::Hearing);
    let merge = fig1_run(V_MERGE, UpdateRule::Hearing);
    let frozen = frozen_from(&split);
    let jump = plateau_then_complete(&merge);
    let ok = frozen == 6 && splits(&split) && jump.is_some_and(|(_, len)| (20..=35).contains(&len));
    report.verdict(
        2,
        "network structure",
        ok,
        &format!(
            "split run (V={v_split:.9}) frozen from period {frozen}; consensus run (V={V_MERGE}) {}",
            match jump {
                Some((t, len)) => format!("holds one graph for {len} periods, complete at period {t}"),
                None => "never jumps to the complete graph".into(),
            }
        ),
    );

    let lambda: Vec<f64> =
        graphs(&merge).iter().map(|g| second_eigenvalue_modulus(&HearingMatrix::from_graph(g, F_FIG1)).unwrap()).collect();
    let expected = (1.0 - F_FIG1) - F_FIG1 / (N_FIG1 - 1) as f64;
    let last = *lambda.last().unwrap();
    let peak = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let peak_at = lambda.iter().position(|&l| l == peak).unwrap();
    let complete_at = jump.map_or(lambda.len(), |(t, _)| t - 1);
    let ok = (last - expected).abs() <= 1e-8 && peak > lambda[0] + 1e-6 && peak_at < complete_at && peak > last + 1e-6;
    report.verdict(
        3,
        "spectral trajectory",
        ok,
        &format!(
            "|lambda2| starts {:.4}, peaks {peak:.4} at period {}, ends {last:.10} (complete-graph value {expected:.10})",
            lambda[0],
            peak_at + 1
        ),
    );
    info(&format!("the hearing matrix of a complete graph has 1 - f + f/n = {:.10}", 1.0 - F_FIG1 + F_FIG1 / N_FIG1 as f64));
}

fn pair_linked(v: f64, f: f64, gap: f64) -> (bool, bool) {
    let params = ModelParams::new(v, f, 2, 1).unwrap();
    let g = form_network(&params, &OpinionProfile::new(vec![0.0, gap]).unwrap());
    (g.has_edge(0, 1), g.has_edge(1, 0))
}

fn criterion_4(report: &mut Report, rng: &mut ChaCha8Rng) {
    let start = Instant::now();
    let mut wrong = 0;
    for _ in 0..1000 {
        let v: f64 = rng.random_range(1e-4..0.5);
        let f = rng.random_range(0.01..0.99);
        let gap = rng.random_range(1e-4..1.0);
        let xi = (v / (f * (1.0 - f))).sqrt();
        if (gap - xi).abs() > 1e-9 && pair_linked(v, f, gap) != (gap <= xi, gap <= xi) {
            wrong += 1;
        }
    }
    let mut equality_wrong = 0;
    for _ in 0..100 {
        let v: f64 = rng.random_range(1e-4..0.2);
        let f = rng.random_range(0.05..0.95);
        let xi = (v / (f * (1.0 - f))).sqrt();
        if pair_linked(v, f, xi) != (true, true) {
            equality_wrong += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report.verdict(
        4,
        "pair linking threshold",
        wrong == 0 && equality_wrong == 0 && secs < 1.0,
        &format!("{wrong}/1000 sampled triples and {equality_wrong}/100 gaps exactly at xi disagree; {secs:.3}s"),
    );
}

#[derive(Default, Debug)]
struct OrderViolations {
    order: usize,
    windowed: usize,
    monotone_windows: usize,
    irreversibility: usize,
    hull: usize,
    residual: usize,
}

impl OrderViolations {
    fn total(&self) -> usize {
        self.order + self.windowed + self.monotone_windows + self.irreversibility + self.hull + self.residual
    }
}

fn check_ordered_run(x0: Vec<f64>, v: f64, f: f64, update: UpdateRule, out: &mut OrderViolations) -> bool {
    let n = x0.len();
    let params = ModelParams::new(v, f, n, 30).unwrap();
    let initial = OpinionProfile::new(x0).unwrap();
    let opts = RunOptions { formation: FormationOptions::default(), update, ..RunOptions::default() };
    let tr = run_with(&params, &initial, &opts).unwrap();
    let before = out.total();
    let mut prev = initial;
    let mut prev_components: Option<Vec<Vec<usize>>> = None;
    for s in &tr.steps {
        let g = s.graph.as_ref().unwrap();
        let x = &s.opinions;
        out.order += usize::from(x.order_violation() > 1e-12);
        out.windowed += usize::from(!g.is_windowed());
        out.monotone_windows += usize::from(!g.has_monotone_windows());
        let components = weak_components(g);
        if let Some(p) = &prev_components {
            out.irreversibility += usize::from(!refines(&components, p));
        }
        let outside = components.iter().any(|c| {
            let lo = c.iter().map(|&i| prev[i]).fold(f64::INFINITY, f64::min);
            let hi = c.iter().map(|&i| prev[i]).fold(f64::NEG_INFINITY, f64::max);
            c.iter().any(|&i| x[i] < lo - 1e-12 || x[i] > hi + 1e-12)
        });
        out.hull += usize::from(outside);
        if update == UpdateRule::Equilibrium {
            let r = best_response_residual(g, &vec![f; n], x.values(), prev.values());
            out.residual += usize::from(r >= SOLVE_TOLERANCE);
        }
        prev = x.clone();
        prev_components = Some(components);
    }
    out.total() > before
}

fn criterion_5(report: &mut Report, rng: &mut ChaCha8Rng) {
    let cases: Vec<(Vec<f64>, f64, f64)> = (0..200)
        .map(|_| {
            let n = rng.random_range(2..=40);
            let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            x.sort_by(f64::total_cmp);
            (x, rng.random_range(0.0..0.1), rng.random_range(0.01..0.99))
        })
        .collect();
    for update in [UpdateRule::Equilibrium, UpdateRule::Hearing] {
        let mut all = OrderViolations::default();
        let mut low_f = OrderViolations::default();
        let mut bad_runs = 0;
        let mut lowest_bad_f = f64::INFINITY;
        for (x, v, f) in &cases {
            if check_ordered_run(x.clone(), *v, *f, update, &mut all) {
                bad_runs += 1;
                lowest_bad_f = lowest_bad_f.min(*f);
            }
            if *f <= 0.5 {
                check_ordered_run(x.clone(), *v, *f, update, &mut low_f);
            }
        }
        let detail = format!(
            "[{} rule] {bad_runs}/200 runs break an invariant (lowest such f = {lowest_bad_f:.3}); violating steps: {all:?}; at f <= 0.5: {} steps",
            update.as_str(),
            low_f.total()
        );
        if update == UpdateRule::Equilibrium {
            report.verdict(5, "ordered configurations", all.total() == 0, &detail);
        } else {
            info(&detail);
        }
    }
}

fn oracle_payoff(v: f64, f: f64, x: &[f64], i: usize, peers: &[usize]) -> f64 {
    if peers.is_empty() {
        return 0.0;
    }
    let d = peers.len() as f64;
    let s: f64 = peers.iter().map(|&j| x[j] - x[i]).sum();
    let q: f64 = peers.iter().map(|&j| (x[j] - x[i]).powi(2)).sum();
    d * v - f * q + f * f * s * s / d
}

fn criterion_6(report: &mut Report, rng: &mut ChaCha8Rng) {
    let mut worse = 0;
    let mut different = 0;
    let mut agents = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        x.sort_by(f64::total_cmp);
        let v = rng.random_range(0.0..0.1);
        let f = rng.random_range(0.02..0.98);
        for i in 0..n {
            agents += 1;
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let mut scored: Vec<(f64, Vec<usize>)> = (0u32..1 << others.len())
                .map(|m| {
                    let s: Vec<usize> = (0..others.len()).filter(|&k| m >> k & 1 == 1).map(|k| others[k]).collect();
                    (oracle_payoff(v, f, &x, i, &s), s)
                })
                .collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            let got = best_window_for(v, f, &x, i, None);
            let paid = oracle_payoff(v, f, &x, i, &got);
            if (paid - scored[0].0).abs() > 1e-12 * scored[0].0.abs().max(1.0) {
                worse += 1;
            } else if scored.len() > 1 && scored[0].0 - scored[1].0 > 1e-9 && got != scored[0].1 {
                different += 1;
            }
        }
    }
    let mut mismatched = 0;
    for _ in 0..40 {
        let n = rng.random_range(2..=4);
        let mut theta: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        theta.sort_by(f64::total_cmp);
        let instance =
            RationalInstance::homogeneous(OpinionProfile::new(theta).unwrap(), rng.random_range(0.05..0.95), rng.random_range(0.0..0.1))
                .unwrap();
        let rows = |space| {
            let mut r: Vec<_> = enumerate_equilibria_in(&instance, space).unwrap().into_iter().map(|e| e.graph.rows().to_vec()).collect();
            r.sort();
            r
        };
        mismatched += usize::from(rows(StrategySpace::Windows) != rows(StrategySpace::AllSubsets));
    }
    report.verdict(
        6,
        "brute-force equivalence",
        worse == 0 && different == 0 && mismatched == 0,
        &format!(
            "{worse} of {agents} agents' windows pay less than the best subset, {different} pick a different clear optimum; \
             {mismatched}/40 small games have different window and all-subset equilibria"
        ),
    );
}

fn sweep_config(update: UpdateRule) -> SweepConfig {
    SweepConfig {
        n: 81,
        max_steps: 20,
        f_range: (0.05, 0.95),
        v_range: (0.002, 0.2),
        dims: (25, 25),
        initial: uniform_grid(81).unwrap(),
        jobs: None,
        update,
        pruning: true,
    }
}

fn criterion_7(report: &mut Report) {
    for update in RULES {
        let start = Instant::now();
        let cells: Vec<SweepCell> = run_sweep(&sweep_config(update)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let errors = cells.iter().filter(|c| c.error.is_some()).count();
        let consensus = |c: &SweepCell| c.components_final == Some(1);
        let prop5 = cells.iter().filter(|c| c.v > consensus_boundary(c.f) && !consensus(c)).count();
        let prop6 = cells.iter().filter(|c| c.v < divergence_boundary(c.f) && !c.components_final.is_some_and(|k| k >= 2)).count();
        let temporary: Vec<&SweepCell> =
            cells.iter().filter(|c| c.classification == Some(Classification::TemporaryDisagreement)).collect();
        let temporary_off = temporary.iter().filter(|c| c.diameter_t1 != Some(Diameter::Finite(4))).count();
        let wide_consensus = cells.iter().filter(|c| c.diameter_t1.is_some_and(|d| d.is_at_least(5)) && consensus(c)).count();
        let detail = format!(
            "[{} rule] {secs:.1}s; {prop5} cells break the consensus region, {prop6} the disagreement region; \
             {temporary_off}/{} temporary cells have period-1 diameter other than 4; {wide_consensus} cells with diameter >= 5 reach consensus; {errors} errors",
            update.as_str(),
            temporary.len()
        );
        if update == UpdateRule::Hearing {
            report.verdict(7, "phase diagram", errors == 0 && prop5 == 0 && prop6 == 0 && temporary_off == 0 && wide_consensus == 0, &detail);
        } else {
            info(&detail);
        }
    }
}

/// Share of cells whose period-1 diameter (pooled at `cap`) matches the
/// analytic prediction, and how many mismatches have no neighbouring cell with
/// a different prediction.
fn diameter_match(dims: usize, cap: usize) -> (f64, usize) {
    let x = uniform_grid(80).unwrap();
    let fs = endonet::sweep::linspace((0.05, 0.95), dims);
    let vs = endonet::sweep::linspace((0.002, 0.2), dims);
    let mut observed = vec![vec![0usize; dims]; dims];
    let mut predicted = vec![vec![0usize; dims]; dims];
    for (a, &f) in fs.iter().enumerate() {
        for (b, &v) in vs.iter().enumerate() {
            let params = ModelParams::new(v, f, 80, 1).unwrap();
            let g = form_network_with(&params, &x, &FormationOptions::pruned_for(&params));
            observed[a][b] = directed_diameter(&g).finite().unwrap_or(usize::MAX).min(cap);
            predicted[a][b] = (predicted_diameter(&params) as usize).min(cap);
        }
    }
    let mut matched = 0;
    let mut far = 0;
    for a in 0..dims {
        for b in 0..dims {
            let p = predicted[a][b];
            if observed[a][b] == p {
                matched += 1;
                continue;
            }
            let near = (a.saturating_sub(1)..=(a + 1).min(dims - 1))
                .flat_map(|i| (b.saturating_sub(1)..=(b + 1).min(dims - 1)).map(move |j| (i, j)))
                .any(|(i, j)| predicted[i][j] != p);
            far += usize::from(!near);
        }
    }
    (matched as f64 / (dims * dims) as f64, far)
}

fn criterion_8(report: &mut Report) {
    const CAP: usize = 7;
    let (share, far) = diameter_match(25, CAP);
    report.verdict(
        8,
        "diameter prediction",
        share >= 0.95 && far == 0,
        &format!(
            "{:.1}% of 25x25 cells at n=80 match the analytic regions (diameters >= {CAP} pooled); {far} mismatches away from a boundary",
            100.0 * share
        ),
    );
    let (share, far) = diameter_match(25, usize::MAX);
    info(&format!("25x25 without pooling: {:.1}% match, {far} mismatches away from a boundary", 100.0 * share));
    let (share, far) = diameter_match(100, CAP);
    info(&format!("100x100, pooled at {CAP}: {:.1}% match, {far} mismatches away from a boundary", 100.0 * share));
}

fn in_degree_summary(g: &PeerGraph) -> (usize, usize) {
    let d = g.in_degrees();
    (d[0], d.iter().copied().max().unwrap())
}

fn criterion_9(report: &mut Report) {
    let n = 101;
    let x = uniform_grid(n).unwrap();
    let (hk_extreme, hk_max) = in_degree_summary(&hk_graph(0.2, &x));
    let hk = hk_run(0.5, 0.2, &x, 500).unwrap();
    let hk_clusters = clusters(hk.final_opinions().values(), 1e-6);
    for update in RULES {
        let params = ModelParams::new(0.02, 0.5, n, 500).unwrap();
        let tr = run_with(&params, &x, &RunOptions { update, ..RunOptions::default() }).unwrap();
        let (extreme, max) = in_degree_summary(tr.graph_at(1).unwrap());
        let components = tr.final_components().len();
        let ok = hk_extreme == 20
            && hk_max == 40
            && extreme.abs_diff(19) <= 1
            && max.abs_diff(44) <= 2
            && hk_clusters >= 2
            && components >= 2
            && hk_clusters.abs_diff(components) <= 1;
        let detail = format!(
            "[{} rule] step-1 in-degree extreme/max: bounded confidence {hk_extreme}/{hk_max}, strategic {extreme}/{max}; \
             long run: {hk_clusters} clusters vs {components} components",
            update.as_str()
        );
        if update == UpdateRule::Hearing {
            report.verdict(9, "bounded-confidence comparison", ok, &detail);
        } else {
            info(&detail);
        }
    }
}

fn criterion_10(report: &mut Report, bracket: Option<(f64, f64)>) {
    let v_split = bracket.map_or(V_SPLIT, |b| b.0);
    let runs = [("consensus", fig1_run(V_MERGE, UpdateRule::Hearing)), ("disconnected", fig1_run(v_split, UpdateRule::Hearing))];
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in PolarizationParams::DEFAULT_ALPHAS {
        let p = PolarizationParams::with_alpha(alpha).unwrap();
        for (kind, tr) in &runs {
            let series: Vec<f64> = tr.profiles().map(|x| esteban_ray(x.values(), &p)).collect();
            let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let peak_at = series.iter().position(|&s| s >= max * (1.0 - 1e-3)).unwrap();
            let last = *series.last().unwrap();
            let shape = match *kind {
                "consensus" => last < 1e-9,
                _ => last > 0.01,
            };
            ok &= max > series[0] && peak_at < 10 && shape;
            parts.push(format!("a={alpha} {kind}: {:.4} -> max {max:.4} at t={peak_at} -> {last:.3e}", series[0]));
        }
    }
    report.verdict(10, "polarization curves", ok, &parts.join("; "));
}

fn criterion_11(report: &mut Report) {
    let theta = OpinionProfile::new(vec![0.0, 0.5]).unwrap();
    let instance = RationalInstance::homogeneous(theta, 1.0 / 3.0, 0.04).unwrap();
    let x = solve_given_network(&instance, &PeerGraph::from_rows(vec![vec![1], vec![0]]).unwrap()).unwrap();
    let solved = (x[0] - 0.125).abs() <= 1e-12 && (x[1] - 0.375).abs() <= 1e-12;
    let got = common::three_agents::report();
    let golden = std::fs::read_to_string(common::three_agents::golden_path()).unwrap_or_default();
    let both = got.lines().skip(1).filter(|l| l.split(',').nth(2) == Some("true") && l.split(',').nth(3) == Some("true")).count();
    report.verdict(
        11,
        "three-agent example",
        solved && got == golden,
        &format!(
            "mutual pair solves to ({:.12}, {:.12}); report {} the golden file; both mirror-image pairs are equilibria at {both}/20 V points",
            x[0],
            x[1],
            if got == golden { "matches" } else { "differs from" }
        ),
    );
}

fn main() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut report = Report::default();
    let bracket = criterion_1(&mut report);
    criterion_2_3(&mut report, bracket);
    criterion_4(&mut report, &mut rng);
    criterion_5(&mut report, &mut rng);
    criterion_6(&mut report, &mut rng);
    criterion_7(&mut report);
    criterion_8(&mut report);
    criterion_9(&mut report);
    criterion_10(&mut report, bracket);
    criterion_11(&mut report);
    println!(
        "acceptance: {} passed, {} failed {:?} in {:.0}s",
        report.passed,
        report.failed.len(),
        report.failed,
        start.elapsed().as_secs_f64()
    );
}
