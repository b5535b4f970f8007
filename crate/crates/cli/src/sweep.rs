//! Batch studies: success rates over ansatz configurations, condition-number
//! scaling and cost-landscape probes.

use std::path::Path;

use qfem_core::fem::{assemble_direct, condition_number, BoundaryCondition, Order};
use qfem_core::vqls::{cost, random_parameters, solve_from, Ansatz, AnsatzFamily, AnsatzSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ElementLengths, RunConfig};
use crate::error::CliError;
use crate::output::{write_csv, write_json};
use crate::solve::build_system;

#[derive(Debug, Clone)]
pub struct AnsatzSweep {
    pub families: Vec<AnsatzFamily>,
    pub layers: Vec<usize>,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub converged: bool,
    pub final_cost: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

/// One line of the success-rate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRow {
    pub ansatz: String,
    pub layers: usize,
    pub parameters: usize,
    pub restarts: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub best_cost: Option<f64>,
    pub mean_iterations: Option<f64>,
    /// Set when the configuration could not be run; the sweep carries on.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ConfigOutcome {
    pub spec: AnsatzSpec,
    pub row: SuccessRow,
    pub restarts: Vec<RestartOutcome>,
}

/// Every (family, layers) pair × restart runs as its own job. Restart r of
/// every configuration starts from stream r of the config seed, so results
/// do not depend on the worker count.
pub fn run_ansatz_sweep(config: &RunConfig, sweep: &AnsatzSweep) -> Result<Vec<ConfigOutcome>, CliError> {
    let (_, problem, _) = build_system(config)?;
    let vqls = config.vqls_config(None)?;
    let n = config.discretization.n;
    let specs: Vec<Result<AnsatzSpec, String>> = sweep
        .families
        .iter()
        .flat_map(|&f| sweep.layers.iter().map(move |&l| AnsatzSpec::new(f, n, l).map_err(|e| e.to_string())))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..specs.len()).flat_map(|s| (0..sweep.restarts).map(move |r| (s, r))).collect();
    let runs: Vec<Result<RestartOutcome, String>> = jobs
        .par_iter()
        .map(|&(s, r)| {
            let spec = specs[s].as_ref().map_err(Clone::clone)?;
            let start = random_parameters(spec.parameter_count(), vqls.seed, r as u64);
            let m = solve_from(spec, &problem, &vqls, &start).map_err(|e| e.to_string())?;
            Ok(RestartOutcome {
                restart: r,
                converged: m.converged,
                final_cost: m.value,
                iterations: m.iterations,
                trace: m.trace,
            })
        })
        .collect();

    let mut out = Vec::with_capacity(specs.len());
    for (s, spec) in specs.iter().enumerate() {
        let chunk = &runs[s * sweep.restarts..(s + 1) * sweep.restarts];
        let (family, layers) = (sweep.families[s / sweep.layers.len()], sweep.layers[s % sweep.layers.len()]);
        let error = spec.as_ref().err().cloned().or_else(|| chunk.iter().find_map(|r| r.as_ref().err().cloned()));
        let ok: Vec<RestartOutcome> = chunk.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
        let successes = ok.iter().filter(|r| r.converged).count();
        let row = SuccessRow {
            ansatz: family.to_string(),
            layers,
            parameters: spec.as_ref().map(|s| s.parameter_count()).unwrap_or(0),
            restarts: ok.len(),
            successes,
            success_rate: if ok.is_empty() { 0.0 } else { successes as f64 / ok.len() as f64 },
            best_cost: ok.iter().map(|r| r.final_cost).min_by(f64::total_cmp),
            mean_iterations: (!ok.is_empty())
                .then(|| ok.iter().map(|r| r.iterations as f64).sum::<f64>() / ok.len() as f64),
            error,
        };
        let spec = spec.clone().unwrap_or(AnsatzSpec { family, n, layers });
        out.push(ConfigOutcome { spec, row, restarts: ok });
    }
    Ok(out)
}

/// Mean and spread of the cost at each iteration across restarts. Runs
/// that stopped early hold their final value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStatistic {
    pub ansatz: String,
    pub layers: usize,
    pub iteration: usize,
    pub mean: f64,
    pub std: f64,
    pub running: usize,
}

pub fn trace_statistics(outcome: &ConfigOutcome) -> Vec<TraceStatistic> {
    let runs = &outcome.restarts;
    let longest = runs.iter().map(|r| r.trace.len()).max().unwrap_or(0);
    (0..longest)
        .map(|i| {
            let values: Vec<f64> = runs.iter().map(|r| r.trace[i.min(r.trace.len() - 1)]).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
            TraceStatistic {
                ansatz: outcome.row.ansatz.clone(),
                layers: outcome.row.layers,
                iteration: i,
                mean,
                std: var.sqrt(),
                running: runs.iter().filter(|r| r.trace.len() > i).count(),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct TraceRow {
    restart: usize,
    iteration: usize,
    cost: f64,
}

/// sweep.csv (success rates), sweep_stats.csv (per-iteration statistics)
/// and one trace file per configuration under traces/.
pub fn write_ansatz_sweep(outcomes: &[ConfigOutcome], dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir.join("traces"))?;
    write_csv(&dir.join("sweep.csv"), outcomes.iter().map(|o| o.row.clone()))?;
    write_csv(&dir.join("sweep_stats.csv"), outcomes.iter().flat_map(trace_statistics))?;
    for o in outcomes {
        let rows = o.restarts.iter().flat_map(|r| {
            r.trace.iter().enumerate().map(move |(iteration, &cost)| TraceRow { restart: r.restart, iteration, cost })
        });
        write_csv(&dir.join("traces").join(format!("{}_L{}.csv", o.spec.family, o.spec.layers)), rows)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub n: usize,
    /// Mesh unknowns N (auxiliary rows excluded).
    pub unknowns: usize,
    /// Reciprocal element length; N + 1 for the homogeneous linear mesh.
    pub inverse_h: f64,
    pub cond: f64,
    /// 48 (N + 1)², the bound for unit diffusivity on a uniform mesh of [0, 1].
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    /// Least-squares slope of ln cond against ln(1/h).
    pub slope: f64,
    pub intercept: f64,
    /// Same fit against ln N. Pre-asymptotic points pull it below 2 at small n.
    pub slope_vs_unknowns: f64,
    pub all_within_bound: bool,
}

/// cond(K) on uniform meshes of the config's problem for each n.
pub fn run_condition_sweep(
    config: &RunConfig,
    qubits: std::ops::RangeInclusive<usize>,
) -> Result<(Vec<ConditionRow>, ConditionSummary), CliError> {
    let mut rows = Vec::new();
    for n in qubits {
        let mut c = config.clone();
        c.discretization.n = n;
        c.discretization.lengths = ElementLengths::default();
        let p = c.build_problem()?;
        let sys = assemble_direct(&p.mesh, &p.bc, &p.forcing)?;
        let unknowns = sys.row_coordinates.iter().filter(|x| x.is_some()).count();
        let cond = condition_number(&sys)?;
        let bound = 48.0 * ((unknowns + 1) as f64).powi(2);
        let inverse_h = p.mesh.num_elements() as f64 / (c.problem.x2 - c.problem.x1);
        rows.push(ConditionRow { n, unknowns, inverse_h, cond, bound, within_bound: cond <= bound });
    }
    let ys: Vec<f64> = rows.iter().map(|r| r.cond.ln()).collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.inverse_h.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let xs: Vec<f64> = rows.iter().map(|r| (r.unknowns as f64).ln()).collect();
    let (slope_vs_unknowns, _) = least_squares(&xs, &ys);
    let all_within_bound = rows.iter().all(|r| r.within_bound);
    Ok((rows, ConditionSummary { slope, intercept, slope_vs_unknowns, all_within_bound }))
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn write_condition_sweep(rows: &[ConditionRow], summary: &ConditionSummary, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    write_csv(&dir.join("sweep.csv"), rows.iter().cloned())?;
    write_json(&dir.join("sweep_summary.json"), summary)
}

/// The ansatz-test problem on the homogeneous linear discretization, used
/// when no config is given to the condition sweep.
pub fn condition_default() -> RunConfig {
    let mut c = crate::presets::preset("ansatz-test-n3").expect("built-in preset");
    c.problem.left = BoundaryCondition::DirichletHomogeneous;
    c.problem.right = BoundaryCondition::DirichletHomogeneous;
    c.discretization.order = Order::Linear;
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub theta_a: f64,
    pub theta_b: f64,
    pub cost: f64,
}

/// Ĉ on a `grid` × `grid` lattice of (θ_a, θ_b) within ±span of `center`,
/// all other angles held at `center`.
pub fn run_landscape(
    config: &RunConfig,
    center: &[f64],
    params: (usize, usize),
    grid: usize,
    span: f64,
) -> Result<Vec<LandscapePoint>, CliError> {
    let (_, problem, _) = build_system(config)?;
    let spec = config.ansatz_spec()?;
    let (a, b) = params;
    let count = spec.parameter_count();
    if a >= count || b >= count || a == b {
        return Err(CliError::Usage(format!("landscape parameters must be two distinct indices below {count}")));
    }
    if grid < 2 {
        return Err(CliError::Usage("landscape grid needs at least 2 points per axis".into()));
    }
    let ansatz = Ansatz::new(spec);
    let eval = config.vqls.eval;
    let step = 2.0 * span / (grid - 1) as f64;
    let points: Vec<(usize, usize)> = (0..grid).flat_map(|i| (0..grid).map(move |j| (i, j))).collect();
    points
        .par_iter()
        .map(|&(i, j)| {
            let mut theta = center.to_vec();
            theta[a] = center[a] - span + i as f64 * step;
            theta[b] = center[b] - span + j as f64 * step;
            let c = cost(&problem, &ansatz, &theta, eval)?;
            Ok(LandscapePoint { theta_a: theta[a], theta_b: theta[b], cost: c.cost })
        })
        .collect()
}
