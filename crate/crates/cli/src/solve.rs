use std::path::Path;
use std::time::Instant;

use qfem_core::decomp::{decompose, decompose_unique};
use qfem_core::fem::{assemble_direct, classical_solve, AssembledSystem};
use qfem_core::vqls::{extract_solution, fidelity, optimize, VqlsProblem, VqlsResult};
use serde::{Deserialize, Serialize};

use crate::config::{Format, InitKind, RunConfig};
use crate::error::CliError;
use crate::output::{write_csv, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub terms: usize,
    pub grouped: bool,
}

/// Quantum and classical solutions side by side, one entry per unknown row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionComparison {
    /// Node coordinate of each row; `None` for the auxiliary row.
    pub x: Vec<Option<f64>>,
    /// Extracted u; absent when the overlap ⟨f|K|v⟩ vanished.
    pub quantum: Option<Vec<f64>>,
    pub classical: Vec<f64>,
    /// Relative residual of the classical solve.
    pub classical_residual: f64,
}

/// Everything `solve` persists. Wall time is reported on stdout only so
/// that repeated seeded runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// The configuration that produced this record, minus output settings.
    pub config: RunConfig,
    pub decomposition: DecompositionSummary,
    pub result: VqlsResult,
    pub solution: SolutionComparison,
    /// |⟨u_q|u_c⟩| / (‖u_q‖‖u_c‖).
    pub fidelity: f64,
    /// max |u_q − u_c| / max |u_c|.
    pub relative_error: Option<f64>,
}

pub struct SolveOutcome {
    pub record: RunRecord,
    pub wall_time: f64,
}

pub fn build_system(config: &RunConfig) -> Result<(AssembledSystem, VqlsProblem, DecompositionSummary), CliError> {
    let p = config.build_problem()?;
    let sys = assemble_direct(&p.mesh, &p.bc, &p.forcing)?;
    let grouped = config.vqls.unique_element_grouping;
    let lcu = if grouped { decompose_unique(&p.mesh, &p.bc)? } else { decompose(&p.mesh, &p.bc)? };
    let summary = DecompositionSummary { terms: lcu.num_terms(), grouped };
    let problem = VqlsProblem::new(lcu, sys.f.as_slice().to_vec())?;
    Ok((sys, problem, summary))
}

pub fn run_solve(config: &RunConfig) -> Result<SolveOutcome, CliError> {
    let start = Instant::now();
    let (sys, problem, decomposition) = build_system(config)?;
    let (classical, classical_residual) = classical_solve(&sys)?;
    let classical = classical.as_slice().to_vec();
    let warm = (config.vqls.init == InitKind::WarmStart).then(|| classical.clone());
    let result = optimize(&config.ansatz_spec()?, &problem, &config.vqls_config(warm)?)?;
    let quantum = extract_solution(&result, &problem).ok();
    let (fid, relative_error) = match &quantum {
        Some(u) => {
            let scale = classical.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let err = u.iter().zip(&classical).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (fidelity(u, &classical), Some(err / scale))
        }
        None => (fidelity(&result.state, &classical), None),
    };
    let mut snapshot = config.clone();
    snapshot.output = Default::default();
    let record = RunRecord {
        config: snapshot,
        decomposition,
        result,
        solution: SolutionComparison { x: sys.row_coordinates.clone(), quantum, classical, classical_residual },
        fidelity: fid,
        relative_error,
    };
    Ok(SolveOutcome { record, wall_time: start.elapsed().as_secs_f64() })
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    cost: f64,
}

#[derive(Serialize)]
struct SolutionRow {
    row: usize,
    x: Option<f64>,
    quantum: Option<f64>,
    classical: f64,
    quantum_normalized: Option<f64>,
    classical_normalized: f64,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter().map(|a| a / norm).collect()
}

/// Writes results.json, cost_trace.csv and solution.csv as configured.
pub fn write_solve_outputs(record: &RunRecord, config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    if config.output.wants(Format::Json) {
        write_json(&dir.join("results.json"), record)?;
    }
    if config.output.wants(Format::Csv) {
        let trace = record.result.cost_trace.iter().map(|&(iteration, cost)| TraceRow { iteration, cost });
        write_csv(&dir.join("cost_trace.csv"), trace)?;
        let s = &record.solution;
        let qn = s.quantum.as_deref().map(unit);
        let cn = unit(&s.classical);
        let rows = (0..s.classical.len()).map(|i| SolutionRow {
            row: i,
            x: s.x[i],
            quantum: s.quantum.as_ref().map(|q| q[i]),
            classical: s.classical[i],
            quantum_normalized: qn.as_ref().map(|q| q[i]),
            classical_normalized: cn[i],
        });
        write_csv(&dir.join("solution.csv"), rows)?;
    }
    Ok(())
}
