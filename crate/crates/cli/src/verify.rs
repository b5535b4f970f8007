use std::path::Path;

use qfem_core::decomp::{decompose, decompose_unique, relative_error, LcuDecomposition, TermRecord};
use qfem_core::fem::{assemble_direct, Order};
use qfem_core::qsim::MAX_DENSE_QUBITS;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::write_json;

/// Largest register `verify-decomp` accepts.
pub const MAX_VERIFY_QUBITS: usize = 6;
/// Entrywise tolerance on the rebuilt stiffness matrix.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermCheck {
    #[serde(flatten)]
    pub record: TermRecord,
    /// max |U_circuit − U_reference|.
    pub circuit_error: f64,
    pub gates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompReport {
    pub n: usize,
    pub order: Order,
    pub grouped: bool,
    pub num_terms: usize,
    /// max |Σ c_l U_l − K| with U_l simulated from the circuits.
    pub max_error: f64,
    /// Same with the reference signed permutations instead of circuits.
    pub reference_error: f64,
    pub relative_error: f64,
    pub max_term_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub terms: Vec<TermCheck>,
}

/// Rebuilds K from the circuits of `lcu` and compares it with direct assembly.
pub fn check_decomposition(config: &RunConfig, lcu: &LcuDecomposition) -> Result<DecompReport, CliError> {
    let p = config.build_problem()?;
    let sys = assemble_direct(&p.mesh, &p.bc, &p.forcing)?;
    let from_circuits = lcu.reconstruct_from_circuits()?;
    let max_error = (&from_circuits - &sys.k).abs().max();
    let reference_error = (lcu.reconstruct() - &sys.k).abs().max();
    let terms = lcu
        .terms
        .iter()
        .map(|t| Ok(TermCheck { record: t.record(), circuit_error: t.circuit_error()?, gates: t.circuit.len() }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let max_term_error = terms.iter().map(|t| t.circuit_error).fold(0.0, f64::max);
    Ok(DecompReport {
        n: lcu.n,
        order: p.mesh.order,
        grouped: config.vqls.unique_element_grouping,
        num_terms: lcu.num_terms(),
        max_error,
        reference_error,
        relative_error: relative_error(&from_circuits, &sys.k),
        max_term_error,
        tolerance: RECONSTRUCTION_TOLERANCE,
        passed: max_error <= RECONSTRUCTION_TOLERANCE && max_term_error <= RECONSTRUCTION_TOLERANCE,
        terms,
    })
}

/// `corrupt` perturbs the coefficient of one term by 1e-3 as a negative
/// control for the checker.
pub fn run_verify(config: &RunConfig, corrupt: Option<usize>) -> Result<DecompReport, CliError> {
    let n = config.discretization.n;
    if n > MAX_VERIFY_QUBITS.min(MAX_DENSE_QUBITS) {
        return Err(CliError::Validation(format!("verify-decomp supports n ≤ {MAX_VERIFY_QUBITS}, got {n}")));
    }
    let p = config.build_problem()?;
    let mut lcu = if config.vqls.unique_element_grouping {
        decompose_unique(&p.mesh, &p.bc)?
    } else {
        decompose(&p.mesh, &p.bc)?
    };
    if let Some(k) = corrupt {
        let count = lcu.num_terms();
        let term =
            lcu.terms.get_mut(k).ok_or_else(|| CliError::Usage(format!("term {k} out of range ({count} terms)")))?;
        term.coefficient += 1e-3;
    }
    check_decomposition(config, &lcu)
}

pub fn write_verify_outputs(report: &DecompReport, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join("decomp.json"), report)
}
