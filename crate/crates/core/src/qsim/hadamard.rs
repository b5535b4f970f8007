use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{Circuit, Control, Gate, Statevector};
use crate::error::{QfemError, Result};

/// How expectation values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "mode", deny_unknown_fields)]
pub enum EvalMode {
    /// Noiseless, infinite-shot value computed from the statevector.
    #[default]
    Exact,
    /// Sampled ancilla readout. `seed` is mandatory; it is optional here only so
    /// that configuration layers can report a missing seed instead of inventing one.
    Shots { count: u64, seed: Option<u64> },
}

/// The (n+1)-qubit Hadamard-test circuit: prep on the main register, H on the
/// ancilla (qubit n), `u` controlled on the ancilla, H on the ancilla.
pub fn hadamard_test_circuit(circuit_u: &Circuit, prep: &Circuit) -> Result<Circuit> {
    let n = circuit_u.num_qubits();
    if prep.num_qubits() != n {
        return Err(QfemError::SizeMismatch { expected: n, actual: prep.num_qubits() });
    }
    let ancilla = n;
    let mut full = prep.widened(n + 1)?;
    full.push(Gate::h(ancilla))?;
    full.append(&circuit_u.controlled_on(n + 1, Control::closed(ancilla))?)?;
    full.push(Gate::h(ancilla))?;
    Ok(full)
}

/// Re⟨ψ|U|ψ⟩ with |ψ⟩ = prep|0⟩.
pub fn hadamard_test(circuit_u: &Circuit, prep: &Circuit, mode: EvalMode) -> Result<f64> {
    let n = circuit_u.num_qubits();
    if prep.num_qubits() != n {
        return Err(QfemError::SizeMismatch { expected: n, actual: prep.num_qubits() });
    }
    match mode {
        EvalMode::Exact => {
            let psi = Statevector::zero(n)?.apply_circuit(prep)?;
            let u_psi = psi.apply_circuit(circuit_u)?;
            // Dividing by ⟨ψ|ψ⟩ removes rounding drift in the prepared norm.
            Ok(psi.inner(&u_psi)?.re / psi.inner(&psi)?.re)
        }
        EvalMode::Shots { count, seed } => {
            if count < 1 {
                return Err(QfemError::Shots("shot count must be at least 1".into()));
            }
            let seed = seed.ok_or_else(|| QfemError::Shots("shots mode requires a seed".into()))?;
            let full = hadamard_test_circuit(circuit_u, prep)?;
            let out = Statevector::zero(n + 1)?.apply_circuit(&full)?;
            let p1 = out.probability_one(n).clamp(0.0, 1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ones = Binomial::new(count, p1).map_err(|e| QfemError::Shots(e.to_string()))?.sample(&mut rng);
            let zeros = count - ones;
            Ok((zeros as f64 - ones as f64) / count as f64)
        }
    }
}
