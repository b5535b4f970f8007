use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ansatz::{build_ansatz, Ansatz};
use super::stateprep::prepare_force_state;
use crate::decomp::LcuDecomposition;
use crate::error::{QfemError, Result};
use crate::qsim::{hadamard_test, inner_unchecked, Circuit, EvalMode, Statevector};

/// Everything the cost needs besides θ: the decomposition of K and the
/// prepared right-hand side.
#[derive(Debug, Clone)]
pub struct VqlsProblem {
    pub lcu: LcuDecomposition,
    /// Right-hand side f as assembled (not normalized).
    pub force: Vec<f64>,
    /// U with U|0⟩ = f / ‖f‖.
    pub force_circuit: Circuit,
    force_state: Vec<Complex64>,
}

impl VqlsProblem {
    pub fn new(lcu: LcuDecomposition, force: Vec<f64>) -> Result<Self> {
        if force.len() != lcu.dim() {
            return Err(QfemError::SizeMismatch { expected: lcu.dim(), actual: force.len() });
        }
        let force_circuit = prepare_force_state(&force)?;
        let force_state = Statevector::zero(lcu.n)?.apply_circuit(&force_circuit)?.into_amplitudes();
        Ok(Self { lcu, force, force_circuit, force_state })
    }

    pub fn n(&self) -> usize {
        self.lcu.n
    }

    pub fn force_norm(&self) -> f64 {
        self.force.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Parts of the normalized cost Ĉ = 1 − (Σ c_l β_l)² / Σ c_n c_m γ_nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub numerator: f64,
    pub denominator: f64,
    pub cost: f64,
    /// β_l = Re⟨0|U† K_l V|0⟩.
    pub beta: Vec<f64>,
    /// γ_nm = Re⟨v|K_n† K_m|v⟩, symmetric with unit diagonal.
    pub gamma: Vec<Vec<f64>>,
}

impl CostBreakdown {
    /// ⟨f|K|v⟩ / ‖f‖ = Σ c_l β_l.
    pub fn overlap(&self, lcu: &LcuDecomposition) -> f64 {
        lcu.terms.iter().zip(&self.beta).map(|(t, b)| t.coefficient * b).sum()
    }
}

fn assemble(lcu: &LcuDecomposition, beta: Vec<f64>, gamma: Vec<Vec<f64>>) -> Result<CostBreakdown> {
    let c = lcu.coefficients();
    let overlap: f64 = c.iter().zip(&beta).map(|(c, b)| c * b).sum();
    let numerator = overlap * overlap;
    let mut denominator = 0.0;
    for (n, row) in gamma.iter().enumerate() {
        for (m, g) in row.iter().enumerate() {
            denominator += c[n] * c[m] * g;
        }
    }
    if denominator <= 0.0 || !denominator.is_finite() {
        return Err(QfemError::BrokenDenominator(denominator));
    }
    Ok(CostBreakdown { numerator, denominator, cost: 1.0 - numerator / denominator, beta, gamma })
}

fn test_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer over (base, index)
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Ĉ(θ): L tests for β and L(L − 1)/2 tests for γ, with γ_nn = 1.
pub fn cost(problem: &VqlsProblem, ansatz: &Ansatz, theta: &[f64], mode: EvalMode) -> Result<CostBreakdown> {
    if ansatz.spec().n != problem.n() {
        return Err(QfemError::SizeMismatch { expected: problem.n(), actual: ansatz.spec().n });
    }
    match mode {
        EvalMode::Exact => exact_cost(problem, ansatz, theta),
        EvalMode::Shots { count, seed } => {
            let seed = seed.ok_or_else(|| QfemError::Shots("shots mode requires a seed".into()))?;
            shot_cost(problem, ansatz, theta, count, seed)
        }
    }
}

fn exact_cost(problem: &VqlsProblem, ansatz: &Ansatz, theta: &[f64]) -> Result<CostBreakdown> {
    let v = ansatz.state(theta)?;
    let images: Vec<Statevector> =
        problem.lcu.terms.iter().map(|t| v.apply_circuit(&t.circuit)).collect::<Result<_>>()?;
    let beta: Vec<f64> = images.iter().map(|w| inner_unchecked(&problem.force_state, w.amplitudes()).re).collect();
    let count = images.len();
    let mut gamma = vec![vec![0.0; count]; count];
    for n in 0..count {
        let self_overlap = inner_unchecked(images[n].amplitudes(), images[n].amplitudes()).re;
        if (self_overlap - 1.0).abs() > 1e-9 {
            return Err(QfemError::InvalidGate(format!("term {n} is not unitary: <v|K_n^† K_n|v> = {self_overlap}")));
        }
        gamma[n][n] = 1.0;
        for m in n + 1..count {
            let g = inner_unchecked(images[n].amplitudes(), images[m].amplitudes()).re;
            gamma[n][m] = g;
            gamma[m][n] = g;
        }
    }
    assemble(&problem.lcu, beta, gamma)
}

fn shot_cost(problem: &VqlsProblem, ansatz: &Ansatz, theta: &[f64], count: u64, seed: u64) -> Result<CostBreakdown> {
    let n = problem.n();
    let v_circuit = build_ansatz(ansatz.spec(), theta)?;
    let empty = Circuit::new(n)?;
    let u_dagger = problem.force_circuit.inverse();
    let terms = &problem.lcu.terms;
    let mut index = 0u64;
    let mut next_mode = || {
        index += 1;
        EvalMode::Shots { count, seed: Some(test_seed(seed, index)) }
    };
    let mut beta = Vec::with_capacity(terms.len());
    for t in terms {
        let w = v_circuit.clone().then(&t.circuit)?.then(&u_dagger)?;
        beta.push(hadamard_test(&w, &empty, next_mode())?);
    }
    let mut gamma = vec![vec![0.0; terms.len()]; terms.len()];
    for a in 0..terms.len() {
        gamma[a][a] = 1.0;
        for b in a + 1..terms.len() {
            let w = terms[b].circuit.clone().then(&terms[a].circuit.inverse())?;
            let g = hadamard_test(&w, &v_circuit, next_mode())?;
            gamma[a][b] = g;
            gamma[b][a] = g;
        }
    }
    assemble(&problem.lcu, beta, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::decompose;
    use crate::fem::{assemble_direct, BoundarySpec, Forcing, Mesh1D, Order};
    use crate::vqls::{AnsatzFamily, AnsatzSpec};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(n: usize) -> (VqlsProblem, crate::fem::AssembledSystem) {
        let bc = BoundarySpec::homogeneous();
        let mesh = Mesh1D::uniform(n, Order::Linear, &bc, 0.0, 1.0, 1.0).unwrap();
        let sys = assemble_direct(&mesh, &bc, &Forcing::new(vec![0.0, 1.0]).unwrap()).unwrap();
        let lcu = decompose(&mesh, &bc).unwrap();
        (VqlsProblem::new(lcu, sys.f.as_slice().to_vec()).unwrap(), sys)
    }

    fn dense_cost(sys: &crate::fem::AssembledSystem, v: &[f64]) -> f64 {
        let kv = &sys.k * DVector::from_column_slice(v);
        let fk = sys.f.dot(&kv);
        1.0 - fk * fk / (sys.f.norm_squared() * kv.norm_squared())
    }

    #[test]
    fn matches_dense_cost() {
        let (p, sys) = problem(3);
        let spec = AnsatzSpec::new(AnsatzFamily::A1, 3, 2).unwrap();
        let ansatz = Ansatz::new(spec);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..spec.parameter_count()).map(|_| rng.random_range(0.0..6.3)).collect();
            let c = cost(&p, &ansatz, &theta, EvalMode::Exact).unwrap();
            let v = ansatz.real_state(&theta).unwrap();
            assert!((c.cost - dense_cost(&sys, &v)).abs() < 1e-12);
            assert!((c.cost - (1.0 - c.numerator / c.denominator)).abs() < 1e-15);
            assert!(c.gamma.iter().enumerate().all(|(k, row)| row[k] == 1.0));
        }
    }

    #[test]
    fn shots_track_exact() {
        let (p, _) = problem(2);
        let spec = AnsatzSpec::new(AnsatzFamily::A3, 2, 2).unwrap();
        let ansatz = Ansatz::new(spec);
        let theta = vec![0.3, 1.2, -0.4, 2.0, 0.8, 1.1];
        let exact = cost(&p, &ansatz, &theta, EvalMode::Exact).unwrap();
        let shots = cost(&p, &ansatz, &theta, EvalMode::Shots { count: 1_000_000, seed: Some(5) }).unwrap();
        for (a, b) in exact.beta.iter().zip(&shots.beta) {
            assert!((a - b).abs() < 5e-3);
        }
        assert!(cost(&p, &ansatz, &theta, EvalMode::Shots { count: 10, seed: None }).is_err());
    }

    #[test]
    fn rejects_mismatched_register() {
        let (p, _) = problem(3);
        let ansatz = Ansatz::new(AnsatzSpec::new(AnsatzFamily::A1, 2, 1).unwrap());
        assert!(cost(&p, &ansatz, &[0.0; 4], EvalMode::Exact).is_err());
    }
}
