//! Exact statevector simulation for the small registers used by the solver.
//!
//! Basis index convention: qubit 0 is the least-significant bit, so the
//! state |b_{n-1} … b_1 b_0⟩ has index Σ b_k 2^k. Every reference matrix in
//! [`crate::decomp`] is written against this convention.

mod gate;
mod hadamard;
mod state;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use gate::{Control, Gate, GateKind, Polarity};
pub use hadamard::{hadamard_test, hadamard_test_circuit, EvalMode};
pub use state::Statevector;

pub(crate) use state::inner_unchecked;

use crate::error::{QfemError, Result};

/// Largest register the simulator accepts (statevector of 4096 amplitudes).
pub const MAX_QUBITS: usize = 12;

/// Largest register for which [`circuit_unitary`] builds a dense matrix.
pub const MAX_DENSE_QUBITS: usize = 10;

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        Err(QfemError::QubitCount(n))
    } else {
        Ok(())
    }
}

/// An ordered gate list on a fixed register size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self { n, gates: Vec::new() })
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut circuit = Self::new(n)?;
        for gate in gates {
            circuit.push(gate)?;
        }
        Ok(circuit)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends all gates of `other` (applied after the current ones).
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(QfemError::SizeMismatch { expected: self.n, actual: other.n });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn then(mut self, other: &Circuit) -> Result<Self> {
        self.append(other)?;
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// U† as a circuit: reversed order, each gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit { n: self.n, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    /// Re-embeds the circuit in a larger register, adding `control` to every gate.
    pub fn controlled_on(&self, total_qubits: usize, control: Control) -> Result<Circuit> {
        let gates = self.gates.iter().map(|g| g.clone().with_control(control)).collect();
        Circuit::from_gates(total_qubits, gates)
    }

    /// Re-embeds the circuit unchanged in a larger register.
    pub fn widened(&self, total_qubits: usize) -> Result<Circuit> {
        Circuit::from_gates(total_qubits, self.gates.clone())
    }
}

/// Applies `gate` to a copy of `state`.
pub fn apply_gate(state: &Statevector, gate: &Gate) -> Result<Statevector> {
    state.apply_gate(gate)
}

/// Applies the gates of `circuit` left to right to a copy of `state`.
pub fn apply_circuit(state: &Statevector, circuit: &Circuit) -> Result<Statevector> {
    state.apply_circuit(circuit)
}

/// ⟨a|b⟩ with conjugation on `a`.
pub fn inner_product(a: &Statevector, b: &Statevector) -> Result<Complex64> {
    a.inner(b)
}

/// Dense 2^n × 2^n matrix of the circuit; column k is the image of basis state k.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    let n = circuit.num_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(QfemError::TooLargeForDense { n, max: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let column = Statevector::basis(n, k)?.apply_circuit(circuit)?;
        for (row, amp) in column.amplitudes().iter().enumerate() {
            out[(row, k)] = *amp;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: &Statevector, b: &[Complex64]) -> bool {
        a.amplitudes().iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn x_flips_bit_zero() {
        let s = Statevector::zero(2).unwrap().apply_gate(&Gate::x(0)).unwrap();
        assert!(close(&s, &[c(0.0), c(1.0), c(0.0), c(0.0)]));
    }

    #[test]
    fn cz_phases_only_all_ones() {
        let s = Statevector::from_real(&[0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]).unwrap();
        let out = s.apply_gate(&Gate::cz(0, 1)).unwrap();
        assert!(close(&out, &[c(0.0), c(FRAC_1_SQRT_2), c(0.0), c(-FRAC_1_SQRT_2)]));
    }

    #[test]
    fn ry_full_turn_is_minus_identity() {
        let s = Statevector::zero(1).unwrap().apply_gate(&Gate::ry(0, 2.0 * PI)).unwrap();
        assert!(close(&s, &[c(-1.0), c(0.0)]));
    }

    #[test]
    fn apply_gate_leaves_input_untouched() {
        let s = Statevector::zero(2).unwrap();
        let _ = s.apply_gate(&Gate::x(1)).unwrap();
        assert_eq!(s, Statevector::zero(2).unwrap());
    }

    #[test]
    fn bell_preparation() {
        let circ = Circuit::from_gates(2, vec![Gate::h(0), Gate::cx(0, 1)]).unwrap();
        let s = Statevector::zero(2).unwrap().apply_circuit(&circ).unwrap();
        assert!(close(&s, &[c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]));
    }

    #[test]
    fn empty_circuit_is_identity() {
        let u = circuit_unitary(&Circuit::new(3).unwrap()).unwrap();
        assert_eq!(u, DMatrix::identity(8, 8));
    }

    #[test]
    fn fully_controlled_z_marks_last_state() {
        let g = Gate::z(0).with_controls([Control::closed(1), Control::closed(2)]);
        let u = circuit_unitary(&Circuit::from_gates(3, vec![g]).unwrap()).unwrap();
        for k in 0..8 {
            let expected = if k == 7 { -1.0 } else { 1.0 };
            assert_eq!(u[(k, k)], c(expected));
        }
    }

    #[test]
    fn textbook_gate_matrices() {
        let h = circuit_unitary(&Circuit::from_gates(1, vec![Gate::h(0)]).unwrap()).unwrap();
        assert!((h[(0, 0)].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((h[(1, 1)].re + FRAC_1_SQRT_2).abs() < 1e-15);
        let theta = 0.7;
        let ry = circuit_unitary(&Circuit::from_gates(1, vec![Gate::ry(0, theta)]).unwrap()).unwrap();
        assert!((ry[(0, 0)].re - (theta / 2.0).cos()).abs() < 1e-15);
        assert!((ry[(0, 1)].re + (theta / 2.0).sin()).abs() < 1e-15);
        assert!((ry[(1, 0)].re - (theta / 2.0).sin()).abs() < 1e-15);
        let sw = circuit_unitary(&Circuit::from_gates(2, vec![Gate::swap(0, 1)]).unwrap()).unwrap();
        let perm = [0, 2, 1, 3];
        for (k, &p) in perm.iter().enumerate() {
            assert_eq!(sw[(p, k)], c(1.0));
        }
        let open_x = Gate::x(1).with_control(Control::open(0));
        let ox = circuit_unitary(&Circuit::from_gates(2, vec![open_x]).unwrap()).unwrap();
        let perm = [2, 1, 0, 3];
        for (k, &p) in perm.iter().enumerate() {
            assert_eq!(ox[(p, k)], c(1.0));
        }
    }

    #[test]
    fn rejects_bad_gates() {
        let mut circ = Circuit::new(2).unwrap();
        assert!(matches!(circ.push(Gate::x(2)), Err(QfemError::QubitOutOfRange { .. })));
        assert!(circ.push(Gate::ry(0, f64::NAN)).is_err());
        assert!(circ.push(Gate::cx(1, 1)).is_err());
        assert!(circ.push(Gate::new(GateKind::Swap, vec![0], vec![])).is_err());
    }

    #[test]
    fn inner_products() {
        let zero = Statevector::zero(1).unwrap();
        let one = Statevector::basis(1, 1).unwrap();
        let plus = zero.apply_gate(&Gate::h(0)).unwrap();
        assert_eq!(inner_product(&zero, &zero).unwrap(), c(1.0));
        assert_eq!(inner_product(&zero, &one).unwrap(), c(0.0));
        assert!((inner_product(&plus, &zero).unwrap().re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(inner_product(&zero, &Statevector::zero(2).unwrap()).is_err());
    }

    #[test]
    fn dense_limit() {
        let circ = Circuit::new(11).unwrap();
        assert!(matches!(circuit_unitary(&circ), Err(QfemError::TooLargeForDense { .. })));
    }

    #[test]
    fn controlled_swap_equals_three_cx() {
        let ctl = Control::open(2);
        let single = Circuit::from_gates(3, vec![Gate::swap(0, 1).with_control(ctl)]).unwrap();
        let layered = Circuit::from_gates(
            3,
            vec![Gate::cx(0, 1).with_control(ctl), Gate::cx(1, 0).with_control(ctl), Gate::cx(0, 1).with_control(ctl)],
        )
        .unwrap();
        assert_eq!(circuit_unitary(&single).unwrap(), circuit_unitary(&layered).unwrap());
    }
}
