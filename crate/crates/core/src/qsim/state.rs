use num_complex::Complex64;

use super::gate::{Gate, GateKind};
use super::{check_qubits, Circuit};
use crate::error::{QfemError, Result};

/// Dense statevector over `n` qubits. Qubit 0 is the least-significant bit of
/// the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// |0…0⟩
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        let len = 1usize << n;
        if index >= len {
            return Err(QfemError::InvalidVector(format!("basis index {index} >= {len}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QfemError::InvalidVector(format!("length {len} is not a power of two >= 2")));
        }
        let n = len.trailing_zeros() as usize;
        check_qubits(n)?;
        Ok(Self { n, amps })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.re).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QfemError::InvalidVector("cannot normalize a zero vector".into()));
        }
        self.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(self)
    }

    /// ⟨self|other⟩, conjugating `self`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(QfemError::SizeMismatch { expected: self.n, actual: other.n });
        }
        Ok(inner_unchecked(&self.amps, &other.amps))
    }

    /// Probability that `qubit` reads |1⟩.
    pub fn probability_one(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&self, gate: &Gate) -> Result<Statevector> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    pub fn apply_circuit(&self, circuit: &Circuit) -> Result<Statevector> {
        let mut out = self.clone();
        out.apply_circuit_mut(circuit)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        apply_unchecked(&mut self.amps, gate);
        Ok(())
    }

    pub fn apply_circuit_mut(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.n {
            return Err(QfemError::SizeMismatch { expected: self.n, actual: circuit.num_qubits() });
        }
        // Circuits validate their gates on construction.
        for gate in circuit.gates() {
            apply_unchecked(&mut self.amps, gate);
        }
        Ok(())
    }
}

pub(crate) fn inner_unchecked(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Applies a validated gate in place.
pub(crate) fn apply_unchecked(amps: &mut [Complex64], gate: &Gate) {
    let (mask, value) = gate.control_mask();
    let len = amps.len();
    match gate.kind {
        GateKind::Swap => {
            let a = 1usize << gate.targets[0];
            let b = 1usize << gate.targets[1];
            for i in 0..len {
                if i & a == 0 && i & b != 0 && i & mask == value {
                    amps.swap(i, (i | a) & !b);
                }
            }
        }
        kind => {
            let t = 1usize << gate.targets[0];
            for i0 in 0..len {
                if i0 & t != 0 || i0 & mask != value {
                    continue;
                }
                let i1 = i0 | t;
                match kind {
                    GateKind::X => amps.swap(i0, i1),
                    GateKind::Z => amps[i1] = -amps[i1],
                    GateKind::H => {
                        let (a0, a1) = (amps[i0], amps[i1]);
                        amps[i0] = (a0 + a1) * std::f64::consts::FRAC_1_SQRT_2;
                        amps[i1] = (a0 - a1) * std::f64::consts::FRAC_1_SQRT_2;
                    }
                    GateKind::Ry(theta) => {
                        let (s, c) = (0.5 * theta).sin_cos();
                        let (a0, a1) = (amps[i0], amps[i1]);
                        amps[i0] = a0 * c - a1 * s;
                        amps[i1] = a0 * s + a1 * c;
                    }
                    GateKind::Swap => unreachable!(),
                }
            }
        }
    }
}
