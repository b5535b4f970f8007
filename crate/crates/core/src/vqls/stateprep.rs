//! Amplitude encoding of a real vector with a tree of uniformly controlled Ry
//! rotations, each decomposed into alternating Ry and CNOT gates.

use crate::error::{QfemError, Result};
use crate::qsim::{Circuit, Control, Gate};

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Uniformly controlled Ry on `target`, controlled by qubits
/// `target + 1 .. target + 1 + angles.len().log2()`: the rotation angle is
/// `angles[p]` when the control register reads `p`.
pub fn uniformly_controlled_ry(n: usize, target: usize, angles: &[f64]) -> Result<Circuit> {
    let k = angles.len().trailing_zeros() as usize;
    if !angles.len().is_power_of_two() || target + k >= n {
        return Err(QfemError::InvalidVector(format!(
            "{} angles do not fit a multiplexor on qubit {target} of {n}",
            angles.len()
        )));
    }
    let mut circuit = Circuit::new(n)?;
    if k == 0 {
        circuit.push(Gate::ry(target, angles[0]))?;
        return Ok(circuit);
    }
    let count = angles.len();
    let scale = 1.0 / count as f64;
    for i in 0..count {
        let g = gray(i);
        let theta: f64 = angles
            .iter()
            .enumerate()
            .map(|(p, a)| if (p & g).count_ones().is_multiple_of(2) { *a } else { -*a })
            .sum::<f64>()
            * scale;
        circuit.push(Gate::ry(target, theta))?;
        let flip = if i + 1 < count { g ^ gray(i + 1) } else { g };
        let bit = flip.trailing_zeros() as usize;
        circuit.push(Gate::x(target).with_control(Control::closed(target + 1 + bit)))?;
    }
    Ok(circuit)
}

/// Circuit U with U|0⟩ = f / ‖f‖ for a real vector f of length 2^n.
///
/// Qubits are fixed from the top: the rotation on qubit q is multiplexed by
/// the bits of the qubits above it. Inner levels split the weight of a block
/// between its halves; the last level also carries the signs.
pub fn prepare_force_state(f: &[f64]) -> Result<Circuit> {
    if f.len() < 2 || !f.len().is_power_of_two() {
        return Err(QfemError::InvalidVector(format!("length {} is not a power of two ≥ 2", f.len())));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(QfemError::InvalidVector("non-finite entry".into()));
    }
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(QfemError::InvalidVector("zero vector cannot be encoded".into()));
    }
    let n = f.len().trailing_zeros() as usize;
    let mut circuit = Circuit::new(n)?;
    for q in (0..n).rev() {
        let block = 1usize << (q + 1);
        let half = block / 2;
        let angles: Vec<f64> = f
            .chunks(block)
            .map(|chunk| {
                if q == 0 {
                    2.0 * chunk[1].atan2(chunk[0])
                } else {
                    let low = chunk[..half].iter().map(|v| v * v).sum::<f64>().sqrt();
                    let high = chunk[half..].iter().map(|v| v * v).sum::<f64>().sqrt();
                    2.0 * high.atan2(low)
                }
            })
            .collect();
        circuit.append(&uniformly_controlled_ry(n, q, &angles)?)?;
    }
    Ok(circuit)
}
