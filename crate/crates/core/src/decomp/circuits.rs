//! Circuits for the transposition and phase unitaries of the decomposition.
//!
//! A transposition of basis states a and b that differ in d bits is built as a
//! Gray-code ladder: walk from a to b flipping one differing bit at a time
//! (highest first), each step a fully controlled X whose controls pin every
//! other qubit to the current state, then walk back without the last step.
//! The ladder has 2d − 1 gates and touches no other basis state.

use serde::{Deserialize, Serialize};

use crate::error::{QfemError, Result};
use crate::qsim::{check_qubits, Circuit, Control, Gate};

/// Splits an unknown index e ≥ 1 as e = 2^j (2i + 1).
pub fn generator_indices(n: usize, e: usize) -> Result<(usize, usize)> {
    check_qubits(n)?;
    if e == 0 || e >= (1 << n) {
        return Err(QfemError::GeneratorRange(format!("index {e} outside 1..{}", (1usize << n) - 1)));
    }
    let j = e.trailing_zeros() as usize;
    let i = (e >> j) / 2;
    Ok((i, j))
}

/// Inverse of [`generator_indices`].
pub fn generator_index(i: usize, j: usize) -> usize {
    (2 * i + 1) << j
}

fn check_generator(n: usize, i: usize, j: usize) -> Result<()> {
    check_qubits(n)?;
    if j >= n || i >= (1 << (n - 1 - j)) {
        return Err(QfemError::GeneratorRange(format!("(i, j) = ({i}, {j}) invalid for {n} qubits")));
    }
    Ok(())
}

/// Controls pinning every qubit except `skip` to the bits of `state`.
fn pin_controls(n: usize, state: usize, skip: usize) -> Vec<Control> {
    (0..n)
        .filter(|&q| q != skip)
        .map(|q| if state >> q & 1 == 1 { Control::closed(q) } else { Control::open(q) })
        .collect()
}

/// Ladder circuit swapping basis states `a` and `b` and fixing all others.
pub fn transposition_circuit(n: usize, a: usize, b: usize) -> Result<Circuit> {
    check_qubits(n)?;
    let dim = 1usize << n;
    if a >= dim || b >= dim || a == b {
        return Err(QfemError::GeneratorRange(format!("cannot swap states {a} and {b} on {n} qubits")));
    }
    let diff = a ^ b;
    let bits: Vec<usize> = (0..n).rev().filter(|q| diff >> q & 1 == 1).collect();
    let mut steps = Vec::with_capacity(bits.len());
    let mut current = a;
    for &q in &bits {
        steps.push(Gate::x(q).with_controls(pin_controls(n, current, q)));
        current ^= 1 << q;
    }
    let mut gates = steps.clone();
    gates.extend(steps[..steps.len() - 1].iter().rev().cloned());
    Circuit::from_gates(n, gates)
}

/// How the j = 1 swaps are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwapForm {
    /// One controlled SWAP of q0 and q1.
    #[default]
    ControlledSwap,
    /// Three controlled X gates.
    ThreeCx,
}

/// Circuit of X_e with e = 2^j (2i + 1): swaps states e − 1 and e.
///
/// j = 0 is one controlled X on q0, j = 1 a controlled swap of q0 and q1 (or
/// three controlled X gates), and larger j the 2j + 1 gate ladder.
pub fn x_circuit(n: usize, i: usize, j: usize, form: SwapForm) -> Result<Circuit> {
    check_generator(n, i, j)?;
    let e = generator_index(i, j);
    if j == 1 && form == SwapForm::ControlledSwap {
        let controls = (2..n).map(|q| if e >> q & 1 == 1 { Control::closed(q) } else { Control::open(q) });
        return Circuit::from_gates(n, vec![Gate::swap(0, 1).with_controls(controls)]);
    }
    transposition_circuit(n, e - 1, e)
}

/// Circuit of X̃_A with A = 2^j (2i + 1), j ≥ 1: swaps states A − 1 and A + 1.
pub fn xtilde_circuit(n: usize, i: usize, j: usize) -> Result<Circuit> {
    check_generator(n, i, j)?;
    if j == 0 {
        return Err(QfemError::GeneratorRange("X̃ needs an even index (j ≥ 1)".into()));
    }
    let a = generator_index(i, j);
    transposition_circuit(n, a - 1, a + 1)
}

/// How a phase flip on basis state 0 is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseForm {
    /// Ry(2π) = −I on the pair {0, 1} followed by a phase on state 1.
    #[default]
    Rotation,
    /// X on q0, a phase on state 1, X on q0.
    MultiControlledZ,
}

/// Z on q0 with the other qubits pinned: phase −1 on the single state `s`.
fn single_phase(n: usize, s: usize, form: PhaseForm) -> Vec<Gate> {
    if s == 0 {
        let flip_one = Gate::z(0).with_controls(pin_controls(n, 1, 0));
        return match form {
            PhaseForm::Rotation => {
                vec![Gate::ry(0, 2.0 * std::f64::consts::PI).with_controls(pin_controls(n, 0, 0)), flip_one]
            }
            PhaseForm::MultiControlledZ => vec![Gate::x(0), flip_one, Gate::x(0)],
        };
    }
    let target = s.trailing_zeros() as usize;
    vec![Gate::z(target).with_controls(pin_controls(n, s, target))]
}

/// Diagonal circuit with phase −1 on every state in `states`.
///
/// Pairs {2k, 2k + 1} use one controlled Ry(2π) on q0; other states get one
/// fully controlled Z each.
pub fn phase_circuit(n: usize, states: &[usize], form: PhaseForm) -> Result<Circuit> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut sorted = states.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != states.len() || sorted.iter().any(|&s| s >= dim) {
        return Err(QfemError::GeneratorRange(format!("bad phase states {states:?} for {n} qubits")));
    }
    let mut gates = Vec::new();
    let mut k = 0;
    while k < sorted.len() {
        let s = sorted[k];
        if s.is_multiple_of(2) && sorted.get(k + 1) == Some(&(s + 1)) {
            gates.push(Gate::ry(0, 2.0 * std::f64::consts::PI).with_controls(pin_controls(n, s, 0)));
            k += 2;
        } else {
            gates.extend(single_phase(n, s, form));
            k += 1;
        }
    }
    Circuit::from_gates(n, gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::reference::SignedPermutation;
    use crate::qsim::circuit_unitary;

    fn assert_matches(circuit: &Circuit, reference: &SignedPermutation) {
        let u = circuit_unitary(circuit).unwrap();
        let r = reference.to_dense();
        let err = u.iter().zip(r.iter()).map(|(a, b)| (a.re - b).abs() + a.im.abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "circuit differs from reference by {err}");
    }

    #[test]
    fn generator_round_trip() {
        for n in 1..=6 {
            for e in 1..(1 << n) {
                let (i, j) = generator_indices(n, e).unwrap();
                assert_eq!(generator_index(i, j), e);
            }
        }
        assert_eq!(generator_indices(3, 6).unwrap(), (1, 1));
        assert_eq!(generator_indices(3, 4).unwrap(), (0, 2));
        assert!(generator_indices(3, 0).is_err());
        assert!(generator_indices(3, 8).is_err());
    }

    #[test]
    fn x_circuits_match_swaps() {
        for n in 1..=5 {
            let dim = 1 << n;
            for e in 1..dim {
                let (i, j) = generator_indices(n, e).unwrap();
                let reference = SignedPermutation::transposition(dim, e - 1, e);
                for form in [SwapForm::ControlledSwap, SwapForm::ThreeCx] {
                    let c = x_circuit(n, i, j, form).unwrap();
                    assert_matches(&c, &reference);
                }
                let ladder = x_circuit(n, i, j, SwapForm::ThreeCx).unwrap();
                assert_eq!(ladder.len(), 2 * j + 1);
            }
        }
    }

    #[test]
    fn xtilde_circuits_match_swaps() {
        for n in 2..=5 {
            let dim = 1 << n;
            for a in (2..dim - 1).step_by(2) {
                let (i, j) = generator_indices(n, a).unwrap();
                let c = xtilde_circuit(n, i, j).unwrap();
                assert_matches(&c, &SignedPermutation::transposition(dim, a - 1, a + 1));
                assert_eq!(c.len(), 2 * j - 1);
            }
        }
        assert!(xtilde_circuit(3, 1, 0).is_err());
    }

    #[test]
    fn three_qubit_xtilde_ladder() {
        // A = 4: |011⟩ → |111⟩ → |101⟩ and back.
        let c = xtilde_circuit(3, 0, 2).unwrap();
        let targets: Vec<usize> = c.gates().iter().map(|g| g.targets[0]).collect();
        assert_eq!(targets, vec![2, 1, 2]);
    }

    #[test]
    fn phase_forms_agree() {
        for n in 1..=4 {
            let dim = 1 << n;
            for s in 0..dim {
                let reference = SignedPermutation::phase(dim, &[s]);
                for form in [PhaseForm::Rotation, PhaseForm::MultiControlledZ] {
                    assert_matches(&phase_circuit(n, &[s], form).unwrap(), &reference);
                }
            }
            let pairs = [vec![0, 1], vec![dim - 2, dim - 1], vec![0, dim - 1]];
            for states in pairs.iter().filter(|s| s[0] != s[1]) {
                let reference = SignedPermutation::phase(dim, states);
                assert_matches(&phase_circuit(n, states, PhaseForm::Rotation).unwrap(), &reference);
            }
        }
    }

    #[test]
    fn arbitrary_transpositions() {
        let n = 4;
        for a in 0..16 {
            for b in 0..16 {
                if a != b {
                    let c = transposition_circuit(n, a, b).unwrap();
                    assert_matches(&c, &SignedPermutation::transposition(16, a, b));
                    assert_eq!(c.len(), 2 * (a ^ b).count_ones() as usize - 1);
                }
            }
        }
    }
}
