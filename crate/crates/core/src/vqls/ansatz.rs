use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QfemError, Result};
use crate::qsim::{check_qubits, Circuit, Gate, Statevector};

/// The four fixed-structure Ry ansatz families.
///
/// Every family starts with Ry on all qubits; each layer then adds:
/// - A1: alternating brick wall. Even layers (counting from 0) put CZ on
///   (0,1), (2,3), …; odd layers put CZ on (1,2), (3,4), … plus the
///   non-neighbour pair (n−1, 0) for n ≥ 3. Ry on all qubits follows each.
///   Putting the whole ring in every layer does not work: with every qubit's
///   CZ degree even, Y⊗ⁿ commutes with the circuit and ⟨v|Y⊗ⁿ|v⟩ = 0 for all
///   θ, which excludes all-positive states at even n. A full chain per layer
///   has a similar problem, because its reachable set stops growing with depth.
/// - A2: CZ on (0,1), (2,3), …, Ry on all qubits, CZ on (1,2), (3,4), …, then
///   Ry on the qubits of those odd pairs.
/// - A3: CX ring q_k → q_{k+1} closed by q_{n−1} → q_0 for n ≥ 3, then Ry on
///   all qubits.
/// - A4: CX chain q_k → q_{k+1}, then Ry on all qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzFamily {
    #[serde(alias = "A1")]
    A1,
    #[serde(alias = "A2")]
    A2,
    #[serde(alias = "A3")]
    A3,
    #[serde(alias = "A4")]
    A4,
}

impl AnsatzFamily {
    pub const ALL: [AnsatzFamily; 4] = [AnsatzFamily::A1, AnsatzFamily::A2, AnsatzFamily::A3, AnsatzFamily::A4];
}

impl fmt::Display for AnsatzFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AnsatzFamily::A1 => "A1",
            AnsatzFamily::A2 => "A2",
            AnsatzFamily::A3 => "A3",
            AnsatzFamily::A4 => "A4",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub n: usize,
    pub layers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Ry { qubit: usize, param: usize },
    Cz(usize, usize),
    Cx { control: usize, target: usize },
}

impl AnsatzSpec {
    pub fn new(family: AnsatzFamily, n: usize, layers: usize) -> Result<Self> {
        check_qubits(n)?;
        if layers == 0 {
            return Err(QfemError::Config("ansatz needs at least one layer".into()));
        }
        Ok(Self { family, n, layers })
    }

    /// A1, A3, A4: n(L + 1). A2: n + L(n + 2⌊(n − 1)/2⌋), i.e. n + 6L at n = 4.
    pub fn parameter_count(&self) -> usize {
        let (n, l) = (self.n, self.layers);
        match self.family {
            AnsatzFamily::A2 => n + l * (n + 2 * ((n - 1) / 2)),
            _ => n * (l + 1),
        }
    }

    fn ops(&self) -> Vec<Op> {
        let n = self.n;
        let mut ops = Vec::new();
        let mut param = 0;
        let mut ry = |ops: &mut Vec<Op>, qubits: &mut dyn Iterator<Item = usize>| {
            for qubit in qubits {
                ops.push(Op::Ry { qubit, param });
                param += 1;
            }
        };
        let even_pairs: Vec<(usize, usize)> = (0..n.saturating_sub(1)).step_by(2).map(|k| (k, k + 1)).collect();
        let odd_pairs: Vec<(usize, usize)> = (1..n.saturating_sub(1)).step_by(2).map(|k| (k, k + 1)).collect();
        ry(&mut ops, &mut (0..n));
        for layer in 0..self.layers {
            match self.family {
                AnsatzFamily::A1 => {
                    if layer % 2 == 0 {
                        ops.extend(even_pairs.iter().map(|&(a, b)| Op::Cz(a, b)));
                    } else {
                        ops.extend(odd_pairs.iter().map(|&(a, b)| Op::Cz(a, b)));
                        if n >= 3 {
                            ops.push(Op::Cz(n - 1, 0));
                        }
                    }
                    ry(&mut ops, &mut (0..n));
                }
                AnsatzFamily::A2 => {
                    ops.extend(even_pairs.iter().map(|&(a, b)| Op::Cz(a, b)));
                    ry(&mut ops, &mut (0..n));
                    ops.extend(odd_pairs.iter().map(|&(a, b)| Op::Cz(a, b)));
                    ry(&mut ops, &mut odd_pairs.iter().flat_map(|&(a, b)| [a, b]));
                }
                AnsatzFamily::A3 => {
                    ops.extend((0..n - 1).map(|k| Op::Cx { control: k, target: k + 1 }));
                    if n >= 3 {
                        ops.push(Op::Cx { control: n - 1, target: 0 });
                    }
                    ry(&mut ops, &mut (0..n));
                }
                AnsatzFamily::A4 => {
                    ops.extend((0..n - 1).map(|k| Op::Cx { control: k, target: k + 1 }));
                    ry(&mut ops, &mut (0..n));
                }
            }
        }
        debug_assert_eq!(param, self.parameter_count());
        ops
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.parameter_count() {
            return Err(QfemError::ParameterLength { expected: self.parameter_count(), actual: theta.len() });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(QfemError::InvalidVector("non-finite ansatz angle".into()));
        }
        Ok(())
    }
}

impl fmt::Display for AnsatzSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={}, L={})", self.family, self.n, self.layers)
    }
}

/// V(θ) as a gate list.
pub fn build_ansatz(spec: &AnsatzSpec, theta: &[f64]) -> Result<Circuit> {
    spec.check(theta)?;
    let gates = spec
        .ops()
        .into_iter()
        .map(|op| match op {
            Op::Ry { qubit, param } => Gate::ry(qubit, theta[param]),
            Op::Cz(a, b) => Gate::cz(a, b),
            Op::Cx { control, target } => Gate::cx(control, target),
        })
        .collect();
    Circuit::from_gates(spec.n, gates)
}

/// Compiled ansatz evaluated on real amplitudes; every gate of the families
/// is real, so V(θ)|0⟩ is a real vector.
#[derive(Debug, Clone)]
pub struct Ansatz {
    spec: AnsatzSpec,
    ops: Vec<Op>,
}

impl Ansatz {
    pub fn new(spec: AnsatzSpec) -> Self {
        Self { spec, ops: spec.ops() }
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn parameter_count(&self) -> usize {
        self.spec.parameter_count()
    }

    /// V(θ)|0⟩ as real amplitudes.
    pub fn real_state(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.spec.check(theta)?;
        let mut amps = vec![0.0; 1 << self.spec.n];
        amps[0] = 1.0;
        for op in &self.ops {
            match *op {
                Op::Ry { qubit, param } => {
                    let (s, c) = (0.5 * theta[param]).sin_cos();
                    let bit = 1 << qubit;
                    for i in (0..amps.len()).filter(|i| i & bit == 0) {
                        let (a0, a1) = (amps[i], amps[i | bit]);
                        amps[i] = c * a0 - s * a1;
                        amps[i | bit] = s * a0 + c * a1;
                    }
                }
                Op::Cz(a, b) => {
                    let mask = (1 << a) | (1 << b);
                    for (i, v) in amps.iter_mut().enumerate() {
                        if i & mask == mask {
                            *v = -*v;
                        }
                    }
                }
                Op::Cx { control, target } => {
                    let (cbit, tbit) = (1 << control, 1 << target);
                    for i in 0..amps.len() {
                        if i & cbit != 0 && i & tbit == 0 {
                            amps.swap(i, i | tbit);
                        }
                    }
                }
            }
        }
        Ok(amps)
    }

    pub fn state(&self, theta: &[f64]) -> Result<Statevector> {
        Statevector::from_real(&self.real_state(theta)?)
    }
}
