use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::circuits::{
    generator_indices, phase_circuit, transposition_circuit, x_circuit, xtilde_circuit, PhaseForm, SwapForm,
};
use super::reference::SignedPermutation;
use crate::error::{QfemError, Result};
use crate::fem::{penalty_terms, BoundarySpec, DofMap, Mesh1D, Order};
use crate::qsim::{circuit_unitary, Circuit, MAX_DENSE_QUBITS};

/// Which family a unitary belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermKind {
    Identity,
    /// Swap of neighbouring states e − 1 and e.
    X,
    /// Swap of states A − 1 and A + 1 for even A.
    XTilde,
    /// Any other transposition.
    Swap,
    /// Diagonal ±1 matrix.
    Phase,
    /// Product of several members with disjoint supports.
    Concat,
}

/// The place a term takes in the element pattern it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermRole {
    Identity,
    /// Coupling of local nodes 0 and 1 of an interior element.
    Swap01,
    /// Coupling of local nodes 1 and 2 of a quadratic element.
    Swap12,
    /// Coupling of local nodes 0 and 2 of a quadratic element.
    Swap02,
    /// Single-state phase of an element touching an eliminated boundary.
    BoundaryPhase,
    /// Surviving coupling of a quadratic boundary element.
    BoundarySwap,
    /// Two-state phase of a quadratic boundary element.
    BoundaryPhasePair,
    /// Penalty enforcing a non-homogeneous Dirichlet value.
    Penalty,
    /// Padding row of a quadratic mesh.
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermLabel {
    pub kind: TermKind,
    pub role: TermRole,
    /// Elements the term was built from.
    pub elements: Vec<usize>,
    /// Subscript e of X_e or A of X̃_A.
    pub index: Option<usize>,
    /// (i, j) with index = 2^j (2i + 1).
    pub generator: Option<(usize, usize)>,
    /// Names of the merged members of a concatenated term.
    pub parts: Vec<String>,
}

impl TermLabel {
    fn new(kind: TermKind, role: TermRole, elements: Vec<usize>) -> Self {
        Self { kind, role, elements, index: None, generator: None, parts: Vec::new() }
    }
}

impl fmt::Display for TermLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.index, self.generator) {
            (TermKind::Identity, ..) => write!(f, "I"),
            (TermKind::X, Some(e), Some((i, j))) => write!(f, "X_{e}=X_{i}^{j}"),
            (TermKind::XTilde, Some(a), Some((i, j))) => write!(f, "Xt_{a}=Xt_{i}^{j}"),
            (TermKind::Concat, ..) => write!(f, "[{}]", self.parts.join("*")),
            (kind, ..) => {
                let name = match kind {
                    TermKind::Phase if self.role == TermRole::Penalty => "P",
                    TermKind::Phase => "Iinv",
                    _ => "S",
                };
                let els: Vec<String> = self.elements.iter().map(|e| e.to_string()).collect();
                write!(f, "{name}{{{}}}", els.join(","))
            }
        }
    }
}

/// One coefficient-unitary pair of the decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryTerm {
    pub coefficient: f64,
    pub circuit: Circuit,
    /// The matrix the circuit must implement.
    pub reference: SignedPermutation,
    pub label: TermLabel,
}

/// Serializable summary of a term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub name: String,
    pub coefficient: f64,
    pub label: TermLabel,
    pub swaps: Vec<(usize, usize)>,
    pub phases: Vec<usize>,
    pub circuit: Circuit,
}

impl UnitaryTerm {
    /// c·I on n qubits.
    pub fn identity(n: usize, coefficient: f64) -> Result<Self> {
        Self::identity_with_role(n, coefficient, TermRole::Identity)
    }

    fn identity_with_role(n: usize, coefficient: f64, role: TermRole) -> Result<Self> {
        Ok(UnitaryTerm {
            coefficient,
            circuit: Circuit::new(n)?,
            reference: SignedPermutation::identity(1 << n),
            label: TermLabel::new(TermKind::Identity, role, Vec::new()),
        })
    }

    pub fn record(&self) -> TermRecord {
        TermRecord {
            name: self.label.to_string(),
            coefficient: self.coefficient,
            label: self.label.clone(),
            swaps: self.reference.swaps(),
            phases: self.reference.negated(),
            circuit: self.circuit.clone(),
        }
    }

    /// Max-abs difference between the circuit unitary and the reference matrix.
    pub fn circuit_error(&self) -> Result<f64> {
        let u = circuit_unitary(&self.circuit)?;
        let r = self.reference.to_dense();
        Ok(u.iter().zip(r.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// K = Σ_l c_l K_l with every K_l a circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuDecomposition {
    pub n: usize,
    pub terms: Vec<UnitaryTerm>,
}

impl LcuDecomposition {
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    /// Σ c_l K_l from the reference matrices.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut k = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            k += t.reference.to_dense() * t.coefficient;
        }
        k
    }

    /// Σ c_l K_l from the simulated circuits.
    pub fn reconstruct_from_circuits(&self) -> Result<DMatrix<f64>> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(QfemError::TooLargeForDense { n: self.n, max: MAX_DENSE_QUBITS });
        }
        let dim = self.dim();
        let mut k = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            let u = circuit_unitary(&t.circuit)?;
            if u.iter().any(|z| z.im.abs() > 1e-12) {
                return Err(QfemError::InvalidGate(format!("term {} is not real", t.label)));
            }
            k += u.map(|z| z.re) * t.coefficient;
        }
        Ok(k)
    }

    /// K x using the reference matrices.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for t in &self.terms {
            for (acc, v) in y.iter_mut().zip(t.reference.apply(x)) {
                *acc += t.coefficient * v;
            }
        }
        y
    }

    /// Largest circuit-vs-reference deviation over all terms.
    pub fn max_circuit_error(&self) -> Result<f64> {
        self.terms.iter().try_fold(0.0f64, |acc, t| Ok(acc.max(t.circuit_error()?)))
    }

    pub fn records(&self) -> Vec<TermRecord> {
        self.terms.iter().map(UnitaryTerm::record).collect()
    }
}

/// Relative Frobenius distance ‖A − B‖ / ‖B‖.
pub fn relative_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Circuit drawing choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CircuitOptions {
    pub swap_form: SwapForm,
    pub phase_form: PhaseForm,
}

struct Builder {
    n: usize,
    dim: usize,
    options: CircuitOptions,
    identity: f64,
    terms: Vec<UnitaryTerm>,
}

impl Builder {
    fn swap(&mut self, coefficient: f64, a: usize, b: usize, role: TermRole, element: usize) -> Result<()> {
        let (a, b) = (a.min(b), a.max(b));
        let mut label = TermLabel::new(TermKind::Swap, role, vec![element]);
        let circuit = if b == a + 1 {
            let (i, j) = generator_indices(self.n, b)?;
            label.kind = TermKind::X;
            label.index = Some(b);
            label.generator = Some((i, j));
            x_circuit(self.n, i, j, self.options.swap_form)?
        } else if b == a + 2 && a % 2 == 1 {
            let (i, j) = generator_indices(self.n, a + 1)?;
            label.kind = TermKind::XTilde;
            label.index = Some(a + 1);
            label.generator = Some((i, j));
            xtilde_circuit(self.n, i, j)?
        } else {
            transposition_circuit(self.n, a, b)?
        };
        let reference = SignedPermutation::transposition(self.dim, a, b);
        self.terms.push(UnitaryTerm { coefficient, circuit, reference, label });
        Ok(())
    }

    fn phase(&mut self, coefficient: f64, states: &[usize], role: TermRole, elements: Vec<usize>) -> Result<()> {
        let circuit = phase_circuit(self.n, states, self.options.phase_form)?;
        let reference = SignedPermutation::phase(self.dim, states);
        let label = TermLabel::new(TermKind::Phase, role, elements);
        self.terms.push(UnitaryTerm { coefficient, circuit, reference, label });
        Ok(())
    }

    /// `weight · (I − D)` with D the phase on `states`, i.e. 2·weight on each state.
    fn diagonal(&mut self, weight: f64, states: &[usize], role: TermRole, elements: Vec<usize>) -> Result<()> {
        self.identity += weight;
        self.phase(-weight, states, role, elements)
    }

    fn linear_element(&mut self, e: usize, rows: &[Option<usize>], kappa: f64) -> Result<()> {
        match (rows[0], rows[1]) {
            (Some(r0), Some(r1)) => {
                self.identity += kappa;
                self.swap(-kappa, r0, r1, TermRole::Swap01, e)
            }
            (Some(r), None) | (None, Some(r)) => self.diagonal(0.5 * kappa, &[r], TermRole::BoundaryPhase, vec![e]),
            (None, None) => Err(QfemError::InvalidMesh(format!("element {e} has no unknowns"))),
        }
    }

    /// Quadratic element with local matrix kappa · [[7,−8,1],[−8,16,−8],[1,−8,7]].
    fn quadratic_element(&mut self, e: usize, rows: &[Option<usize>], kappa: f64) -> Result<()> {
        match (rows[0], rows[1], rows[2]) {
            (Some(r0), Some(r1), Some(r2)) => {
                self.identity += 15.0 * kappa;
                self.swap(-8.0 * kappa, r0, r1, TermRole::Swap01, e)?;
                self.swap(-8.0 * kappa, r1, r2, TermRole::Swap12, e)?;
                self.swap(kappa, r0, r2, TermRole::Swap02, e)
            }
            // Surviving block [[16, −8], [−8, 7]] (or its mirror) on rows (mid, end):
            // ½(15 I + 9 D_end − 16 S − 8 D_{mid,end}).
            (None, Some(mid), Some(end)) | (Some(end), Some(mid), None) => {
                self.identity += 7.5 * kappa;
                self.phase(4.5 * kappa, &[end], TermRole::BoundaryPhase, vec![e])?;
                self.swap(-8.0 * kappa, mid, end, TermRole::BoundarySwap, e)?;
                let mut pair = [mid, end];
                pair.sort_unstable();
                self.phase(-4.0 * kappa, &pair, TermRole::BoundaryPhasePair, vec![e])
            }
            (None, Some(mid), None) => self.diagonal(8.0 * kappa, &[mid], TermRole::BoundaryPhase, vec![e]),
            _ => Err(QfemError::InvalidMesh(format!("element {e} has an eliminated interior node"))),
        }
    }
}

/// Decomposition of the assembled stiffness matrix with default circuit forms.
pub fn decompose(mesh: &Mesh1D, bc: &BoundarySpec) -> Result<LcuDecomposition> {
    decompose_with(mesh, bc, CircuitOptions::default())
}

/// Rewrites every global element matrix, penalty and padding row as a sum of
/// identity, transposition and phase unitaries. The identity parts of all
/// element terms are collected into the first term; the padding row keeps its
/// own identity term so that it stays visible as a separate pair.
pub fn decompose_with(mesh: &Mesh1D, bc: &BoundarySpec, options: CircuitOptions) -> Result<LcuDecomposition> {
    bc.validate()?;
    let dofs = DofMap::new(mesh, bc)?;
    let mut b = Builder { n: mesh.n, dim: dofs.dim, options, identity: 0.0, terms: Vec::new() };
    for e in 0..mesh.num_elements() {
        let (h, c) = (mesh.lengths[e], mesh.coefficients[e]);
        let rows = dofs.element_rows(mesh.order, e);
        match mesh.order {
            Order::Linear => b.linear_element(e, &rows, c / h)?,
            Order::Quadratic => b.quadratic_element(e, &rows, c / (3.0 * h))?,
        }
    }
    for (row, penalty, _) in penalty_terms(bc, &dofs) {
        b.diagonal(0.5 * penalty, &[row], TermRole::Penalty, Vec::new())?;
    }
    let identity = |coefficient: f64, role: TermRole| UnitaryTerm::identity_with_role(mesh.n, coefficient, role);
    let mut terms = vec![identity(b.identity, TermRole::Identity)?];
    terms.append(&mut b.terms);
    if let Some(aux) = dofs.auxiliary {
        terms.push(identity(0.5, TermRole::Auxiliary)?);
        let circuit = phase_circuit(mesh.n, &[aux], options.phase_form)?;
        terms.push(UnitaryTerm {
            coefficient: -0.5,
            circuit,
            reference: SignedPermutation::phase(dofs.dim, &[aux]),
            label: TermLabel::new(TermKind::Phase, TermRole::Auxiliary, Vec::new()),
        });
    }
    if terms[0].coefficient <= 0.0 {
        return Err(QfemError::Grouping("identity coefficient must be positive".into()));
    }
    Ok(LcuDecomposition { n: mesh.n, terms })
}

/// Boundary unitaries (phases, penalties, padding) of a uniform mesh with unit
/// coefficients.
pub fn boundary_circuits(n: usize, order: Order, bc: &BoundarySpec) -> Result<Vec<UnitaryTerm>> {
    let mesh = Mesh1D::uniform(n, order, bc, 0.0, 1.0, 1.0)?;
    let lcu = decompose(&mesh, bc)?;
    Ok(lcu
        .terms
        .into_iter()
        .filter(|t| t.label.kind == TermKind::Phase)
        .map(|t| UnitaryTerm { coefficient: 1.0, ..t })
        .collect())
}

fn same_coefficient(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Merges each group of equal-coefficient terms with disjoint supports into a
/// single product unitary: Σ κ U_k = κ Π U_k + (m − 1) κ I. Identity terms in
/// a group are summed. Terms outside every group are kept unchanged.
pub fn concat_unique(lcu: &LcuDecomposition, groups: &[Vec<usize>]) -> Result<LcuDecomposition> {
    let count = lcu.terms.len();
    let mut owner = vec![None; count];
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(QfemError::Grouping(format!("group {g} is empty")));
        }
        for &t in group {
            if t >= count {
                return Err(QfemError::Grouping(format!("term {t} out of range ({count} terms)")));
            }
            if owner[t].replace(g).is_some() {
                return Err(QfemError::Grouping(format!("term {t} appears in more than one group")));
            }
        }
    }
    if lcu.terms[0].label.kind != TermKind::Identity {
        return Err(QfemError::Grouping("first term must be the identity".into()));
    }

    let mut identity_extra = 0.0;
    let mut merged: Vec<(usize, UnitaryTerm)> = Vec::new();
    let mut done = vec![false; groups.len()];
    for t in 0..count {
        let Some(g) = owner[t] else {
            merged.push((t, lcu.terms[t].clone()));
            continue;
        };
        if std::mem::replace(&mut done[g], true) {
            continue;
        }
        let members: Vec<&UnitaryTerm> = groups[g].iter().map(|&k| &lcu.terms[k]).collect();
        let identities = members.iter().filter(|m| m.label.kind == TermKind::Identity).count();
        if identities == members.len() {
            let mut term = members[0].clone();
            term.coefficient = members.iter().map(|m| m.coefficient).sum();
            merged.push((t, term));
            continue;
        }
        if identities > 0 {
            return Err(QfemError::Grouping(format!("group {g} mixes identity and non-identity terms")));
        }
        let kappa = members[0].coefficient;
        if let Some(m) = members.iter().find(|m| !same_coefficient(m.coefficient, kappa)) {
            return Err(QfemError::Grouping(format!(
                "group {g}: coefficient {} of {} differs from {kappa}; elements need equal (h, c)",
                m.coefficient, m.label
            )));
        }
        let mut covered = vec![false; lcu.dim()];
        for m in &members {
            for s in m.reference.support() {
                if std::mem::replace(&mut covered[s], true) {
                    return Err(QfemError::Grouping(format!("group {g}: supports overlap at state {s}")));
                }
            }
        }
        if members.len() == 1 {
            merged.push((t, members[0].clone()));
            continue;
        }
        let mut circuit = Circuit::new(lcu.n)?;
        let mut reference = SignedPermutation::identity(lcu.dim());
        for m in &members {
            circuit.append(&m.circuit)?;
            reference = m.reference.compose(&reference)?;
        }
        let mut label = TermLabel::new(TermKind::Concat, members[0].label.role, Vec::new());
        label.elements = members.iter().flat_map(|m| m.label.elements.iter().copied()).collect();
        label.elements.sort_unstable();
        label.elements.dedup();
        label.parts = members.iter().map(|m| m.label.to_string()).collect();
        identity_extra += (members.len() - 1) as f64 * kappa;
        merged.push((t, UnitaryTerm { coefficient: kappa, circuit, reference, label }));
    }

    merged.sort_by_key(|(t, _)| *t);
    let mut terms: Vec<UnitaryTerm> = merged.into_iter().map(|(_, term)| term).collect();
    terms[0].coefficient += identity_extra;
    Ok(LcuDecomposition { n: lcu.n, terms })
}

/// Greedy grouping: all identity terms together, then for each role, terms
/// with equal coefficients packed first-fit into groups with disjoint supports.
pub fn auto_groups(lcu: &LcuDecomposition) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let identities: Vec<usize> =
        (0..lcu.terms.len()).filter(|&t| lcu.terms[t].label.kind == TermKind::Identity).collect();
    groups.push(identities);
    // (role, coefficient, covered states, group index)
    let mut bins: Vec<(TermRole, f64, Vec<bool>, usize)> = Vec::new();
    for (t, term) in lcu.terms.iter().enumerate() {
        if term.label.kind == TermKind::Identity {
            continue;
        }
        let support = term.reference.support();
        let slot = bins.iter().position(|(role, kappa, covered, _)| {
            *role == term.label.role
                && same_coefficient(*kappa, term.coefficient)
                && support.iter().all(|&s| !covered[s])
        });
        let bin = match slot {
            Some(b) => b,
            None => {
                groups.push(Vec::new());
                bins.push((term.label.role, term.coefficient, vec![false; lcu.dim()], groups.len() - 1));
                bins.len() - 1
            }
        };
        for &s in &support {
            bins[bin].2[s] = true;
        }
        groups[bins[bin].3].push(t);
    }
    groups
}

/// Decomposition followed by automatic unique-element concatenation.
pub fn decompose_unique(mesh: &Mesh1D, bc: &BoundarySpec) -> Result<LcuDecomposition> {
    let lcu = decompose(mesh, bc)?;
    concat_unique(&lcu, &auto_groups(&lcu))
}
