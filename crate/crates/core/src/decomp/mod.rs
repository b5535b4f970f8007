//! Stiffness matrix as a linear combination of unitaries.
//!
//! Each global element matrix is a small block on consecutive unknowns and is
//! rewritten with the identity, neighbour swaps X_e (states e − 1 ↔ e), skip
//! swaps X̃_A (A − 1 ↔ A + 1) and diagonal ±1 phases. Swap circuits come from
//! the generator split e = 2^j (2i + 1): j fixes the circuit shape and the bits
//! of i fix the pure controls on qubits j + 1 … n − 1.
//!
//! Boundary elements lose the rows of eliminated nodes; what survives is
//! again written with phases, e.g. a single surviving linear row r gives
//! (c / 2h)(I − D_r) with D_r the phase on state r. For quadratic meshes the
//! row pattern 16, 7 of the first element yields the phase on state 1, and the
//! mirrored pattern 7, 16 of the last element the phase on the row of its
//! first node (state N − 3 with both ends eliminated).

mod circuits;
mod lcu;
mod reference;

pub use circuits::{
    generator_index, generator_indices, phase_circuit, transposition_circuit, x_circuit, xtilde_circuit, PhaseForm,
    SwapForm,
};
pub use lcu::{
    auto_groups, boundary_circuits, concat_unique, decompose, decompose_unique, decompose_with, relative_error,
    CircuitOptions, LcuDecomposition, TermKind, TermLabel, TermRecord, TermRole, UnitaryTerm,
};
pub use reference::SignedPermutation;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_direct, BoundaryCondition, BoundarySpec, Forcing, Mesh1D, Order};

    fn mixed_bcs() -> Vec<BoundarySpec> {
        use BoundaryCondition::*;
        vec![
            BoundarySpec::homogeneous(),
            BoundarySpec { left: Dirichlet { value: 1.0, penalty: 100.0 }, right: DirichletHomogeneous },
            BoundarySpec { left: DirichletHomogeneous, right: Neumann { derivative: 0.3 } },
            BoundarySpec { left: Neumann { derivative: -1.0 }, right: DirichletHomogeneous },
            BoundarySpec { left: Dirichlet { value: 1.0, penalty: 50.0 }, right: Neumann { derivative: 0.0 } },
            BoundarySpec {
                left: Dirichlet { value: 1.0, penalty: 80.0 },
                right: Dirichlet { value: 2.0, penalty: 80.0 },
            },
        ]
    }

    fn ragged_mesh(n: usize, order: Order, bc: &BoundarySpec) -> Mesh1D {
        let count = crate::fem::element_count(order, n, bc).unwrap();
        let raw: Vec<f64> = (0..count).map(|e| 1.0 + 0.37 * ((e * 7 + 3) % 5) as f64).collect();
        let total: f64 = raw.iter().sum();
        let lengths = raw.iter().map(|h| h / total).collect();
        let coefficients = (0..count).map(|e| 0.5 + ((e * 3 + 1) % 4) as f64).collect();
        Mesh1D::new(n, order, 0.0, 1.0, lengths, coefficients).unwrap()
    }

    #[test]
    fn reconstructs_direct_assembly() {
        let b = Forcing::new(vec![1.0]).unwrap();
        for order in [Order::Linear, Order::Quadratic] {
            for bc in mixed_bcs() {
                for n in 2..=5 {
                    let mesh = ragged_mesh(n, order, &bc);
                    let sys = assemble_direct(&mesh, &bc, &b).unwrap();
                    let lcu = decompose(&mesh, &bc).unwrap();
                    assert!(relative_error(&lcu.reconstruct(), &sys.k) < 1e-12, "{order:?} {bc:?} n={n}");
                    let from_circuits = lcu.reconstruct_from_circuits().unwrap();
                    assert!(relative_error(&from_circuits, &sys.k) < 1e-10, "{order:?} {bc:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn homogeneous_term_counts() {
        let bc = BoundarySpec::homogeneous();
        for n in 2..=5 {
            let lin = decompose(&Mesh1D::uniform(n, Order::Linear, &bc, 0.0, 1.0, 1.0).unwrap(), &bc).unwrap();
            assert_eq!(lin.num_terms(), (1 << n) + 2);
            let mesh = Mesh1D::uniform(n, Order::Quadratic, &bc, 0.0, 1.0, 1.0).unwrap();
            let quad = decompose(&mesh, &bc).unwrap();
            assert_eq!(quad.num_terms(), 3 * mesh.num_elements() + 3);
        }
    }

    #[test]
    fn unique_counts_and_exactness() {
        let bc = BoundarySpec::homogeneous();
        let b = Forcing::new(vec![0.0, 1.0]).unwrap();
        for n in 2..=6 {
            let mesh = Mesh1D::uniform(n, Order::Linear, &bc, 0.0, 1.0, 1.3).unwrap();
            let unique = decompose_unique(&mesh, &bc).unwrap();
            assert_eq!(unique.num_terms(), 4);
            let k = assemble_direct(&mesh, &bc, &b).unwrap().k;
            assert!(relative_error(&unique.reconstruct_from_circuits().unwrap(), &k) < 1e-10);
        }
        for n in 3..=6 {
            let mesh = Mesh1D::uniform(n, Order::Quadratic, &bc, 0.0, 1.0, 0.7).unwrap();
            let unique = decompose_unique(&mesh, &bc).unwrap();
            assert_eq!(unique.num_terms(), 9, "n={n}");
            let k = assemble_direct(&mesh, &bc, &b).unwrap().k;
            assert!(relative_error(&unique.reconstruct_from_circuits().unwrap(), &k) < 1e-10);
        }
    }

    #[test]
    fn singleton_groups_change_nothing() {
        let bc = BoundarySpec::homogeneous();
        let mesh = Mesh1D::uniform(3, Order::Quadratic, &bc, 0.0, 1.0, 1.0).unwrap();
        let lcu = decompose(&mesh, &bc).unwrap();
        let singles: Vec<Vec<usize>> = (0..lcu.num_terms()).map(|t| vec![t]).collect();
        assert_eq!(concat_unique(&lcu, &singles).unwrap(), lcu);
        assert_eq!(concat_unique(&lcu, &[]).unwrap(), lcu);
    }

    #[test]
    fn grouping_rejects_unequal_or_overlapping() {
        let bc = BoundarySpec::homogeneous();
        let mesh = ragged_mesh(3, Order::Linear, &bc);
        let lcu = decompose(&mesh, &bc).unwrap();
        // Terms 2 and 4 are swaps of elements with different (h, c).
        assert!(concat_unique(&lcu, &[vec![2, 4]]).is_err());
        let uniform = Mesh1D::uniform(3, Order::Linear, &bc, 0.0, 1.0, 1.0).unwrap();
        let lcu = decompose(&uniform, &bc).unwrap();
        // Neighbouring swaps share a state.
        assert!(concat_unique(&lcu, &[vec![2, 3]]).is_err());
        assert!(concat_unique(&lcu, &[vec![2], vec![2]]).is_err());
        assert!(concat_unique(&lcu, &[vec![0, 2]]).is_err());
        assert!(concat_unique(&lcu, &[vec![99]]).is_err());
    }

    #[test]
    fn linear_labels_follow_generator() {
        let bc = BoundarySpec::homogeneous();
        let mesh = Mesh1D::uniform(3, Order::Linear, &bc, 0.0, 1.0, 1.0).unwrap();
        let lcu = decompose(&mesh, &bc).unwrap();
        let xs: Vec<(usize, (usize, usize))> = lcu
            .terms
            .iter()
            .filter(|t| t.label.kind == TermKind::X)
            .map(|t| (t.label.index.unwrap(), t.label.generator.unwrap()))
            .collect();
        let expected: Vec<(usize, (usize, usize))> = (1..8).map(|e| (e, generator_indices(3, e).unwrap())).collect();
        assert_eq!(xs, expected);
        let phases: Vec<Vec<usize>> = lcu
            .terms
            .iter()
            .filter(|t| t.label.role == TermRole::BoundaryPhase)
            .map(|t| t.reference.negated())
            .collect();
        assert_eq!(phases, vec![vec![0], vec![7]]);
    }

    #[test]
    fn quadratic_boundary_unitaries() {
        let bc = BoundarySpec::homogeneous();
        let n = 3;
        let terms = boundary_circuits(n, Order::Quadratic, &bc).unwrap();
        let negated: Vec<Vec<usize>> = terms.iter().map(|t| t.reference.negated()).collect();
        // First element: phase on 1, pair {0, 1}. Last: phase on N − 3, pair
        // {N − 3, N − 2}. Padding: N − 1.
        assert_eq!(negated, vec![vec![1], vec![0, 1], vec![5], vec![5, 6], vec![7]]);
        for t in &terms {
            assert!(t.circuit_error().unwrap() < 1e-12);
        }
        // Pair {0, 1} is a single controlled Ry(2π); {5, 6} needs two phase gates.
        assert_eq!(terms[1].circuit.len(), 1);
        assert_eq!(terms[3].circuit.len(), 2);
    }

    #[test]
    fn alternative_circuit_forms_agree() {
        let bc = BoundarySpec::homogeneous();
        let mesh = Mesh1D::uniform(4, Order::Linear, &bc, 0.0, 1.0, 1.0).unwrap();
        let a = decompose(&mesh, &bc).unwrap();
        let options = CircuitOptions { swap_form: SwapForm::ThreeCx, phase_form: PhaseForm::MultiControlledZ };
        let b = decompose_with(&mesh, &bc, options).unwrap();
        let ka = a.reconstruct_from_circuits().unwrap();
        let kb = b.reconstruct_from_circuits().unwrap();
        assert!(relative_error(&ka, &kb) < 1e-12);
        assert!(a.max_circuit_error().unwrap() < 1e-12);
        assert!(b.max_circuit_error().unwrap() < 1e-12);
    }
}
