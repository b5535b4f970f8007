//! Classical 1-D finite elements for `(c(x) u')' + b(x) = 0`.
//!
//! Assembly follows the direct stiffness method: every element contributes a
//! full-size "global element matrix" and the stiffness matrix is their sum. The
//! same per-element matrices are what [`crate::decomp`] rewrites as unitaries.

mod mesh;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub use mesh::{element_count, BoundaryCondition, BoundarySpec, DofMap, Mesh1D, Order, DEFAULT_PENALTY};

use crate::error::{QfemError, Result};

/// Polynomial forcing `b(x) = Σ a_k x^k`, degree at most 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Forcing {
    pub coefficients: Vec<f64>,
}

impl Forcing {
    pub const MAX_DEGREE: usize = 4;

    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() > Self::MAX_DEGREE + 1 {
            return Err(QfemError::InvalidForcing(format!(
                "degree {} exceeds {}",
                coefficients.len() - 1,
                Self::MAX_DEGREE
            )));
        }
        if coefficients.iter().any(|a| !a.is_finite()) {
            return Err(QfemError::InvalidForcing("non-finite coefficient".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, a| acc * x + a)
    }
}

/// K u = f on 2^n unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem {
    pub k: DMatrix<f64>,
    pub f: DVector<f64>,
    pub n: usize,
    pub dofs: DofMap,
    /// Coordinate of the node behind each row; `None` for the auxiliary row.
    pub row_coordinates: Vec<Option<f64>>,
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.f.len()
    }
}

/// Local stiffness matrix of one element.
pub fn element_stiffness(order: Order, h: f64, c: f64) -> Result<DMatrix<f64>> {
    if !(h > 0.0 && h.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(QfemError::InvalidMesh(format!("element needs h > 0 and c > 0, got h={h}, c={c}")));
    }
    Ok(match order {
        Order::Linear => DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]) * (c / h),
        Order::Quadratic => {
            DMatrix::from_row_slice(3, 3, &[7.0, -8.0, 1.0, -8.0, 16.0, -8.0, 1.0, -8.0, 7.0]) * (c / (3.0 * h))
        }
    })
}

/// The N×N contribution of element `e`; rows of eliminated nodes are dropped.
pub fn global_element_matrix(mesh: &Mesh1D, dofs: &DofMap, e: usize) -> Result<DMatrix<f64>> {
    let local = element_stiffness(mesh.order, mesh.lengths[e], mesh.coefficients[e])?;
    let rows = dofs.element_rows(mesh.order, e);
    let mut global = DMatrix::zeros(dofs.dim, dofs.dim);
    for (a, ra) in rows.iter().enumerate() {
        for (b, rb) in rows.iter().enumerate() {
            if let (Some(ra), Some(rb)) = (ra, rb) {
                global[(*ra, *rb)] = local[(a, b)];
            }
        }
    }
    Ok(global)
}

/// Shape functions on the reference element ξ ∈ [-1, 1].
fn shape_values(order: Order, xi: f64) -> Vec<f64> {
    match order {
        Order::Linear => vec![0.5 * (1.0 - xi), 0.5 * (1.0 + xi)],
        Order::Quadratic => vec![0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)],
    }
}

/// Gauss-Legendre rule: two points for linear, three for quadratic elements.
fn gauss_rule(order: Order) -> Vec<(f64, f64)> {
    match order {
        Order::Linear => {
            let p = 1.0 / 3f64.sqrt();
            vec![(-p, 1.0), (p, 1.0)]
        }
        Order::Quadratic => {
            let p = (0.6f64).sqrt();
            vec![(-p, 5.0 / 9.0), (0.0, 8.0 / 9.0), (p, 5.0 / 9.0)]
        }
    }
}

/// Consistent element load ∫ b N_a dx.
fn element_load(order: Order, left: f64, h: f64, forcing: &Forcing) -> Vec<f64> {
    let mut load = vec![0.0; order.nodes_per_element()];
    for (xi, w) in gauss_rule(order) {
        let x = left + 0.5 * h * (xi + 1.0);
        let bx = forcing.eval(x);
        for (slot, phi) in load.iter_mut().zip(shape_values(order, xi)) {
            *slot += w * 0.5 * h * bx * phi;
        }
    }
    load
}

/// Penalty contribution `P e_r e_rᵀ` for a non-homogeneous Dirichlet side.
pub fn penalty_terms(bc: &BoundarySpec, dofs: &DofMap) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for (cond, row) in [(bc.left, dofs.left_row()), (bc.right, dofs.right_row())] {
        if let (BoundaryCondition::Dirichlet { value, penalty }, Some(row)) = (cond, row) {
            out.push((row, penalty, value));
        }
    }
    out
}

/// Direct stiffness assembly plus the consistent force vector and boundary terms.
pub fn assemble_direct(mesh: &Mesh1D, bc: &BoundarySpec, forcing: &Forcing) -> Result<AssembledSystem> {
    bc.validate()?;
    let dofs = DofMap::new(mesh, bc)?;
    let dim = dofs.dim;
    let mut k = DMatrix::zeros(dim, dim);
    let mut f = DVector::zeros(dim);

    let mut left = mesh.x1;
    for e in 0..mesh.num_elements() {
        k += global_element_matrix(mesh, &dofs, e)?;
        let load = element_load(mesh.order, left, mesh.lengths[e], forcing);
        for (row, value) in dofs.element_rows(mesh.order, e).into_iter().zip(load) {
            if let Some(row) = row {
                f[row] += value;
            }
        }
        left += mesh.lengths[e];
    }

    for (row, penalty, value) in penalty_terms(bc, &dofs) {
        k[(row, row)] += penalty;
        f[row] += penalty * value;
    }

    // Natural boundary flux c·u' with outward normal -1 on the left, +1 on the right.
    let last = mesh.num_elements() - 1;
    if let (BoundaryCondition::Neumann { derivative }, Some(row)) = (bc.left, dofs.left_row()) {
        f[row] -= mesh.coefficients[0] * derivative;
    }
    if let (BoundaryCondition::Neumann { derivative }, Some(row)) = (bc.right, dofs.right_row()) {
        f[row] += mesh.coefficients[last] * derivative;
    }

    // The auxiliary unknown decouples with K = 1 and zero load.
    if let Some(aux) = dofs.auxiliary {
        k[(aux, aux)] = 1.0;
        f[aux] = 0.0;
    }

    let coords = mesh.node_coordinates();
    let mut row_coordinates = vec![None; dim];
    for (node, row) in dofs.node_rows.iter().enumerate() {
        if let Some(row) = row {
            row_coordinates[*row] = Some(coords[node]);
        }
    }

    Ok(AssembledSystem { k, f, n: mesh.n, dofs, row_coordinates })
}

/// Dense solve used as the verification oracle. Returns the solution and the
/// relative residual ‖Ku − f‖ / ‖f‖.
pub fn classical_solve(sys: &AssembledSystem) -> Result<(DVector<f64>, f64)> {
    let cond = symmetric_condition(&sys.k).unwrap_or(f64::INFINITY);
    if !(cond < 1e14) {
        return Err(QfemError::Singular(cond));
    }
    let u = sys.k.clone().lu().solve(&sys.f).ok_or(QfemError::Singular(f64::INFINITY))?;
    let f_norm = sys.f.norm();
    let residual = (&sys.k * &u - &sys.f).norm() / if f_norm > 0.0 { f_norm } else { 1.0 };
    Ok((u, residual))
}

fn symmetric_condition(k: &DMatrix<f64>) -> Option<f64> {
    let eig = SymmetricEigen::new(k.clone());
    let (min, max) =
        eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    (min > 0.0).then(|| max / min)
}

/// 2-norm condition number of a symmetric positive definite stiffness matrix.
pub fn condition_number(sys: &AssembledSystem) -> Result<f64> {
    let k = &sys.k;
    let asym = (k - k.transpose()).amax();
    if asym > 1e-12 * k.amax().max(1.0) {
        return Err(QfemError::NotSpd);
    }
    let eig = SymmetricEigen::new(k.clone());
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min <= 0.0 {
        return Err(QfemError::NotSpd);
    }
    Ok(max / min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hom() -> BoundarySpec {
        BoundarySpec::homogeneous()
    }

    #[test]
    fn element_matrices() {
        let k = element_stiffness(Order::Linear, 1.0, 1.0).unwrap();
        assert_eq!(k, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        let k = element_stiffness(Order::Linear, 2.0, 4.0).unwrap();
        assert_eq!(k, DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]));
        let k = element_stiffness(Order::Quadratic, 3.0, 1.0).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[7.0, -8.0, 1.0, -8.0, 16.0, -8.0, 1.0, -8.0, 7.0]) / 9.0;
        assert_abs_diff_eq!(k, expected, epsilon = 1e-15);
        assert!(element_stiffness(Order::Linear, 0.0, 1.0).is_err());
        assert!(element_stiffness(Order::Linear, 1.0, -1.0).is_err());
    }

    #[test]
    fn uniform_linear_n2_is_scaled_tridiagonal() {
        let mesh = Mesh1D::uniform(2, Order::Linear, &hom(), 0.0, 1.0, 1.0).unwrap();
        assert_eq!(mesh.num_elements(), 5);
        let sys = assemble_direct(&mesh, &hom(), &Forcing::new(vec![1.0]).unwrap()).unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        for i in 0..4 {
            expected[(i, i)] = 10.0;
            if i + 1 < 4 {
                expected[(i, i + 1)] = -5.0;
                expected[(i + 1, i)] = -5.0;
            }
        }
        assert_abs_diff_eq!(sys.k, expected, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_table_mesh_has_auxiliary_row() {
        let mesh = Mesh1D::new(3, Order::Quadratic, 0.0, 1.0, vec![0.21, 0.2, 0.235, 0.355], vec![1.5, 1.5, 2.0, 2.0])
            .unwrap();
        let sys = assemble_direct(&mesh, &hom(), &Forcing::new(vec![0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(sys.dim(), 8);
        assert_eq!(sys.k[(7, 7)], 1.0);
        assert_eq!(sys.f[7], 0.0);
        for i in 0..7 {
            assert_eq!(sys.k[(7, i)], 0.0);
        }
        // Last physical row is the midpoint of the last element: 16 c / 3h.
        assert_abs_diff_eq!(sys.k[(6, 6)], 16.0 * 2.0 / (3.0 * 0.355), epsilon = 1e-12);
    }

    #[test]
    fn penalty_row() {
        let bc = BoundarySpec {
            left: BoundaryCondition::Dirichlet { value: 1.0, penalty: 100.0 },
            right: BoundaryCondition::DirichletHomogeneous,
        };
        let mesh = Mesh1D::uniform(3, Order::Linear, &bc, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(mesh.num_elements(), 8);
        let forcing = Forcing::new(vec![0.0, 0.0, 1.0]).unwrap();
        let sys = assemble_direct(&mesh, &bc, &forcing).unwrap();
        let plain = BoundarySpec { left: BoundaryCondition::Neumann { derivative: 0.0 }, ..bc };
        let base = assemble_direct(&mesh, &plain, &forcing).unwrap();
        let h = mesh.lengths[0];
        assert_abs_diff_eq!(sys.k[(0, 0)], 1.0 / h + 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sys.f[0], base.f[0] + 100.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_system_solves_to_rhs() {
        let mesh = Mesh1D::uniform(2, Order::Linear, &hom(), 0.0, 1.0, 1.0).unwrap();
        let mut sys = assemble_direct(&mesh, &hom(), &Forcing::new(vec![1.0]).unwrap()).unwrap();
        sys.k = DMatrix::identity(4, 4);
        sys.f = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let (u, res) = classical_solve(&sys).unwrap();
        assert_eq!(u, sys.f);
        assert!(res < 1e-15);
    }

    #[test]
    fn rejects_singular() {
        let mesh = Mesh1D::uniform(2, Order::Linear, &hom(), 0.0, 1.0, 1.0).unwrap();
        let mut sys = assemble_direct(&mesh, &hom(), &Forcing::new(vec![1.0]).unwrap()).unwrap();
        sys.k[(3, 3)] = 0.0;
        sys.k[(2, 3)] = 0.0;
        sys.k[(3, 2)] = 0.0;
        assert!(matches!(classical_solve(&sys), Err(QfemError::Singular(_))));
    }

    #[test]
    fn condition_of_identity() {
        let mesh = Mesh1D::uniform(2, Order::Linear, &hom(), 0.0, 1.0, 1.0).unwrap();
        let mut sys = assemble_direct(&mesh, &hom(), &Forcing::new(vec![1.0]).unwrap()).unwrap();
        sys.k = DMatrix::identity(4, 4);
        assert_abs_diff_eq!(condition_number(&sys).unwrap(), 1.0, epsilon = 1e-14);
        sys.k[(0, 0)] = -1.0;
        assert!(matches!(condition_number(&sys), Err(QfemError::NotSpd)));
    }

    #[test]
    fn mesh_validation() {
        assert!(Mesh1D::new(2, Order::Linear, 0.0, 1.0, vec![0.5, 0.4], vec![1.0, 1.0]).is_err());
        assert!(Mesh1D::new(2, Order::Linear, 0.0, 1.0, vec![0.5, 0.5], vec![1.0]).is_err());
        assert!(Mesh1D::new(2, Order::Linear, 0.0, 1.0, vec![1.5, -0.5], vec![1.0, 1.0]).is_err());
        let mesh = Mesh1D::new(2, Order::Linear, 0.0, 1.0, vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        assert!(assemble_direct(&mesh, &hom(), &Forcing::new(vec![1.0]).unwrap()).is_err());
        let neumann_both = BoundarySpec {
            left: BoundaryCondition::Neumann { derivative: 0.0 },
            right: BoundaryCondition::Neumann { derivative: 1.0 },
        };
        assert!(element_count(Order::Linear, 2, &neumann_both).is_err());
        assert!(Forcing::new(vec![1.0; 6]).is_err());
    }

    #[test]
    fn element_counts() {
        let pen = BoundarySpec {
            left: BoundaryCondition::Dirichlet { value: 1.0, penalty: 100.0 },
            right: BoundaryCondition::DirichletHomogeneous,
        };
        assert_eq!(element_count(Order::Linear, 3, &hom()).unwrap(), 9);
        assert_eq!(element_count(Order::Linear, 3, &pen).unwrap(), 8);
        assert_eq!(element_count(Order::Quadratic, 3, &hom()).unwrap(), 4);
        assert_eq!(element_count(Order::Quadratic, 4, &hom()).unwrap(), 8);
        assert_eq!(element_count(Order::Quadratic, 3, &pen).unwrap(), 4);
    }

    #[test]
    fn piecewise_coefficients_reproduce_tables() {
        let mesh = Mesh1D::with_piecewise_coefficient(
            4,
            Order::Quadratic,
            0.0,
            1.0,
            vec![0.105, 0.105, 0.1, 0.1, 0.125, 0.125, 0.17, 0.17],
            &[0.41],
            &[1.5, 2.0],
        )
        .unwrap();
        assert_eq!(mesh.coefficients, vec![1.5, 1.5, 1.5, 1.5, 2.0, 2.0, 2.0, 2.0]);
    }
}
