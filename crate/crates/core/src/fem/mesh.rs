use serde::{Deserialize, Serialize};

use crate::error::{QfemError, Result};
use crate::qsim::check_qubits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Linear,
    Quadratic,
}

impl Order {
    pub fn nodes_per_element(self) -> usize {
        match self {
            Order::Linear => 2,
            Order::Quadratic => 3,
        }
    }
}

/// Boundary condition at one end of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundaryCondition {
    /// u = 0, boundary node eliminated from the unknowns.
    DirichletHomogeneous,
    /// u = value, imposed with a penalty term; the boundary node stays an unknown.
    Dirichlet {
        value: f64,
        #[serde(default = "default_penalty")]
        penalty: f64,
    },
    /// u' = derivative; the boundary node stays an unknown and the flux
    /// `c · u'` enters the force vector with the outward sign.
    Neumann { derivative: f64 },
}

pub const DEFAULT_PENALTY: f64 = 100.0;

fn default_penalty() -> f64 {
    DEFAULT_PENALTY
}

impl BoundaryCondition {
    pub fn is_eliminated(&self) -> bool {
        matches!(self, BoundaryCondition::DirichletHomogeneous)
    }

    pub fn is_dirichlet(&self) -> bool {
        !matches!(self, BoundaryCondition::Neumann { .. })
    }

    fn validate(&self, side: &str) -> Result<()> {
        match *self {
            BoundaryCondition::DirichletHomogeneous => Ok(()),
            BoundaryCondition::Dirichlet { value, penalty } => {
                if !value.is_finite() || !(penalty > 0.0 && penalty.is_finite()) {
                    Err(QfemError::InvalidBoundary(format!(
                        "{side}: Dirichlet value must be finite and penalty positive (got {value}, {penalty})"
                    )))
                } else {
                    Ok(())
                }
            }
            BoundaryCondition::Neumann { derivative } if !derivative.is_finite() => {
                Err(QfemError::InvalidBoundary(format!("{side}: non-finite Neumann derivative")))
            }
            BoundaryCondition::Neumann { .. } => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

impl BoundarySpec {
    pub fn homogeneous() -> Self {
        Self { left: BoundaryCondition::DirichletHomogeneous, right: BoundaryCondition::DirichletHomogeneous }
    }

    pub fn validate(&self) -> Result<()> {
        self.left.validate("left")?;
        self.right.validate("right")?;
        if !self.left.is_dirichlet() && !self.right.is_dirichlet() {
            return Err(QfemError::InvalidBoundary("at least one side must be Dirichlet".into()));
        }
        Ok(())
    }

    pub fn eliminated_sides(&self) -> usize {
        usize::from(self.left.is_eliminated()) + usize::from(self.right.is_eliminated())
    }
}

/// Number of elements needed so that the unknowns (plus at most one auxiliary
/// slot for quadratic meshes) fill a 2^n statevector.
///
/// Linear: unknown nodes = n_el + 1 − (eliminated sides) = 2^n.
/// Quadratic: unknown nodes = 2 n_el + 1 − (eliminated sides), which is 2^n − 1
/// (padded with one auxiliary unknown) or 2^n.
pub fn element_count(order: Order, n: usize, bc: &BoundarySpec) -> Result<usize> {
    check_qubits(n)?;
    bc.validate()?;
    let dim = 1usize << n;
    let eliminated = bc.eliminated_sides();
    let count = match order {
        Order::Linear => dim + eliminated - 1,
        Order::Quadratic => match eliminated {
            2 | 1 => dim / 2,
            _ => (dim / 2).saturating_sub(1),
        },
    };
    if count == 0 {
        return Err(QfemError::InvalidMesh(format!(
            "no {order:?} mesh fits {n} qubit(s) with these boundary conditions"
        )));
    }
    Ok(count)
}

/// 1-D mesh: element lengths and diffusivities on [x1, x2].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    pub x1: f64,
    pub x2: f64,
    pub order: Order,
    pub lengths: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub n: usize,
}

impl Mesh1D {
    pub fn new(n: usize, order: Order, x1: f64, x2: f64, lengths: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        check_qubits(n)?;
        if !(x1.is_finite() && x2.is_finite() && x2 > x1) {
            return Err(QfemError::InvalidMesh(format!("bad domain [{x1}, {x2}]")));
        }
        if lengths.is_empty() || lengths.len() != coefficients.len() {
            return Err(QfemError::InvalidMesh(format!(
                "{} lengths vs {} coefficients",
                lengths.len(),
                coefficients.len()
            )));
        }
        if let Some(h) = lengths.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(QfemError::InvalidMesh(format!("element length {h} must be positive")));
        }
        if let Some(c) = coefficients.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(QfemError::InvalidMesh(format!("coefficient {c} must be positive")));
        }
        let total: f64 = lengths.iter().sum();
        if (total - (x2 - x1)).abs() > 1e-12 * (x2 - x1).max(1.0) {
            return Err(QfemError::InvalidMesh(format!(
                "element lengths sum to {total}, domain length is {}",
                x2 - x1
            )));
        }
        Ok(Self { x1, x2, order, lengths, coefficients, n })
    }

    /// Uniform mesh sized for (n, order, bc) with a constant coefficient.
    pub fn uniform(n: usize, order: Order, bc: &BoundarySpec, x1: f64, x2: f64, c: f64) -> Result<Self> {
        let count = element_count(order, n, bc)?;
        let h = (x2 - x1) / count as f64;
        // Identical lengths keep element coefficients bit-equal for grouping.
        Self::new(n, order, x1, x2, vec![h; count], vec![c; count])
    }

    /// Mesh with the given lengths and a piecewise-constant c(x) evaluated at
    /// element midpoints: `values[k]` applies left of `breakpoints[k]`.
    pub fn with_piecewise_coefficient(
        n: usize,
        order: Order,
        x1: f64,
        x2: f64,
        lengths: Vec<f64>,
        breakpoints: &[f64],
        values: &[f64],
    ) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(QfemError::InvalidMesh("piecewise coefficient needs one more value than breakpoints".into()));
        }
        let mut left = x1;
        let coefficients = lengths
            .iter()
            .map(|h| {
                let mid = left + 0.5 * h;
                left += h;
                let piece = breakpoints.iter().take_while(|&&b| mid >= b).count();
                values[piece]
            })
            .collect();
        Self::new(n, order, x1, x2, lengths, coefficients)
    }

    pub fn num_elements(&self) -> usize {
        self.lengths.len()
    }

    /// Node coordinates, including both boundary nodes.
    pub fn node_coordinates(&self) -> Vec<f64> {
        let mut xs = vec![self.x1];
        let mut left = self.x1;
        for h in &self.lengths {
            if self.order == Order::Quadratic {
                xs.push(left + 0.5 * h);
            }
            left += h;
            xs.push(left);
        }
        xs
    }

    /// Checks the element count against (n, order, bc).
    pub fn check_against(&self, bc: &BoundarySpec) -> Result<()> {
        let expected = element_count(self.order, self.n, bc)?;
        if expected != self.num_elements() {
            return Err(QfemError::InvalidMesh(format!(
                "{:?} mesh for {} qubits with these boundary conditions needs {expected} elements, got {}",
                self.order,
                self.n,
                self.num_elements()
            )));
        }
        Ok(())
    }
}

/// Where each mesh node lands in the 2^n unknown vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    /// Row for each mesh node, `None` for eliminated boundary nodes.
    pub node_rows: Vec<Option<usize>>,
    /// Padding row appended to reach 2^n unknowns (quadratic meshes only).
    pub auxiliary: Option<usize>,
    pub dim: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh1D, bc: &BoundarySpec) -> Result<Self> {
        mesh.check_against(bc)?;
        let nodes = match mesh.order {
            Order::Linear => mesh.num_elements() + 1,
            Order::Quadratic => 2 * mesh.num_elements() + 1,
        };
        let offset = usize::from(bc.left.is_eliminated());
        let node_rows: Vec<Option<usize>> = (0..nodes)
            .map(|node| {
                let eliminated =
                    (node == 0 && bc.left.is_eliminated()) || (node == nodes - 1 && bc.right.is_eliminated());
                (!eliminated).then(|| node - offset)
            })
            .collect();
        let unknowns = node_rows.iter().flatten().count();
        let dim = 1usize << mesh.n;
        let auxiliary = match dim - unknowns {
            0 => None,
            1 => Some(dim - 1),
            _ => unreachable!("element_count guarantees at most one padding row"),
        };
        Ok(Self { node_rows, auxiliary, dim })
    }

    /// Rows of the nodes of element `e`, in local order.
    pub fn element_rows(&self, order: Order, e: usize) -> Vec<Option<usize>> {
        let first = match order {
            Order::Linear => e,
            Order::Quadratic => 2 * e,
        };
        self.node_rows[first..first + order.nodes_per_element()].to_vec()
    }

    pub fn left_row(&self) -> Option<usize> {
        self.node_rows[0]
    }

    pub fn right_row(&self) -> Option<usize> {
        *self.node_rows.last().expect("mesh has nodes")
    }
}
