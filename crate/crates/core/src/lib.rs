//! Hybrid quantum/classical finite elements for the 1-D steady heat equation.
//!
//! The crate assembles linear and quadratic finite-element systems, rewrites the
//! stiffness matrix as an explicit linear combination of unitaries whose circuits
//! are produced by generator functions, and solves the system variationally on a
//! built-in statevector simulator. A dense classical solver doubles as the
//! verification oracle.
//!
//! Module map:
//! - [`qsim`]: statevector simulation and Hadamard tests
//! - [`fem`]: meshes, assembly, boundary conditions, classical oracle
//! - [`decomp`]: generator-function circuits and the unitary decomposition
//! - [`vqls`]: state preparation, ansatz families, cost and optimizer
//! - [`metrics`]: expressibility and entanglement capability

pub mod decomp;
pub mod error;
pub mod fem;
pub mod metrics;
pub mod qsim;
pub mod vqls;

pub use decomp::{decompose, LcuDecomposition, UnitaryTerm};
pub use error::{QfemError, Result};
pub use fem::{assemble_direct, classical_solve, AssembledSystem, BoundarySpec, Forcing, Mesh1D, Order};
pub use qsim::{Circuit, EvalMode, Gate, Statevector};
pub use vqls::{AnsatzFamily, AnsatzSpec, VqlsConfig, VqlsResult};
