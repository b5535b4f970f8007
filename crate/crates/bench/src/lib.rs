//! Shared fixtures for the kernel benchmarks.

use qfem_core::decomp::decompose_unique;
use qfem_core::fem::{assemble_direct, BoundarySpec, Forcing, Mesh1D, Order};
use qfem_core::vqls::{random_parameters, Ansatz, AnsatzFamily, AnsatzSpec, VqlsProblem};

/// u″ + x = 0 on a uniform linear mesh with both ends clamped.
pub fn heat_problem(n: usize) -> VqlsProblem {
    let bc = BoundarySpec::homogeneous();
    let mesh = Mesh1D::uniform(n, Order::Linear, &bc, 0.0, 1.0, 1.0).expect("uniform mesh");
    let sys = assemble_direct(&mesh, &bc, &Forcing::new(vec![0.0, 1.0]).expect("forcing")).expect("assembly");
    let lcu = decompose_unique(&mesh, &bc).expect("decomposition");
    VqlsProblem::new(lcu, sys.f.as_slice().to_vec()).expect("problem")
}

/// An ansatz with a fixed random parameter vector.
pub fn ansatz_at(family: AnsatzFamily, n: usize, layers: usize) -> (Ansatz, Vec<f64>) {
    let spec = AnsatzSpec::new(family, n, layers).expect("ansatz spec");
    let theta = random_parameters(spec.parameter_count(), 11, 0);
    (Ansatz::new(spec), theta)
}
