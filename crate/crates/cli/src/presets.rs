//! Named configurations for the reference experiments.

use qfem_core::fem::{BoundaryCondition, Order, DEFAULT_PENALTY};
use qfem_core::vqls::AnsatzFamily;

use crate::config::{
    CoefficientConfig, DiscretizationConfig, ElementLengths, InitKind, OutputConfig, ProblemConfig, RunConfig,
    VqlsSection,
};
use crate::error::CliError;

/// Preset names; a name without the `-nK` suffix selects the 4-qubit variant.
pub const PRESETS: &[&str] = &[
    "ansatz-test-n3",
    "ansatz-test-n4",
    "penalty-n3",
    "penalty-n4",
    "neumann-n3",
    "neumann-n4",
    "quad-hetero-n3",
    "quad-hetero-n4",
    "scaling-n5",
    "scaling-n6",
    "scaling-n7",
];

const HOMOGENEOUS: BoundaryCondition = BoundaryCondition::DirichletHomogeneous;

fn base(n: usize, order: Order, forcing: Vec<f64>, left: BoundaryCondition, right: BoundaryCondition) -> RunConfig {
    RunConfig {
        problem: ProblemConfig { x1: 0.0, x2: 1.0, forcing, coefficient: CoefficientConfig::default(), left, right },
        discretization: DiscretizationConfig { n, order, lengths: ElementLengths::default() },
        vqls: VqlsSection { seed: 1, ..VqlsSection::default() },
        output: OutputConfig::default(),
    }
}

fn with_ansatz(mut c: RunConfig, family: AnsatzFamily, layers: usize) -> RunConfig {
    c.vqls.ansatz = family;
    c.vqls.layers = layers;
    c
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let (stem, n) = match name.rsplit_once("-n") {
        Some((stem, k)) if k.parse::<usize>().is_ok() => (stem, k.parse::<usize>().unwrap()),
        _ => (name, 4),
    };
    let full = format!("{stem}-n{n}");
    if !PRESETS.contains(&full.as_str()) {
        return Err(CliError::Usage(format!("unknown preset '{name}'; available: {}", PRESETS.join(", "))));
    }
    let x = vec![0.0, 1.0];
    let config = match stem {
        // u″ + x = 0 with u(0) = u(1) = 0.
        "ansatz-test" => with_ansatz(base(n, Order::Linear, x, HOMOGENEOUS, HOMOGENEOUS), AnsatzFamily::A3, 3),
        // u(0) = 1 by penalty, u(1) = 0, b = x².
        "penalty" => {
            let left = BoundaryCondition::Dirichlet { value: 1.0, penalty: DEFAULT_PENALTY };
            let layers = if n == 3 { 2 } else { 4 };
            with_ansatz(base(n, Order::Linear, vec![0.0, 0.0, 1.0], left, HOMOGENEOUS), AnsatzFamily::A1, layers)
        }
        // u(0) = 0, u′(1) = 0, b = x.
        "neumann" => {
            let right = BoundaryCondition::Neumann { derivative: 0.0 };
            with_ansatz(base(n, Order::Linear, x, HOMOGENEOUS, right), AnsatzFamily::A4, 4)
        }
        // Quadratic elements, c = 1.5 left of x = 0.41 and 2.0 right of it.
        "quad-hetero" => {
            let mut c = base(n, Order::Quadratic, x, HOMOGENEOUS, HOMOGENEOUS);
            c.problem.coefficient = CoefficientConfig { breakpoints: vec![0.41], values: vec![1.5, 2.0] };
            c.discretization.lengths = ElementLengths::Explicit(if n == 3 {
                vec![0.21, 0.2, 0.235, 0.355]
            } else {
                vec![0.105, 0.105, 0.1, 0.1, 0.125, 0.125, 0.17, 0.17]
            });
            with_ansatz(c, AnsatzFamily::A1, if n == 3 { 2 } else { 4 })
        }
        // Warm-started ansatz-test problem at the depths that solved it.
        "scaling" => {
            let layers = match n {
                5 => 6,
                6 => 13,
                _ => 22,
            };
            let mut c = with_ansatz(base(n, Order::Linear, x, HOMOGENEOUS, HOMOGENEOUS), AnsatzFamily::A1, layers);
            c.vqls.init = InitKind::WarmStart;
            c.vqls.restarts = 3;
            c
        }
        _ => unreachable!("checked against PRESETS"),
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid_and_round_trips() {
        for name in PRESETS {
            let c = preset(name).unwrap();
            assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn short_names_pick_four_qubits() {
        assert_eq!(preset("penalty").unwrap(), preset("penalty-n4").unwrap());
        assert!(preset("penalty-n9").is_err());
        assert!(preset("nope").is_err());
    }

    #[test]
    fn parameter_counts_follow_the_scaling_table() {
        let count = |name| preset(name).unwrap().ansatz_spec().unwrap().parameter_count();
        assert_eq!([count("scaling-n6"), count("scaling-n7")], [84, 161]);
    }
}
