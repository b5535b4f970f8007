//! Run configuration read from TOML. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use qfem_core::fem::{element_count, BoundaryCondition, BoundarySpec, Forcing, Mesh1D, Order};
use qfem_core::vqls::{AnsatzFamily, AnsatzSpec, InitMode, VqlsConfig};
use qfem_core::EvalMode;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub vqls: VqlsSection,
    #[serde(default)]
    pub output: OutputConfig,
}

/// −(c u′)′ = b on [x1, x2].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub x1: f64,
    #[serde(default = "one")]
    pub x2: f64,
    /// Polynomial coefficients of b(x), constant term first.
    pub forcing: Vec<f64>,
    #[serde(default)]
    pub coefficient: CoefficientConfig,
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

fn one() -> f64 {
    1.0
}

/// Piecewise-constant c(x): `values[k]` applies left of `breakpoints[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    #[serde(default)]
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        Self { breakpoints: Vec::new(), values: vec![1.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UniformKeyword {
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementLengths {
    Uniform(UniformKeyword),
    Explicit(Vec<f64>),
}

impl Default for ElementLengths {
    fn default() -> Self {
        ElementLengths::Uniform(UniformKeyword::Uniform)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub n: usize,
    pub order: Order,
    #[serde(default)]
    pub lengths: ElementLengths,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    #[default]
    Random,
    /// Fit θ to the classical solution first.
    WarmStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VqlsSection {
    pub ansatz: AnsatzFamily,
    pub layers: usize,
    pub tolerance: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub init: InitKind,
    pub eval: EvalMode,
    pub fd_step: f64,
    /// Merge equal-coefficient terms with disjoint supports into one unitary.
    pub unique_element_grouping: bool,
}

impl Default for VqlsSection {
    fn default() -> Self {
        let core = VqlsConfig::default();
        Self {
            ansatz: AnsatzFamily::A1,
            layers: 2,
            tolerance: core.tolerance,
            max_iter: core.max_iter,
            restarts: core.restarts,
            seed: core.seed,
            init: InitKind::Random,
            eval: core.eval,
            fd_step: core.fd_step,
            unique_element_grouping: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Json, Format::Csv] }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

/// Mesh, boundary conditions and forcing built from a validated config.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh1D,
    pub bc: BoundarySpec,
    pub forcing: Forcing,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.build_problem()?;
        self.ansatz_spec()?;
        self.vqls_config(None)?.validate().map_err(CliError::from)?;
        if self.output.formats.is_empty() {
            return Err(CliError::Validation("output.formats must name at least one format".into()));
        }
        Ok(())
    }

    pub fn bc(&self) -> BoundarySpec {
        BoundarySpec { left: self.problem.left, right: self.problem.right }
    }

    pub fn build_problem(&self) -> Result<Problem, CliError> {
        let p = &self.problem;
        let d = &self.discretization;
        let bc = self.bc();
        let count = element_count(d.order, d.n, &bc)?;
        let lengths = match &d.lengths {
            ElementLengths::Uniform(_) => vec![(p.x2 - p.x1) / count as f64; count],
            ElementLengths::Explicit(lengths) if lengths.len() != count => {
                return Err(CliError::Validation(format!(
                    "{} element lengths given; n = {} with {:?} elements and these boundary conditions needs {count}",
                    lengths.len(),
                    d.n,
                    d.order
                )));
            }
            ElementLengths::Explicit(lengths) => lengths.clone(),
        };
        let c = &p.coefficient;
        if c.breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Validation("coefficient breakpoints must increase".into()));
        }
        let mesh = Mesh1D::with_piecewise_coefficient(d.n, d.order, p.x1, p.x2, lengths, &c.breakpoints, &c.values)?;
        mesh.check_against(&bc)?;
        Ok(Problem { mesh, bc, forcing: Forcing::new(p.forcing.clone())? })
    }

    pub fn ansatz_spec(&self) -> Result<AnsatzSpec, CliError> {
        Ok(AnsatzSpec::new(self.vqls.ansatz, self.discretization.n, self.vqls.layers)?)
    }

    /// Solver settings; `classical` is required for warm starts.
    pub fn vqls_config(&self, classical: Option<Vec<f64>>) -> Result<VqlsConfig, CliError> {
        let v = &self.vqls;
        let init = match (v.init, classical) {
            (InitKind::Random, _) => InitMode::Random,
            (InitKind::WarmStart, Some(classical)) => InitMode::WarmStart { classical },
            // Validation only: the vector is filled in before solving.
            (InitKind::WarmStart, None) => InitMode::Random,
        };
        Ok(VqlsConfig {
            tolerance: v.tolerance,
            max_iter: v.max_iter,
            restarts: v.restarts,
            seed: v.seed,
            init,
            eval: v.eval,
            fd_step: v.fd_step,
            stop_at_first: true,
        })
    }
}
