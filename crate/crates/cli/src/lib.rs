//! Command-line front end for the hybrid FEM solver: run configuration,
//! presets, and the solve / verify-decomp / metrics / sweep workflows.

pub mod config;
pub mod error;
pub mod metrics;
pub mod output;
pub mod presets;
pub mod solve;
pub mod sweep;
pub mod verify;

pub use config::RunConfig;
pub use error::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
