use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qfem_cli::config::RunConfig;
use qfem_cli::error::CliError;
use qfem_cli::metrics::{run_metrics, write_metrics_outputs, MetricsRequest};
use qfem_cli::presets::{preset, PRESETS};
use qfem_cli::solve::{run_solve, write_solve_outputs};
use qfem_cli::sweep::{
    condition_default, run_ansatz_sweep, run_condition_sweep, run_landscape, write_ansatz_sweep, write_condition_sweep,
    AnsatzSweep,
};
use qfem_cli::verify::{run_verify, write_verify_outputs};
use qfem_cli::{output, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};
use qfem_core::vqls::{AnsatzFamily, AnsatzSpec};

/// Hybrid variational solver for 1-D finite-element problems.
#[derive(Parser, Debug)]
#[command(name = "qfem", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration (see `qfem presets`).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the configured problem and compare with the classical solution.
    Solve,
    /// Rebuild the stiffness matrix from the decomposition circuits.
    VerifyDecomp {
        /// Perturb one term's coefficient; the check must then fail.
        #[arg(long, hide = true)]
        corrupt_term: Option<usize>,
    },
    /// Expressibility and entangling capability of ansatz configurations.
    Metrics {
        #[arg(long, value_delimiter = ',', value_parser = parse_family, default_value = "A1,A2,A3,A4")]
        ansatz: Vec<AnsatzFamily>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        layers: Vec<usize>,
        /// Qubit count when no config is given.
        #[arg(long, default_value_t = 4)]
        qubits: usize,
        #[arg(long, default_value_t = 5000)]
        pairs: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 75)]
        bins: usize,
    },
    /// Batch studies.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Subcommand, Debug)]
enum SweepKind {
    /// Success rate of random restarts per (ansatz, layers).
    Ansatz {
        #[arg(long, value_delimiter = ',', value_parser = parse_family, default_value = "A1,A2,A3,A4")]
        ansatz: Vec<AnsatzFamily>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        layers: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Condition number of the stiffness matrix against mesh size.
    Condition {
        #[arg(long, default_value_t = 2)]
        min_qubits: usize,
        #[arg(long, default_value_t = 7)]
        max_qubits: usize,
    },
    /// Cost on a grid over two angles around the optimized parameters.
    Landscape {
        #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0,1")]
        params: Vec<usize>,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[arg(long, default_value_t = PI)]
        span: f64,
    },
}

fn parse_family(s: &str) -> Result<AnsatzFamily, String> {
    AnsatzFamily::ALL
        .into_iter()
        .find(|f| f.to_string().eq_ignore_ascii_case(s.trim()))
        .ok_or_else(|| format!("unknown ansatz '{s}', expected one of A1, A2, A3, A4"))
}

fn load(common: &Common, required: bool) -> Result<Option<RunConfig>, CliError> {
    let mut config = match (&common.config, &common.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) if required => {
            return Err(CliError::Usage("one of --config or --preset is required".into()));
        }
        (None, None) => return Ok(None),
    };
    if let Some(seed) = common.seed {
        config.vqls.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output.directory = out.clone();
    }
    config.validate()?;
    Ok(Some(config))
}

fn out_dir(common: &Common, config: Option<&RunConfig>) -> PathBuf {
    common.out.clone().or_else(|| config.map(|c| c.output.directory.clone())).unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    if let Some(jobs) = cli.common.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let common = &cli.common;
    let start = Instant::now();
    let code = match cli.command {
        Command::Presets => {
            for name in PRESETS {
                println!("{name}");
            }
            return Ok(EXIT_OK);
        }
        Command::Solve => {
            let config = load(common, true)?.expect("required");
            let outcome = run_solve(&config)?;
            let dir = out_dir(common, Some(&config));
            write_solve_outputs(&outcome.record, &config, &dir)?;
            // Kept apart from results.json, which must be identical across seeded reruns.
            output::write_json(
                &dir.join("timing.json"),
                &serde_json::json!({ "wall_time_seconds": outcome.wall_time }),
            )?;
            let r = &outcome.record.result;
            println!(
                "{}: cost {:.3e} after {} iterations (restart {} of {}), converged: {}",
                r.spec,
                r.final_cost,
                r.iterations,
                r.restart + 1,
                r.restarts.len(),
                r.converged
            );
            println!("fidelity to classical solution: {:.6}", outcome.record.fidelity);
            if let Some(e) = outcome.record.relative_error {
                println!("relative max error: {e:.3e}");
            }
            println!("outputs written to {}", dir.display());
            if r.converged {
                EXIT_OK
            } else {
                EXIT_NOT_CONVERGED
            }
        }
        Command::VerifyDecomp { corrupt_term } => {
            let config = load(common, true)?.expect("required");
            let report = run_verify(&config, corrupt_term)?;
            let dir = out_dir(common, Some(&config));
            write_verify_outputs(&report, &dir)?;
            println!(
                "{} terms, max reconstruction error {:.3e} (tolerance {:.0e}): {}",
                report.num_terms,
                report.max_error,
                report.tolerance,
                if report.passed { "passed" } else { "FAILED" }
            );
            if report.passed {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            }
        }
        Command::Metrics { ansatz, layers, qubits, pairs, samples, bins } => {
            let config = load(common, false)?;
            let n = config.as_ref().map_or(qubits, |c| c.discretization.n);
            let seed = common.seed.or(config.as_ref().map(|c| c.vqls.seed)).unwrap_or(0);
            let specs = ansatz
                .iter()
                .flat_map(|&f| layers.iter().map(move |&l| AnsatzSpec::new(f, n, l)))
                .collect::<Result<Vec<_>, _>>()?;
            let results = run_metrics(&MetricsRequest { specs, pairs, samples, bins, seed })?;
            let dir = out_dir(common, config.as_ref());
            write_metrics_outputs(&results, &dir)?;
            println!("{:<8} {:>8} {:>8} {:>8}", "ansatz", "Expr", "ENT", "ENT_pop");
            for (r, _) in &results {
                println!("{:<8} {:>8.4} {:>8.4} {:>8.4}", r.ansatz.to_string(), r.expr, r.ent, r.ent_populations);
            }
            EXIT_OK
        }
        Command::Sweep { kind } => sweep(common, kind)?,
    };
    println!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    Ok(code)
}

fn sweep(common: &Common, kind: SweepKind) -> Result<i32, CliError> {
    match kind {
        SweepKind::Ansatz { ansatz, layers, restarts } => {
            let config = load(common, true)?.expect("required");
            if restarts == 0 {
                return Err(CliError::Usage("--restarts must be at least 1".into()));
            }
            let outcomes = run_ansatz_sweep(&config, &AnsatzSweep { families: ansatz, layers, restarts })?;
            let dir = out_dir(common, Some(&config));
            write_ansatz_sweep(&outcomes, &dir)?;
            for o in &outcomes {
                let r = &o.row;
                match &r.error {
                    Some(e) => println!("{} L{}: error: {e}", r.ansatz, r.layers),
                    None => println!("{} L{}: {}/{} converged", r.ansatz, r.layers, r.successes, r.restarts),
                }
            }
        }
        SweepKind::Condition { min_qubits, max_qubits } => {
            let config = load(common, false)?.unwrap_or_else(condition_default);
            if min_qubits < 1 || min_qubits >= max_qubits {
                return Err(CliError::Usage("need 1 ≤ --min-qubits < --max-qubits".into()));
            }
            let (rows, summary) = run_condition_sweep(&config, min_qubits..=max_qubits)?;
            let dir = out_dir(common, Some(&config));
            write_condition_sweep(&rows, &summary, &dir)?;
            for r in &rows {
                println!("n={} N={} cond={:.4e} bound={:.4e}", r.n, r.unknowns, r.cond, r.bound);
            }
            println!("log-log slope: {:.4} against 1/h, {:.4} against N", summary.slope, summary.slope_vs_unknowns);
        }
        SweepKind::Landscape { params, grid, span } => {
            let config = load(common, true)?.expect("required");
            let [a, b] = params[..] else {
                return Err(CliError::Usage("--params takes exactly two indices".into()));
            };
            let solved = run_solve(&config)?;
            let points = run_landscape(&config, &solved.record.result.theta, (a, b), grid, span)?;
            let dir = out_dir(common, Some(&config));
            std::fs::create_dir_all(&dir)?;
            output::write_csv(&dir.join("landscape.csv"), points)?;
            println!("landscape over θ[{a}], θ[{b}] written to {}", dir.join("landscape.csv").display());
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
