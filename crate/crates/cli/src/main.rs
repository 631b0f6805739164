//! dysonsim: verification suites, simulation runs, and resource estimates
//! for truncated-Dyson block-encoding simulators.
//!
//! Exit codes: 0 pass, 1 invariant/run failure, 2 usage, 3 budget, 4 I/O.

mod model;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use dysonsim_core::error::Error as CoreError;
use dysonsim_core::gadgets::{multi_segment_evolve, PictureInput};
use dysonsim_core::operator::{matrix_exponential, spectral_norm};
use dysonsim_core::resources::{estimate_interaction, estimate_tds, estimate_tts, ResourceEstimate};
use dysonsim_core::{tol, verify};

use model::{ModelSpecFile, ResolvedModel};
use report::{csv_document, RunReport};

#[derive(Parser)]
#[command(
    name = "dysonsim",
    about = "Block-encoding Hamiltonian simulation engine: verify, simulate, estimate, sweep",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named invariant suite deterministically under a seed.
    Verify {
        /// One of core, dyson, gadgets, sparse, hubbard, all.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scales every tolerance (fault injection; 0 forces failures).
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// Simulate a model and write a run report.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        eps: f64,
        /// schrodinger-dyson or interaction.
        #[arg(long, default_value = "schrodinger-dyson")]
        picture: String,
        #[arg(long)]
        report: PathBuf,
        /// Include wall-clock timing in the report (breaks byte-identity).
        #[arg(long, default_value_t = false)]
        timings: bool,
    },
    /// Emit closed-form cost estimates as CSV (one row per strategy).
    Estimate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Sweep one parameter over a value list, appending estimate rows per value.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        /// One of t, eps, alpha_A, alpha_B, d, N.
        #[arg(long)]
        param: String,
        /// Comma-separated values (may be empty for a header-only CSV).
        #[arg(long, default_value = "", value_delimiter = ',')]
        values: Vec<String>,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long)]
        csv: PathBuf,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_IO: u8 = 4;

fn core_exit(e: &CoreError) -> u8 {
    match e {
        CoreError::Budget { .. } => EXIT_BUDGET,
        CoreError::Model(_) | CoreError::Domain { .. } => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn max_qubits() -> u32 {
    std::env::var("DYSONSIM_MAX_QUBITS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(tol::DEFAULT_MAX_QUBITS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(RunError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct RunError {
    code: u8,
    message: String,
}

impl RunError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        RunError {
            code,
            message: message.into(),
        }
    }

    fn from_core(e: CoreError) -> Self {
        RunError::new(core_exit(&e), e.to_string())
    }

    fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        RunError::new(EXIT_IO, format!("{}: {e}", path.display()))
    }
}

fn load_model(path: &std::path::Path) -> Result<ModelSpecFile, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    ModelSpecFile::from_json(&text).map_err(RunError::from_core)
}

fn write_file(path: &std::path::Path, contents: &str) -> Result<(), RunError> {
    std::fs::write(path, contents).map_err(|e| RunError::io(path, e))
}

fn run(cli: Cli) -> Result<u8, RunError> {
    match cli.command {
        Command::Verify {
            suite,
            seed,
            tolerance_scale,
        } => cmd_verify(&suite, seed, tolerance_scale),
        Command::Simulate {
            model,
            time,
            eps,
            picture,
            report,
            timings,
        } => cmd_simulate(&model, time, eps, &picture, &report, timings),
        Command::Estimate {
            model,
            time,
            eps,
            csv,
        } => cmd_estimate(&model, time, eps, &csv),
        Command::Sweep {
            model,
            param,
            values,
            time,
            eps,
            csv,
        } => cmd_sweep(&model, &param, &values, time, eps, &csv),
    }
}

fn cmd_verify(suite: &str, seed: u64, tolerance_scale: f64) -> Result<u8, RunError> {
    let reports = if suite == "all" {
        verify::run_all(seed, tolerance_scale)
    } else {
        verify::run_suite(suite, seed, tolerance_scale).map(|r| vec![r])
    }
    .map_err(|e| RunError::new(EXIT_USAGE, e.to_string()))?;

    #[derive(serde::Serialize)]
    struct CheckJson {
        name: String,
        pass: bool,
        measured: f64,
        tolerance: f64,
        margin: f64,
    }
    #[derive(serde::Serialize)]
    struct SuiteJson {
        suite: String,
        seed: u64,
        all_pass: bool,
        checks: Vec<CheckJson>,
    }
    let mut all_pass = true;
    let summaries: Vec<SuiteJson> = reports
        .iter()
        .map(|r| {
            all_pass &= r.all_pass();
            SuiteJson {
                suite: r.suite.clone(),
                seed: r.seed,
                all_pass: r.all_pass(),
                checks: r
                    .checks
                    .iter()
                    .map(|c| CheckJson {
                        name: c.name.clone(),
                        pass: c.pass,
                        measured: c.measured,
                        tolerance: c.tolerance,
                        margin: c.margin,
                    })
                    .collect(),
            }
        })
        .collect();
    println!(
        "{}",
        serde_json::to_string_pretty(&summaries).expect("summary serialization")
    );
    Ok(if all_pass { 0 } else { EXIT_FAIL })
}

fn resolve_for_run(path: &std::path::Path) -> Result<ResolvedModel, RunError> {
    load_model(path)?.resolve().map_err(RunError::from_core)
}

fn cmd_simulate(
    model_path: &std::path::Path,
    t: f64,
    eps: f64,
    picture: &str,
    report_path: &std::path::Path,
    timings: bool,
) -> Result<u8, RunError> {
    let resolved = resolve_for_run(model_path)?;
    let started = Instant::now();
    let budget = max_qubits();

    let hamiltonian = resolved.hamiltonian.as_ref().ok_or_else(|| {
        RunError::new(
            EXIT_BUDGET,
            format!(
                "model needs {} system qubits but the dense desk-scale budget is 12 \
                 fermionic modes; this model is estimate-only",
                resolved.n_s
            ),
        )
    })?;

    let (result, record) = match picture {
        "schrodinger-dyson" => {
            let generator = |_: f64| hamiltonian.clone();
            multi_segment_evolve(
                &PictureInput::SchrodingerDyson {
                    generator: &generator,
                },
                t,
                eps,
                budget,
            )
            .map_err(RunError::from_core)?
        }
        "interaction" => {
            let (a, b) = resolved.split.as_ref().ok_or_else(|| {
                RunError::new(
                    EXIT_USAGE,
                    "interaction picture needs an alpha_split (or a sparse/plane-wave model)",
                )
            })?;
            multi_segment_evolve(&PictureInput::Interaction { a, b }, t, eps, budget)
                .map_err(RunError::from_core)?
        }
        other => {
            return Err(RunError::new(
                EXIT_USAGE,
                format!("unknown picture '{other}' (schrodinger-dyson | interaction)"),
            ))
        }
    };

    // Oracle comparison at desk scale; the models here are time-independent,
    // so the exact propagator is the closed-form exponential (delta 0).
    let (achieved_error, oracle_delta) = if hamiltonian.dim() <= 64 {
        let exact = matrix_exponential(hamiltonian, t).map_err(RunError::from_core)?;
        (Some(spectral_norm(&result.sub(&exact))), Some(0.0))
    } else {
        (None, None)
    };

    let wall = timings.then(|| started.elapsed().as_secs_f64());
    let report = RunReport::from_record(
        &resolved.name,
        t,
        &record,
        achieved_error,
        oracle_delta,
        wall,
    );
    write_file(report_path, &report.to_json())?;
    println!("report written to {}", report_path.display());
    if let Some(err) = achieved_error {
        println!("achieved error {err:.6e} (bound {:.6e})", 4.0 * eps);
    }
    Ok(0)
}

fn estimate_rows(resolved: &ResolvedModel, t: f64, eps: f64) -> Vec<ResourceEstimate> {
    let alpha_full = resolved.alpha;
    vec![
        estimate_tds(alpha_full, t, eps, 0.0, alpha_full, resolved.n_s, resolved.n_a),
        estimate_tts(alpha_full, t, eps, resolved.n_s, resolved.n_a),
        estimate_interaction(
            resolved.alpha_a,
            resolved.alpha_b,
            t,
            eps,
            resolved.n_s,
            resolved.n_a,
        ),
    ]
}

fn cmd_estimate(
    model_path: &std::path::Path,
    t: f64,
    eps: f64,
    csv_path: &std::path::Path,
) -> Result<u8, RunError> {
    let resolved = resolve_for_run(model_path)?;
    let rows = estimate_rows(&resolved, t, eps);
    write_file(csv_path, &csv_document(&rows))?;
    println!("estimates written to {}", csv_path.display());
    Ok(0)
}

fn cmd_sweep(
    model_path: &std::path::Path,
    param: &str,
    values: &[String],
    t: f64,
    eps: f64,
    csv_path: &std::path::Path,
) -> Result<u8, RunError> {
    let spec = load_model(model_path)?;
    let values: Vec<&str> = values.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    let mut rows = Vec::new();
    for value in values {
        let parse_f64 = || -> Result<f64, RunError> {
            value
                .parse::<f64>()
                .map_err(|_| RunError::new(EXIT_USAGE, format!("bad value '{value}'")))
        };
        let parse_usize = || -> Result<usize, RunError> {
            value
                .parse::<usize>()
                .map_err(|_| RunError::new(EXIT_USAGE, format!("bad value '{value}'")))
        };
        match param {
            "t" => {
                let resolved = spec.resolve().map_err(RunError::from_core)?;
                rows.extend(estimate_rows(&resolved, parse_f64()?, eps));
            }
            "eps" => {
                let resolved = spec.resolve().map_err(RunError::from_core)?;
                rows.extend(estimate_rows(&resolved, t, parse_f64()?));
            }
            "alpha_A" => {
                let mut resolved = spec.resolve().map_err(RunError::from_core)?;
                resolved.alpha_a = parse_f64()?;
                resolved.alpha = resolved.alpha_a + resolved.alpha_b;
                rows.extend(estimate_rows(&resolved, t, eps));
            }
            "alpha_B" => {
                let mut resolved = spec.resolve().map_err(RunError::from_core)?;
                resolved.alpha_b = parse_f64()?;
                resolved.alpha = resolved.alpha_a + resolved.alpha_b;
                rows.extend(estimate_rows(&resolved, t, eps));
            }
            "d" => {
                let d = parse_usize()?;
                let resolved = spec
                    .resolve()
                    .and_then(|r| r.with_sparsity_promise(d))
                    .map_err(RunError::from_core)?;
                rows.extend(estimate_rows(&resolved, t, eps));
            }
            "N" => {
                let modified = spec.with_size(parse_usize()?).map_err(RunError::from_core)?;
                let resolved = modified.resolve().map_err(RunError::from_core)?;
                rows.extend(estimate_rows(&resolved, t, eps));
            }
            other => {
                return Err(RunError::new(
                    EXIT_USAGE,
                    format!("unknown sweep parameter '{other}' (t, eps, alpha_A, alpha_B, d, N)"),
                ))
            }
        }
    }
    write_file(csv_path, &csv_document(&rows))?;
    println!("sweep written to {}", csv_path.display());
    Ok(0)
}
