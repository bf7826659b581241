//! `qhdrelax` command-line driver.
//!
//! Exit codes: 0 on success, 1 on configuration or I/O problems, 2 when a
//! solver fails, 3 when `--assert` is given and a pass flag is false.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use qhdrelax::experiments::{self, Experiment, ExperimentConfig};
use qhdrelax::Error;

#[derive(Parser)]
#[command(name = "qhdrelax", version, about = "Relaxation-limit experiments for damped quantum hydrodynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single solver run with balance diagnostics.
    Simulate(RunArgs),
    /// Relaxation-time sweep against the drift-diffusion limit.
    Sweep(RunArgs),
    /// Decay of the Lyapunov functional.
    Decay(RunArgs),
    /// Initial-layer study.
    Layer(RunArgs),
    /// Cross-solver validation over a refinement table.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if any pass flag is false.
    #[arg(long)]
    assert: bool,
}

const EXIT_OTHER: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_ASSERT: u8 = 3;

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_solver_failure() { EXIT_SOLVER } else { EXIT_OTHER })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (expected, args) = match cli.command {
        Command::Simulate(a) => (Experiment::Simulate, a),
        Command::Sweep(a) => (Experiment::Sweep, a),
        Command::Decay(a) => (Experiment::Decay, a),
        Command::Layer(a) => (Experiment::Layer, a),
        Command::Validate(a) => (Experiment::Validate, a),
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_OTHER);
        }
    };
    let cfg = match ExperimentConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if cfg.experiment != expected {
        eprintln!(
            "error: config describes a {} experiment, not {}",
            cfg.experiment.name(),
            expected.name()
        );
        return ExitCode::from(EXIT_OTHER);
    }
    let Some(out_dir) = args.out.or_else(|| cfg.output.clone().map(PathBuf::from)) else {
        eprintln!("error: no output directory (use --out or set `output`)");
        return ExitCode::from(EXIT_OTHER);
    };

    let study = match experiments::run(&cfg) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    if let Err(e) = study.write(&out_dir) {
        return fail(&e);
    }
    print!("{}", study.summary_json());
    if args.assert && !study.summary.all_pass() {
        let failed: Vec<&str> = study
            .summary
            .pass_flags
            .iter()
            .filter(|(_, ok)| !**ok)
            .map(|(k, _)| k.as_str())
            .collect();
        eprintln!("assertion failed: {}", failed.join(", "));
        return ExitCode::from(EXIT_ASSERT);
    }
    ExitCode::SUCCESS
}
