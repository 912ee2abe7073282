use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use maxbandit::adversarial::adversarial_report;
use maxbandit::algorithms::PacParams;
use maxbandit::bandit_env::BanditInstance;
use maxbandit::bounds::case_comparison;
use maxbandit::harness::{
    emit_results, reproduce_examples, run_trials, Algorithm, Emit, ExperimentSpec, Format,
    HarnessError, TrialLog, DEFAULT_MAX_SAMPLES, DEFAULT_TRIALS,
};
use maxbandit::instance_file::InstanceSpec;
use maxbandit::reward_models::{check_assumption1, DEFAULT_CHECK_GRID};

/// Exit status when a statistical or bound check fails.
const EXIT_FAILED: u8 = 1;
/// Exit status for usage and input errors.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "maxbandit",
    version,
    about = "Max K-armed bandit search, bounds and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every sample-complexity bound for an instance.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        /// Replace the instance's eps0.
        #[arg(long)]
        eps0_override: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run Monte-Carlo trials of one algorithm.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        alg: AlgArg,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Refuse unified-arm runs needing more draws than this per trial.
        #[arg(long, default_value_t = DEFAULT_MAX_SAMPLES)]
        max_samples: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reproduce the two worked examples.
    Examples {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check every arm against the tail envelope.
    VerifyAssumption {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CHECK_GRID)]
        grid: usize,
    },
    /// Build and verify the perturbed hypotheses for an instance.
    Adversarial {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    MaxCb,
    Me,
    Unified,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Self {
        match a {
            AlgArg::MaxCb => Algorithm::MaxCb,
            AlgArg::Me => Algorithm::MaximalEliminator,
            AlgArg::Unified => Algorithm::UnifiedArm,
        }
    }
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MAXBANDIT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(passed) => {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load(path: &Path, checked: bool) -> Result<BanditInstance> {
    let spec = InstanceSpec::read(path)?;
    let inst = if checked {
        spec.instance()
    } else {
        spec.instance_unchecked()
    };
    inst.with_context(|| format!("instance {}", path.display()))
}

/// A reader closing stdout early (`| head`) is not an error.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|e| e.downcast_ref::<io::Error>())
        .any(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    writeln!(
        io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(value)?
    )?;
    Ok(())
}

fn write_output<T: Emit>(item: &T, output: &OutputArgs) -> Result<()> {
    if let Some(path) = &output.out {
        emit_results(item, output.format.into(), path)?;
    }
    Ok(())
}

/// Returns whether the command's verdict passed; errors are input problems.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Bounds {
            instance,
            eps,
            delta,
            eps0_override,
            output,
        } => {
            let mut inst = load(&instance, true)?;
            if let Some(eps0) = eps0_override {
                inst = inst.with_tail(inst.tail().with_eps0(eps0)?)?;
            }
            let pac = PacParams::new(eps, delta)?;
            let cmp = case_comparison(&inst, &pac);
            write_output(&cmp.report, &output)?;
            print_json(&cmp)?;
            Ok(true)
        }
        Command::Simulate {
            instance,
            alg,
            eps,
            delta,
            trials,
            seed,
            workers,
            max_samples,
            output,
        } => {
            let inst = load(&instance, true)?;
            let pac = PacParams::new(eps, delta)?;
            let spec = ExperimentSpec {
                instance: &inst,
                pac,
                algorithm: alg.into(),
                trials,
                master_seed: seed,
                workers,
                max_samples,
            };
            let outcome = match run_trials(&spec) {
                Ok(o) => o,
                Err(HarnessError::TrialFailed {
                    trial,
                    message,
                    completed,
                }) => {
                    let partial = partial_path(output.out.as_deref());
                    emit_results(&TrialLog(completed), Format::Csv, &partial)?;
                    eprintln!("error: trial {trial} failed: {message}");
                    eprintln!("partial results written to {}", partial.display());
                    return Ok(false);
                }
                Err(e) => return Err(e.into()),
            };
            let mut report = outcome.report;
            if let Some(path) = &output.out {
                match output.format {
                    FormatArg::Csv => {
                        emit_results(&TrialLog(outcome.records), Format::Csv, path)?;
                        report.per_trial_csv_path = Some(path.display().to_string());
                    }
                    FormatArg::Json => emit_results(&report, Format::Json, path)?,
                }
            }
            print_json(&report)?;
            Ok(report.passed)
        }
        Command::Examples { output } => {
            let table = reproduce_examples();
            write_output(&table, &output)?;
            let mut out = io::stdout().lock();
            writeln!(
                out,
                "{:<8} {:<11} {:>14} {:>10} {:>9}",
                "example", "quantity", "computed", "printed", "rel_err"
            )?;
            for r in &table.rows {
                writeln!(
                    out,
                    "{:<8} {:<11} {:>14.4e} {:>10.2e} {:>8.3}%",
                    r.example,
                    r.quantity,
                    r.computed,
                    r.printed,
                    100.0 * r.rel_error
                )?;
            }
            for v in &table.verdicts {
                writeln!(out, "example {} verdict: {:?}", v.example, v.verdict)?;
            }
            Ok(table.passed)
        }
        Command::VerifyAssumption { instance, grid } => {
            if grid < 2 {
                anyhow::bail!("--grid must be at least 2");
            }
            let inst = load(&instance, false)?;
            let arms: Vec<ArmCheck> = inst
                .arms()
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    let c = check_assumption1(d, inst.tail(), grid);
                    ArmCheck {
                        arm: k + 1,
                        kind: d.kind(),
                        passed: c.passed,
                        violations: c.violations,
                        first_violation: c.first_violation,
                    }
                })
                .collect();
            let passed = arms.iter().all(|a| a.passed);
            print_json(&AssumptionReport { grid, passed, arms })?;
            Ok(passed)
        }
        Command::Adversarial {
            instance,
            eps,
            delta,
            out,
        } => {
            let inst = load(&instance, true)?;
            let pac = PacParams::new(eps, delta)?;
            let report = adversarial_report(&inst, &pac)?;
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&report)? + "\n";
                std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            print_json(&report)?;
            Ok(report.passed)
        }
    }
}

fn partial_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => {
            let mut name = p.as_os_str().to_owned();
            name.push(".partial.csv");
            PathBuf::from(name)
        }
        None => PathBuf::from("maxbandit.partial.csv"),
    }
}

#[derive(Serialize)]
struct ArmCheck {
    arm: usize,
    kind: &'static str,
    passed: bool,
    violations: usize,
    first_violation: Option<f64>,
}

#[derive(Serialize)]
struct AssumptionReport {
    grid: usize,
    passed: bool,
    arms: Vec<ArmCheck>,
}
