//! `berlab` command line: randomized inequality campaigns, fixture replay,
//! shell export, and single-bound evaluation.

use berlab::bounds::{self, BoundEvaluation, BoundId, EvalConfig};
use berlab::harness::{self, KernelKind, SuiteConfig};
use berlab::io;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "berlab", version, about = "Berezin-functional laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a randomized campaign over the inequality registry.
    Check(CheckArgs),
    /// Export the Davis-Wielandt shell of an operator as CSV.
    Shell(ShellArgs),
    /// Replay the built-in worked examples and print their values.
    Fixtures(FixturesArgs),
    /// Evaluate a single registry bound on explicit inputs.
    Eval(EvalArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Base seed; trial k uses the derived stream seed ^ k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random trials.
    #[arg(long, default_value_t = 500)]
    trials: u64,
    /// Operator dimensions to draw from.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,8")]
    dims: Vec<usize>,
    /// Model point-set sizes to draw from.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    omega: Vec<usize>,
    /// Kernel families to draw from.
    #[arg(long, value_delimiter = ',', value_parser = parse_kernel,
          default_value = "orthonormal,szego,bergman,fock,random_gram")]
    kernels: Vec<KernelKind>,
    /// Bound ids to check (default: the whole registry).
    #[arg(long, value_delimiter = ',', value_parser = parse_bound)]
    bounds: Vec<BoundId>,
    /// Relative slack tolerance for verdicts.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Report destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShellArgs {
    /// Kernel spec JSON file.
    #[arg(long)]
    space: PathBuf,
    /// Operator JSON file.
    #[arg(long)]
    op: PathBuf,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FixturesArgs {
    /// Replay a single fixture instead of all of them.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Bound id, e.g. B-T8.
    #[arg(long, value_parser = parse_bound)]
    bound: BoundId,
    /// Kernel spec JSON file.
    #[arg(long)]
    space: PathBuf,
    /// Operator JSON file.
    #[arg(long)]
    op: PathBuf,
    /// Second operand for the sum bounds.
    #[arg(long)]
    op_b: Option<PathBuf>,
}

fn parse_kernel(s: &str) -> Result<KernelKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_bound(s: &str) -> Result<BoundId, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Check(args) => run_check(args),
        Command::Shell(args) => run_shell(args),
        Command::Fixtures(args) => run_fixtures(args),
        Command::Eval(args) => run_eval(args),
    }
}

fn run_check(args: CheckArgs) -> ExitCode {
    let defaults = SuiteConfig::default();
    let cfg = SuiteConfig {
        seed: args.seed,
        trials: args.trials,
        dims: args.dims,
        omega_sizes: args.omega,
        kernel_kinds: args.kernels,
        bounds: if args.bounds.is_empty() {
            defaults.bounds
        } else {
            args.bounds
        },
        tol: args.tol,
    };
    let report = match harness::run_suite(&cfg) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("berlab check: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match io::report_to_json(&report) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("berlab check: {e}");
            return ExitCode::from(2);
        }
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("berlab check: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
            println!(
                "checked {} bound evaluations over {} trials: {} violations, {} errors -> {}",
                report.per_bound.values().map(|s| s.checked).sum::<u64>(),
                cfg.trials,
                report.total_violations,
                report.total_errors,
                path.display()
            );
        }
        None => print!("{text}"),
    }
    if report.total_errors > 0 {
        eprintln!(
            "warning: {} evaluations errored; see the failures list",
            report.total_errors
        );
    }
    if report.total_violations == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run_shell(args: ShellArgs) -> ExitCode {
    let result = (|| -> io::Result<String> {
        let space = io::load_space(&args.space)?;
        let a = io::load_operator(&args.op)?;
        let shell = berlab::berezin::dwber_shell(&a, &space).map_err(bounds_op_error)?;
        Ok(io::shell_csv(&shell))
    })();
    let csv = match result {
        Ok(csv) => csv,
        Err(e) => {
            eprintln!("berlab shell: {e}");
            return ExitCode::from(2);
        }
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &csv) {
                eprintln!("berlab shell: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}

fn bounds_op_error(e: berlab::operator::OperatorError) -> io::IoError {
    io::IoError::Operator(e)
}

fn run_fixtures(args: FixturesArgs) -> ExitCode {
    let names: Vec<&str> = match &args.name {
        Some(name) => vec![name.as_str()],
        None => harness::FIXTURE_NAMES.to_vec(),
    };
    for name in names {
        match harness::replay_fixture(name) {
            Ok(evals) => {
                println!("{name}:");
                for eval in &evals {
                    println!("  {}", describe(eval));
                }
            }
            Err(e) => {
                eprintln!("berlab fixtures: {e}");
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::SUCCESS
}

fn run_eval(args: EvalArgs) -> ExitCode {
    let loaded = (|| -> io::Result<_> {
        let space = io::load_space(&args.space)?;
        let a = io::load_operator(&args.op)?;
        let b = match &args.op_b {
            Some(path) => Some(io::load_operator(path)?),
            None => None,
        };
        Ok((space, a, b))
    })();
    let (space, a, b) = match loaded {
        Ok(parts) => parts,
        Err(e) => {
            eprintln!("berlab eval: {e}");
            return ExitCode::from(2);
        }
    };
    let cfg = EvalConfig::default();
    match bounds::evaluate_bound(args.bound, &a, &space, b.as_ref(), &cfg) {
        Ok(eval) => {
            println!("{}", describe(&eval));
            if eval.satisfied {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("berlab eval: {e}");
            ExitCode::from(2)
        }
    }
}

fn describe(eval: &BoundEvaluation<f64>) -> String {
    let mut line = format!(
        "{}: lhs={:.12e} rhs={:.12e} slack={:.6e} satisfied={}",
        eval.id, eval.lhs, eval.rhs, eval.slack, eval.satisfied
    );
    if let Some(theta) = eval.params.theta {
        line.push_str(&format!(" theta={theta:.6}"));
    }
    if let Some(alpha) = eval.params.alpha {
        line.push_str(&format!(" alpha={alpha:.6}"));
    }
    if let Some(r) = eval.params.r {
        line.push_str(&format!(" r={r}"));
    }
    line
}
