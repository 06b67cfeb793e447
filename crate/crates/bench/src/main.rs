//! The `bench` command-line tool.
//!
//! `bench run` times solvers over the builtin corpus and writes a results
//! CSV; `bench profile` turns such a CSV into performance-profile curves
//! (optionally restricted to a head-to-head pair, optionally plotted).
//!
//! Exit codes: 0 on success, 2 on any configuration error, 3 when every run
//! of some requested solver failed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use optikit_bench::corpus::{builtin_corpus, find_problem, TestProblem};
use optikit_bench::io::{plot_svg, read_records, write_profile, write_records};
use optikit_bench::profile::{default_tau_grid, performance_profile, restrict_to_pair};
use optikit_bench::runner::{run_benchmark, solver_registry, GateParams, WallClock};
use optikit_bench::BenchError;

#[derive(Parser)]
#[command(
    name = "bench",
    about = "Benchmark optikit solvers and draw performance profiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time every requested solver on every requested problem.
    Run(RunArgs),
    /// Turn a results CSV into performance-profile curves.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated solver names: bfgs, ncg, gn, lm, lm1, lm2, hybrid.
    #[arg(long, value_delimiter = ',', required = true)]
    solvers: Vec<String>,

    /// Comma-separated corpus problem names, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    problems: Vec<String>,

    /// Timed solves per (solver, problem) pair; the best time is kept.
    #[arg(long, default_value_t = 10)]
    repeats: usize,

    /// Relative termination tolerance handed to every solver.
    #[arg(long, default_value_t = 1e-5)]
    rtol: f64,

    /// Absolute termination tolerance handed to every solver.
    #[arg(long, default_value_t = 1e-6)]
    atol: f64,

    /// Proposal budget per solve.
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,

    /// Absolute tolerance of the solution-quality gate.
    #[arg(long, default_value_t = 1e-4)]
    eps_a: f64,

    /// Relative tolerance of the solution-quality gate.
    #[arg(long, default_value_t = 1e-4)]
    eps_r: f64,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    /// Results CSV produced by `bench run`.
    #[arg(long = "in")]
    input: PathBuf,

    /// What the profile measures.
    #[arg(long, value_enum, default_value_t = Metric::Runtime)]
    metric: Metric,

    /// Restrict to a head-to-head pair, e.g. `--pair bfgs,lm`.
    #[arg(long, value_delimiter = ',')]
    pair: Option<Vec<String>>,

    /// Output CSV path for the curves.
    #[arg(long)]
    out: PathBuf,

    /// Also render the curves to this SVG file.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Metric {
    Runtime,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Profile(args) => profile(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(2);
        }
    }
}

fn select_problems(names: &[String]) -> Result<Vec<TestProblem>, BenchError> {
    let corpus = builtin_corpus();
    if names.iter().any(|n| n == "all") {
        if names.len() > 1 {
            return Err(BenchError::Config(
                "`all` cannot be combined with individual problem names".to_string(),
            ));
        }
        return Ok(corpus);
    }
    if names.is_empty() {
        return Err(BenchError::Config("no problems requested".to_string()));
    }
    names
        .iter()
        .map(|name| {
            find_problem(&corpus, name).ok_or_else(|| BenchError::UnknownProblem(name.clone()))
        })
        .collect()
}

fn run(args: RunArgs) -> Result<i32, BenchError> {
    if args.repeats == 0 {
        return Err(BenchError::Config("--repeats must be at least 1".to_string()));
    }
    if !(args.eps_a >= 0.0 && args.eps_r >= 0.0) {
        return Err(BenchError::Config(
            "gate tolerances must be non-negative".to_string(),
        ));
    }
    let solvers = solver_registry(&args.solvers, args.rtol, args.atol, args.max_iters)?;
    let problems = select_problems(&args.problems)?;
    let gate = GateParams {
        eps_a: args.eps_a,
        eps_r: args.eps_r,
    };
    let mut clock = WallClock::new();
    let records = run_benchmark(&problems, &solvers, args.repeats, gate, &mut clock);
    write_records(&args.out, &records)?;
    eprintln!(
        "wrote {} records ({} solvers × {} problems) to {}",
        records.len(),
        solvers.len(),
        problems.len(),
        args.out.display()
    );
    for ns in &solvers {
        let all_failed = records
            .iter()
            .filter(|r| r.solver == ns.name)
            .all(|r| !r.converged);
        if all_failed {
            eprintln!("warning: solver `{}` failed on every problem", ns.name);
            return Ok(3);
        }
    }
    Ok(0)
}

fn profile(args: ProfileArgs) -> Result<i32, BenchError> {
    let Metric::Runtime = args.metric;
    let mut records = read_records(&args.input)?;
    if let Some(pair) = &args.pair {
        if pair.len() != 2 {
            return Err(BenchError::Config(format!(
                "--pair needs exactly two solver names, got {}",
                pair.len()
            )));
        }
        records = restrict_to_pair(&records, &pair[0], &pair[1]);
        for name in pair {
            if !records.iter().any(|r| &r.solver == name) {
                return Err(BenchError::Config(format!(
                    "solver `{name}` does not appear in {}",
                    args.input.display()
                )));
            }
        }
    }
    let report = performance_profile(&records, &default_tau_grid())?;
    for problem in &report.dropped {
        eprintln!("warning: dropping problem `{problem}`: no solver recorded a finite time");
    }
    write_profile(&args.out, &report.curves)?;
    if let Some(plot) = &args.plot {
        plot_svg(plot, &report.curves)?;
        eprintln!("wrote plot to {}", plot.display());
    }
    eprintln!(
        "wrote {} curves to {}",
        report.curves.len(),
        args.out.display()
    );
    Ok(0)
}
