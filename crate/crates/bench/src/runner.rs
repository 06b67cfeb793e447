//! Timing runner: solve every requested problem with every requested solver,
//! repeat each measurement, keep the best time, and gate success on solution
//! quality rather than on what the solver claims about itself.

use std::time::Instant;

use optikit::{
    make_bfgs, make_bfgs_with, make_gauss_newton, make_levenberg_marquardt, make_nonlinear_cg,
    solve, Dogleg, LearningRate, SolveMode, Solver, TerminationConfig, Vector,
};

use crate::corpus::TestProblem;
use crate::BenchError;

// ---------------------------------------------------------------------------
// Clocks
// ---------------------------------------------------------------------------

/// A monotone seconds source. Injected into [`run_benchmark`] so tests can
/// measure with a deterministic clock instead of the wall.
pub trait Clock {
    /// Seconds since an arbitrary fixed origin; never decreases.
    fn now(&mut self) -> f64;
}

/// The real wall clock.
pub struct WallClock {
    origin: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock {
            origin: Instant::now(),
        }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        WallClock::new()
    }
}

impl Clock for WallClock {
    fn now(&mut self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// A fake clock that advances by a fixed tick per reading, making every
/// measured interval exactly one tick long.
pub struct TickClock {
    t: f64,
    tick: f64,
}

impl TickClock {
    pub fn new(tick: f64) -> Self {
        assert!(tick > 0.0, "a zero tick would measure zero-length runs");
        TickClock { t: 0.0, tick }
    }
}

impl Clock for TickClock {
    fn now(&mut self) -> f64 {
        self.t += self.tick;
        self.t
    }
}

// ---------------------------------------------------------------------------
// Solver registry
// ---------------------------------------------------------------------------

/// A solver with the name it goes by in CSV output and on the command line.
pub struct NamedSolver {
    pub name: String,
    pub solver: Solver,
}

/// Names accepted by [`make_named_solver`].
pub const SOLVER_NAMES: [&str; 7] = ["bfgs", "ncg", "gn", "lm", "lm1", "lm2", "hybrid"];

/// Build one registry solver. `lm` is an alias for `lm2` (the QR-based
/// damped solve); `lm1` forms the normal equations instead, which is faster
/// per step but squares the Jacobian's condition number. `hybrid` pairs the
/// BFGS quadratic model with a dogleg descent under a fixed learning rate.
pub fn make_named_solver(
    name: &str,
    rtol: f64,
    atol: f64,
    max_iters: usize,
) -> Result<NamedSolver, BenchError> {
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(BenchError::Config(format!(
            "tolerances must be positive, got rtol = {rtol}, atol = {atol}"
        )));
    }
    let term = TerminationConfig::new(rtol, atol).with_max_iters(max_iters);
    let composed = match name {
        "bfgs" => make_bfgs(rtol, atol, true),
        "ncg" => make_nonlinear_cg(rtol, atol)?,
        "gn" => make_gauss_newton(rtol, atol, SolveMode::AugmentedLstsq)?,
        "lm" | "lm2" => make_levenberg_marquardt(rtol, atol, SolveMode::AugmentedLstsq)?,
        "lm1" => make_levenberg_marquardt(rtol, atol, SolveMode::NormalEquations)?,
        "hybrid" => make_bfgs_with(rtol, atol, false, LearningRate::new(0.1), Dogleg::new())?,
        other => return Err(BenchError::UnknownSolver(other.to_string())),
    };
    Ok(NamedSolver {
        name: name.to_string(),
        solver: Solver::from(composed.with_termination(term)),
    })
}

/// Build the registry solvers for a list of names, rejecting duplicates
/// (duplicate names would silently merge in the profile stage).
pub fn solver_registry(
    names: &[String],
    rtol: f64,
    atol: f64,
    max_iters: usize,
) -> Result<Vec<NamedSolver>, BenchError> {
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        if out.iter().any(|ns: &NamedSolver| &ns.name == name) {
            return Err(BenchError::Config(format!(
                "solver `{name}` requested more than once"
            )));
        }
        out.push(make_named_solver(name, rtol, atol, max_iters)?);
    }
    if out.is_empty() {
        return Err(BenchError::Config("no solvers requested".to_string()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Quality gate and records
// ---------------------------------------------------------------------------

/// Tolerances for [`quality_gate`].
#[derive(Debug, Clone, Copy)]
pub struct GateParams {
    pub eps_a: f64,
    pub eps_r: f64,
}

impl Default for GateParams {
    fn default() -> Self {
        GateParams {
            eps_a: 1e-4,
            eps_r: 1e-4,
        }
    }
}

/// Did a run solve the problem? True iff
/// `|f_final − f_star| / (ε_a + ε_r·|f_star|) < 1`.
///
/// The absolute value on `f_star` keeps the denominator positive for
/// negative optima. If both tolerances contribute nothing (ε_a = 0 and
/// ε_r·|f_star| = 0) the gate degenerates to exact equality. A NaN final
/// value never passes.
pub fn quality_gate(f_final: f64, f_star: f64, eps_a: f64, eps_r: f64) -> bool {
    assert!(
        eps_a >= 0.0 && eps_r >= 0.0,
        "gate tolerances must be non-negative"
    );
    let denom = eps_a + eps_r * f_star.abs();
    if denom == 0.0 {
        return f_final == f_star;
    }
    (f_final - f_star).abs() / denom < 1.0
}

/// One (solver, problem) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub solver: String,
    pub problem: String,
    /// Best wall-clock time over the repeats, in seconds. Infinite exactly
    /// when `converged` is false, so failed runs fall off every profile.
    pub min_runtime: f64,
    pub converged: bool,
    /// Proposal count of the (deterministic) solve.
    pub iterations: usize,
    /// Final objective in the executed problem's metric; NaN when the
    /// solver refused the problem outright.
    pub final_f: f64,
}

/// Time `repeats` identical solves of every problem with every solver,
/// strictly sequentially, keeping each pair's best time. A run counts as
/// converged only if its final objective passes the quality gate against
/// the problem's known optimum; for problems with no known optimum the
/// solver's own convergence status decides. Solvers that cannot accept a
/// problem's kind produce a non-converged record rather than an error.
pub fn run_benchmark(
    problems: &[TestProblem],
    solvers: &[NamedSolver],
    repeats: usize,
    gate: GateParams,
    clock: &mut dyn Clock,
) -> Vec<BenchRecord> {
    assert!(repeats >= 1, "at least one timed run per pair");
    let mut records = Vec::with_capacity(problems.len() * solvers.len());
    for ns in solvers {
        for tp in problems {
            records.push(run_one(tp, ns, repeats, gate, clock));
        }
    }
    records
}

fn run_one(
    tp: &TestProblem,
    ns: &NamedSolver,
    repeats: usize,
    gate: GateParams,
    clock: &mut dyn Clock,
) -> BenchRecord {
    let mut best = f64::INFINITY;
    let mut outcome = None;
    for _ in 0..repeats {
        let problem = tp.problem();
        let t0 = clock.now();
        match solve(problem, &ns.solver, tp.x0()) {
            Ok(sol) => {
                let elapsed = clock.now() - t0;
                best = best.min(elapsed);
                outcome = Some(sol);
            }
            // The solver cannot run this problem at all (capability or
            // configuration): record a failure and move on.
            Err(_) => {
                outcome = None;
                break;
            }
        }
    }
    let (converged, iterations, final_f) = match &outcome {
        Some(sol) => {
            let ok = match tp.f_star() {
                Some(f_star) => quality_gate(sol.fval, f_star, gate.eps_a, gate.eps_r),
                None => sol.result.is_converged(),
            };
            (ok, sol.stats.iterations, sol.fval)
        }
        None => (false, 0, f64::NAN),
    };
    BenchRecord {
        solver: ns.name.clone(),
        problem: tp.name().to_string(),
        min_runtime: if converged { best } else { f64::INFINITY },
        converged,
        iterations,
        final_f,
    }
}

/// Convenience for solving one corpus problem outside a timing loop.
pub fn solve_untimed(
    tp: &TestProblem,
    solver: &Solver,
) -> Result<optikit::Solution, optikit::ConfigError> {
    solve(tp.problem(), solver, tp.x0())
}

/// A kind-appropriate default solver for re-solve checks: tight enough to
/// finish, native to the problem's kind where a native method exists.
pub fn default_solver_for(tp: &TestProblem, rtol: f64, atol: f64) -> Solver {
    use optikit::ProblemKind::*;
    match tp.kind() {
        Minimise => Solver::from(make_bfgs(rtol, atol, true)),
        LeastSquares => Solver::from(
            make_levenberg_marquardt(rtol, atol, SolveMode::AugmentedLstsq)
                .expect("positive tolerances"),
        ),
        RootFind => Solver::newton_root(rtol, atol),
        FixedPoint => Solver::fixed_point_iteration(rtol, atol),
    }
}

/// Start-point accessor used by tests that re-solve from a previous answer.
pub fn resolve_from(
    tp: &TestProblem,
    solver: &Solver,
    start: &Vector,
) -> Result<optikit::Solution, optikit::ConfigError> {
    solve(tp.problem(), solver, start)
}
