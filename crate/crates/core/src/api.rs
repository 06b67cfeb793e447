//! User-facing entry points with automatic problem conversion.
//!
//! The four problem kinds form a one-way lowering chain
//!
//! ```text
//! fixed point  →  root find  →  least squares  →  minimise
//!    f(x)=x        f(x)−x=0      rᵢ = f(x)ᵢ        Σᵢ rᵢ²
//! ```
//!
//! and every solver advertises the kinds it runs natively. Asking a solver
//! to handle a problem further *up* the chain triggers the conversions in
//! between — a minimiser will happily root-find by driving the residual sum
//! of squares to zero — while a problem below the solver's reach is a
//! configuration error reported before anything is evaluated. The chain a
//! solve actually travelled is recorded on [`Solution::lowering`].
//!
//! Conversions never change evaluation semantics: the lowered objective
//! calls the user function exactly once per visited point, and solves whose
//! original problem was a root-find or fixed point carry an independent
//! defect norm in [`SolveStats::root_residual_norm`] so a spurious local
//! minimum of `Σ fᵢ²` cannot masquerade as a root.

use std::cell::Cell;

use crate::driver::{iterate, run_simple};
use crate::linalg::{max_norm, Matrix, Vector};
use crate::problem::{
    cauchy_termination, Problem, ProblemFns, ProblemKind, Solution, SolveResult, SolveStats,
    TerminationConfig,
};
use crate::solvers::{
    bisection_step, newton_root_step, ComposedSolver, ConfigError, InfoPolicy, JacMode,
};
use crate::{diff, ProblemKind::*};

// ---------------------------------------------------------------------------
// Capabilities and the solver enum
// ---------------------------------------------------------------------------

/// The set of problem kinds a solver runs natively (always nonempty).
///
/// A solver *handles* any kind that can be lowered into one of its native
/// kinds; [`SolverCapability::handles`] answers that broader question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverCapability {
    native: [bool; 4],
}

fn kind_index(kind: ProblemKind) -> usize {
    match kind {
        Minimise => 0,
        LeastSquares => 1,
        RootFind => 2,
        FixedPoint => 3,
    }
}

/// The kinds `kind` can be lowered into, starting with itself.
fn lowering_path(kind: ProblemKind) -> &'static [ProblemKind] {
    match kind {
        FixedPoint => &[FixedPoint, RootFind, LeastSquares, Minimise],
        RootFind => &[RootFind, LeastSquares, Minimise],
        LeastSquares => &[LeastSquares, Minimise],
        Minimise => &[Minimise],
    }
}

impl SolverCapability {
    /// Capability over the given native kinds; at least one is required.
    pub fn of(kinds: &[ProblemKind]) -> SolverCapability {
        assert!(!kinds.is_empty(), "a solver must support at least one kind");
        let mut native = [false; 4];
        for &k in kinds {
            native[kind_index(k)] = true;
        }
        SolverCapability { native }
    }

    /// Does the solver run this kind without conversion?
    pub fn is_native(&self, kind: ProblemKind) -> bool {
        self.native[kind_index(kind)]
    }

    /// Can the solver run this kind at all, converting if necessary?
    pub fn handles(&self, kind: ProblemKind) -> bool {
        lowering_path(kind).iter().any(|&k| self.is_native(k))
    }

    /// The native kinds, in lowering order.
    pub fn native_kinds(&self) -> Vec<ProblemKind> {
        [Minimise, LeastSquares, RootFind, FixedPoint]
            .into_iter()
            .filter(|&k| self.is_native(k))
            .collect()
    }
}

/// Any solver the entry points can dispatch to: a composed
/// search/descent/policy solver, or one of the classical single-sequence
/// iterations.
#[derive(Debug, Clone)]
pub enum Solver {
    /// A search × descent × information-policy composition.
    Composed(ComposedSolver),
    /// Newton's method for square root-finding problems, refreshing the
    /// Jacobian at every iterate.
    NewtonRoot { config: TerminationConfig },
    /// Newton's method with the Jacobian frozen at the initial point.
    Chord { config: TerminationConfig },
    /// Interval bisection for one-dimensional root finding. The bracket
    /// must straddle a sign change.
    Bisection {
        lower: f64,
        upper: f64,
        config: TerminationConfig,
    },
    /// The plain iteration `x ← f(x)` for fixed-point problems.
    FixedPointIteration { config: TerminationConfig },
}

impl Solver {
    pub fn newton_root(rtol: f64, atol: f64) -> Solver {
        Solver::NewtonRoot {
            config: TerminationConfig::new(rtol, atol),
        }
    }

    pub fn chord(rtol: f64, atol: f64) -> Solver {
        Solver::Chord {
            config: TerminationConfig::new(rtol, atol),
        }
    }

    /// Bisection over `[lower, upper]`. The bracket is validated (finite,
    /// ordered) here; the sign-change check needs function values and
    /// happens when the solve starts.
    pub fn bisection(lower: f64, upper: f64, rtol: f64, atol: f64) -> Result<Solver, ConfigError> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(ConfigError::Invalid(format!(
                "bisection needs a finite ordered bracket, got [{lower}, {upper}]"
            )));
        }
        Ok(Solver::Bisection {
            lower,
            upper,
            config: TerminationConfig::new(rtol, atol),
        })
    }

    pub fn fixed_point_iteration(rtol: f64, atol: f64) -> Solver {
        Solver::FixedPointIteration {
            config: TerminationConfig::new(rtol, atol),
        }
    }

    /// The kinds this solver runs natively.
    pub fn capability(&self) -> SolverCapability {
        match self {
            Solver::Composed(solver) => match solver.policy() {
                InfoPolicy::ResidualJacobian => SolverCapability::of(&[LeastSquares]),
                _ => SolverCapability::of(&[Minimise]),
            },
            Solver::NewtonRoot { .. } | Solver::Chord { .. } | Solver::Bisection { .. } => {
                SolverCapability::of(&[RootFind])
            }
            Solver::FixedPointIteration { .. } => SolverCapability::of(&[FixedPoint]),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Solver::Composed(solver) => match solver.policy() {
                InfoPolicy::ResidualJacobian => "a residual-based solver",
                _ => "a gradient-based minimiser",
            },
            Solver::NewtonRoot { .. } => "newton",
            Solver::Chord { .. } => "chord",
            Solver::Bisection { .. } => "bisection",
            Solver::FixedPointIteration { .. } => "fixed-point iteration",
        }
    }
}

impl From<ComposedSolver> for Solver {
    fn from(solver: ComposedSolver) -> Solver {
        Solver::Composed(solver)
    }
}

// ---------------------------------------------------------------------------
// Residual flattening
// ---------------------------------------------------------------------------

/// Anything a least-squares residual function may return: a scalar, a
/// vector, or arbitrarily nested sequences of those. Nested structure is
/// flattened depth-first, left to right, so a function returning
/// `(block_a, block_b)` contributes `block_a`'s entries first.
pub trait IntoResiduals {
    fn append_residuals(self, out: &mut Vec<f64>);
}

impl IntoResiduals for f64 {
    fn append_residuals(self, out: &mut Vec<f64>) {
        out.push(self);
    }
}

impl IntoResiduals for Vector {
    fn append_residuals(self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.as_slice());
    }
}

impl IntoResiduals for Vec<f64> {
    fn append_residuals(self, out: &mut Vec<f64>) {
        out.extend(self);
    }
}

impl<const N: usize> IntoResiduals for [f64; N] {
    fn append_residuals(self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self);
    }
}

impl IntoResiduals for Vec<Vector> {
    fn append_residuals(self, out: &mut Vec<f64>) {
        for block in self {
            block.append_residuals(out);
        }
    }
}

impl IntoResiduals for Vec<Vec<f64>> {
    fn append_residuals(self, out: &mut Vec<f64>) {
        for block in self {
            block.append_residuals(out);
        }
    }
}

impl<A: IntoResiduals, B: IntoResiduals> IntoResiduals for (A, B) {
    fn append_residuals(self, out: &mut Vec<f64>) {
        self.0.append_residuals(out);
        self.1.append_residuals(out);
    }
}

impl<A: IntoResiduals, B: IntoResiduals, C: IntoResiduals> IntoResiduals for (A, B, C) {
    fn append_residuals(self, out: &mut Vec<f64>) {
        self.0.append_residuals(out);
        self.1.append_residuals(out);
        self.2.append_residuals(out);
    }
}

impl<A, B, C, D> IntoResiduals for (A, B, C, D)
where
    A: IntoResiduals,
    B: IntoResiduals,
    C: IntoResiduals,
    D: IntoResiduals,
{
    fn append_residuals(self, out: &mut Vec<f64>) {
        self.0.append_residuals(out);
        self.1.append_residuals(out);
        self.2.append_residuals(out);
        self.3.append_residuals(out);
    }
}

fn flatten<R: IntoResiduals>(value: R) -> Vector {
    let mut out = Vec::new();
    value.append_residuals(&mut out);
    Vector::from(out)
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Minimise a scalar objective from `x0`. The gradient comes from central
/// finite differences; supply an analytic one with
/// [`minimise_with_gradient`].
pub fn minimise(
    f: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
    solver: &Solver,
    x0: &Vector,
) -> Result<Solution, ConfigError> {
    solve(Problem::minimise(x0.len(), f), solver, x0)
}

/// [`minimise`] with an analytic gradient.
pub fn minimise_with_gradient(
    f: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
    grad: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    solver: &Solver,
    x0: &Vector,
) -> Result<Solution, ConfigError> {
    solve(Problem::minimise(x0.len(), f).with_gradient(grad), solver, x0)
}

/// Solve a nonlinear least-squares problem `min Σᵢ rᵢ(x)²`. The residual
/// function may return any [`IntoResiduals`] shape — nested blocks are
/// concatenated depth-first, left to right.
pub fn least_squares<R: IntoResiduals>(
    f: impl Fn(&Vector) -> R + Send + Sync + 'static,
    solver: &Solver,
    x0: &Vector,
) -> Result<Solution, ConfigError> {
    solve(
        Problem::least_squares(x0.len(), move |x| flatten(f(x))),
        solver,
        x0,
    )
}

/// [`least_squares`] with an analytic Jacobian of the flattened residual.
pub fn least_squares_with_jacobian<R: IntoResiduals>(
    f: impl Fn(&Vector) -> R + Send + Sync + 'static,
    jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
    solver: &Solver,
    x0: &Vector,
) -> Result<Solution, ConfigError> {
    solve(
        Problem::least_squares(x0.len(), move |x| flatten(f(x))).with_jacobian(jac),
        solver,
        x0,
    )
}

/// Find `x` with `f(x) = 0`.
pub fn root_find(
    f: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    solver: &Solver,
    x0: &Vector,
) -> Result<Solution, ConfigError> {
    solve(Problem::root_find(x0.len(), f), solver, x0)
}

/// [`root_find`] with an analytic Jacobian.
pub fn root_find_with_jacobian(
    f: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
    solver: &Solver,
    x0: &Vector,
) -> Result<Solution, ConfigError> {
    solve(Problem::root_find(x0.len(), f).with_jacobian(jac), solver, x0)
}

/// Find `x` with `f(x) = x`; `f` must map `ℝⁿ → ℝⁿ`.
pub fn fixed_point(
    f: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    solver: &Solver,
    x0: &Vector,
) -> Result<Solution, ConfigError> {
    solve(Problem::fixed_point(x0.len(), f), solver, x0)
}

/// [`fixed_point`] with an analytic Jacobian.
pub fn fixed_point_with_jacobian(
    f: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
    solver: &Solver,
    x0: &Vector,
) -> Result<Solution, ConfigError> {
    solve(
        Problem::fixed_point(x0.len(), f).with_jacobian(jac),
        solver,
        x0,
    )
}

/// Run `solver` on an explicit [`Problem`], converting the problem kind as
/// far down the lowering chain as the solver requires. All capability
/// checking happens here, before anything is evaluated.
pub fn solve(problem: Problem, solver: &Solver, x0: &Vector) -> Result<Solution, ConfigError> {
    let original_kind = problem.kind();
    let capability = solver.capability();
    let target = lowering_path(original_kind)
        .iter()
        .copied()
        .find(|&k| capability.is_native(k))
        .ok_or_else(|| ConfigError::Capability {
            solver: solver.name().to_string(),
            kind: original_kind,
        })?;

    // Keep the original map for the post-solve defect check before the
    // conversions rewrap it.
    let original_vector_fn = match &problem.fns {
        ProblemFns::Vector { f, .. } => Some(f.clone()),
        ProblemFns::Scalar { .. } => None,
    };

    let mut lowered = problem;
    while lowered.kind() != target {
        lowered = lower_once(lowered);
    }

    let mut solution = match solver {
        Solver::Composed(composed) => iterate(&lowered, composed, x0, composed.termination()),
        Solver::NewtonRoot { config } => {
            newton_like_solve(&lowered, x0, config, JacRefresh::EveryStep)
        }
        Solver::Chord { config } => newton_like_solve(&lowered, x0, config, JacRefresh::Initial),
        Solver::Bisection {
            lower,
            upper,
            config,
        } => bisection_solve(&lowered, *lower, *upper, config)?,
        Solver::FixedPointIteration { config } => fixed_point_solve(&lowered, x0, config),
    };

    // Conversion can report convergence in the lowered metric; attach the
    // defect of the *original* equation so callers can tell a genuine root
    // from a spurious stationary point. This check sits outside the solve
    // and is not part of the evaluation counts.
    if let Some(f) = original_vector_fn {
        let defect = match original_kind {
            RootFind => Some(max_norm(&f(&solution.value))),
            FixedPoint => Some(max_norm(&(&f(&solution.value) - &solution.value))),
            _ => None,
        };
        solution.stats.root_residual_norm = defect;
    }
    Ok(solution)
}

/// One step down the lowering chain.
fn lower_once(problem: Problem) -> Problem {
    match (problem.kind(), &problem.fns) {
        (FixedPoint, ProblemFns::Vector { f, jac }) => {
            let f2 = f.clone();
            let wrapped: crate::problem::VectorFn =
                std::sync::Arc::new(move |x: &Vector| &f2(x) - x);
            let wrapped_jac = jac.as_ref().map(|j| {
                let j2 = j.clone();
                let out: crate::problem::MatrixFn =
                    std::sync::Arc::new(move |x: &Vector| j2(x).add_scaled_identity(-1.0));
                out
            });
            problem.lowered(
                RootFind,
                ProblemFns::Vector {
                    f: wrapped,
                    jac: wrapped_jac,
                },
            )
        }
        // Root → least squares and least squares → minimise reuse the same
        // callables: the residuals *are* the map's entries, and the driver
        // derives the scalar objective Σ rᵢ² (gradient 2Jᵀr) on the fly, so
        // the function is still evaluated exactly once per point.
        (RootFind, fns) => problem.lowered(LeastSquares, fns.clone()),
        (LeastSquares, fns) => problem.lowered(Minimise, fns.clone()),
        (kind, _) => unreachable!("no lowering below {kind:?}"),
    }
}

// ---------------------------------------------------------------------------
// Classical drivers
// ---------------------------------------------------------------------------

enum JacRefresh {
    EveryStep,
    Initial,
}

/// Newton or chord iteration on a square root-find problem.
fn newton_like_solve(
    problem: &Problem,
    x0: &Vector,
    config: &TerminationConfig,
    refresh: JacRefresh,
) -> Solution {
    let (f, user_jac) = match &problem.fns {
        ProblemFns::Vector { f, jac } => (f.clone(), jac.clone()),
        ProblemFns::Scalar { .. } => unreachable!("root-find problems hold vector maps"),
    };
    let fn_evals = Cell::new(0usize);
    let grad_evals = Cell::new(0usize);
    let f_counted = |x: &Vector| {
        fn_evals.set(fn_evals.get() + 1);
        let out = f(x);
        problem.note_dim_out(out.len());
        out
    };
    let jac_counted = |x: &Vector| {
        grad_evals.set(grad_evals.get() + 1);
        match &user_jac {
            Some(j) => j(x),
            None => diff::jacobian(|p| f(p), x),
        }
    };

    let mut fx = f_counted(x0);
    let defect0 = fx.dot(&fx);
    let mode = match refresh {
        JacRefresh::EveryStep => JacMode::Newton,
        JacRefresh::Initial => JacMode::Chord(jac_counted(x0)),
    };

    let (value, defect, result, iterations) = run_simple(
        x0,
        config,
        |x| {
            // `fx` already holds f(x) — hand the cached value to the step so
            // the map is evaluated exactly once per visited point.
            let x_next = newton_root_step(|_| fx.clone(), &jac_counted, x, &mode)
                .map_err(|_| SolveResult::LinearSolveFailed)?;
            let fx_next = f_counted(&x_next);
            let defect = fx_next.dot(&fx_next);
            fx = fx_next;
            Ok::<_, SolveResult>((x_next, defect))
        },
        defect0,
    );

    Solution {
        residual: result.is_converged().then(|| fx.clone()),
        value,
        fval: defect,
        result,
        stats: SolveStats {
            iterations,
            fn_evals: fn_evals.get(),
            grad_evals: grad_evals.get(),
            accepted_steps: iterations,
            rejected_steps: 0,
            root_residual_norm: None,
        },
        lowering: problem.chain().to_vec(),
    }
}

/// The iteration `x ← f(x)` on a fixed-point problem.
fn fixed_point_solve(problem: &Problem, x0: &Vector, config: &TerminationConfig) -> Solution {
    let f = match &problem.fns {
        ProblemFns::Vector { f, .. } => f.clone(),
        ProblemFns::Scalar { .. } => unreachable!("fixed-point problems hold vector maps"),
    };
    let fn_evals = Cell::new(0usize);
    let f_counted = |x: &Vector| {
        fn_evals.set(fn_evals.get() + 1);
        let out = f(x);
        problem.note_dim_out(out.len());
        assert_eq!(
            out.len(),
            x.len(),
            "a fixed-point map must return as many entries as it consumes"
        );
        out
    };

    // `pending` is f at the current iterate; each step promotes it to the
    // next iterate and evaluates once to refresh the defect ‖f(x)−x‖².
    let mut pending = f_counted(x0);
    let defect0 = {
        let d = &pending - x0;
        d.dot(&d)
    };
    let (value, defect, result, iterations) = run_simple(
        x0,
        config,
        |_x| {
            let next = pending.clone();
            pending = f_counted(&next);
            let diff = &pending - &next;
            Ok::<_, SolveResult>((next, diff.dot(&diff)))
        },
        defect0,
    );

    Solution {
        value,
        fval: defect,
        residual: None,
        result,
        stats: SolveStats {
            iterations,
            fn_evals: fn_evals.get(),
            grad_evals: 0,
            accepted_steps: iterations,
            rejected_steps: 0,
            root_residual_norm: None,
        },
        lowering: problem.chain().to_vec(),
    }
}

/// Interval bisection on a one-dimensional root-find problem.
fn bisection_solve(
    problem: &Problem,
    lower: f64,
    upper: f64,
    config: &TerminationConfig,
) -> Result<Solution, ConfigError> {
    if problem.dim_in() != 1 {
        return Err(ConfigError::Invalid(format!(
            "bisection is one-dimensional, problem has {} inputs",
            problem.dim_in()
        )));
    }
    let f = match &problem.fns {
        ProblemFns::Vector { f, .. } => f.clone(),
        ProblemFns::Scalar { .. } => unreachable!("root-find problems hold vector maps"),
    };
    let fn_evals = Cell::new(0usize);
    let f_scalar = |t: f64| {
        fn_evals.set(fn_evals.get() + 1);
        let out = f(&Vector::from([t]));
        problem.note_dim_out(out.len());
        assert_eq!(out.len(), 1, "bisection needs a scalar-valued map");
        out[0]
    };

    let solution = |value: f64, fval: f64, result, iterations| Solution {
        value: Vector::from([value]),
        fval,
        residual: None,
        result,
        stats: SolveStats {
            iterations,
            fn_evals: fn_evals.get(),
            grad_evals: 0,
            accepted_steps: iterations,
            rejected_steps: 0,
            root_residual_norm: None,
        },
        lowering: problem.chain().to_vec(),
    };

    let f_lo = f_scalar(lower);
    if f_lo == 0.0 {
        return Ok(solution(lower, 0.0, SolveResult::Converged, 0));
    }
    let f_hi = f_scalar(upper);
    if f_hi == 0.0 {
        return Ok(solution(upper, 0.0, SolveResult::Converged, 0));
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(ConfigError::Invalid(
            "bisection bracket endpoints must evaluate to finite values".into(),
        ));
    }
    if f_lo * f_hi > 0.0 {
        return Err(ConfigError::Invalid(format!(
            "no sign change over [{lower}, {upper}]: f(lo) = {f_lo}, f(hi) = {f_hi}"
        )));
    }

    let (mut lo, mut hi) = (lower, upper);
    let mut mid_prev = 0.5 * (lo + hi);
    let mut width_prev = hi - lo;
    for iteration in 1..=config.max_iters {
        let ((lo2, hi2), mid) = bisection_step(&f_scalar, (lo, hi));
        if lo2 == hi2 {
            // Exact hit at the midpoint.
            return Ok(solution(mid, 0.0, SolveResult::Converged, iteration));
        }
        let mid_next = 0.5 * (lo2 + hi2);
        let width_next = hi2 - lo2;
        let converged = cauchy_termination(
            &Vector::from([mid_prev]),
            &Vector::from([mid_next]),
            width_prev * width_prev,
            width_next * width_next,
            config,
        );
        lo = lo2;
        hi = hi2;
        mid_prev = mid_next;
        width_prev = width_next;
        if converged {
            let f_mid = f_scalar(mid_next);
            return Ok(solution(
                mid_next,
                f_mid * f_mid,
                SolveResult::Converged,
                iteration,
            ));
        }
    }
    let f_mid = f_scalar(mid_prev);
    Ok(solution(
        mid_prev,
        f_mid * f_mid,
        SolveResult::MaxItersReached,
        config.max_iters,
    ))
}
