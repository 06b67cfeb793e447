//! Problem descriptions, termination, and solve results.
//!
//! A [`Problem`] bundles what the user wants solved — one of four
//! [`ProblemKind`]s — with the callables that define it. Solvers never see the
//! user's closures directly; the driver evaluates them and hands solvers a
//! packet of local information (see [`crate::info::FnInfo`]).
//!
//! Termination is the two-sided Cauchy test of [`cauchy_termination`]: an
//! accepted step must make both the objective difference and the elementwise
//! scaled step small before a solve reports convergence.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::linalg::{Matrix, Vector};

/// The four problem families. Each kind lowers to the next: a fixed point is
/// a root of `f(x) − x`, a root is a zero-residual least-squares problem, and
/// least squares is minimisation of the residual sum of squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Minimise,
    LeastSquares,
    RootFind,
    FixedPoint,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProblemKind::Minimise => "minimise",
            ProblemKind::LeastSquares => "least-squares",
            ProblemKind::RootFind => "root-find",
            ProblemKind::FixedPoint => "fixed-point",
        };
        f.write_str(s)
    }
}

pub(crate) type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub(crate) type VectorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub(crate) type MatrixFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// The callables backing a problem. Scalar problems carry an objective and
/// optionally its gradient; vector problems carry a residual/root/fixed-point
/// map and optionally its Jacobian. Missing derivatives fall back to central
/// finite differences at evaluation time.
#[derive(Clone)]
pub(crate) enum ProblemFns {
    Scalar {
        f: ScalarFn,
        grad: Option<VectorFn>,
    },
    Vector {
        f: VectorFn,
        jac: Option<MatrixFn>,
    },
}

/// A problem instance: kind, dimensions, callables, and the lowering chain
/// that produced it (identity chain for freshly constructed problems).
///
/// Cloning is cheap — the callables are shared.
#[derive(Clone)]
pub struct Problem {
    kind: ProblemKind,
    chain: Vec<ProblemKind>,
    pub(crate) fns: ProblemFns,
    dim_in: usize,
    dim_out: Arc<OnceLock<usize>>,
}

impl Problem {
    fn new(kind: ProblemKind, dim_in: usize, fns: ProblemFns) -> Self {
        Problem {
            kind,
            chain: vec![kind],
            fns,
            dim_in,
            dim_out: Arc::new(OnceLock::new()),
        }
    }

    /// Scalar minimisation; the gradient is obtained by central finite
    /// differences unless [`Problem::with_gradient`] supplies one.
    pub fn minimise(dim_in: usize, f: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        Problem::new(
            ProblemKind::Minimise,
            dim_in,
            ProblemFns::Scalar {
                f: Arc::new(f),
                grad: None,
            },
        )
    }

    /// Nonlinear least squares over a residual map; the objective is the
    /// residual sum of squares `‖r(x)‖²`.
    pub fn least_squares(
        dim_in: usize,
        r: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Problem::new(
            ProblemKind::LeastSquares,
            dim_in,
            ProblemFns::Vector {
                f: Arc::new(r),
                jac: None,
            },
        )
    }

    /// Root finding: seek `x` with `f(x) = 0`.
    pub fn root_find(dim_in: usize, f: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        Problem::new(
            ProblemKind::RootFind,
            dim_in,
            ProblemFns::Vector {
                f: Arc::new(f),
                jac: None,
            },
        )
    }

    /// Fixed-point problem: seek `x` with `f(x) = x`; `f` must map `ℝⁿ → ℝⁿ`.
    pub fn fixed_point(
        dim_in: usize,
        f: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Problem::new(
            ProblemKind::FixedPoint,
            dim_in,
            ProblemFns::Vector {
                f: Arc::new(f),
                jac: None,
            },
        )
    }

    /// Attach an analytic gradient (scalar problems only).
    pub fn with_gradient(
        mut self,
        grad: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        match &mut self.fns {
            ProblemFns::Scalar { grad: g, .. } => *g = Some(Arc::new(grad)),
            ProblemFns::Vector { .. } => {
                panic!("with_gradient: this problem takes a Jacobian, not a gradient")
            }
        }
        self
    }

    /// Attach an analytic Jacobian (residual/root/fixed-point problems only).
    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        match &mut self.fns {
            ProblemFns::Vector { jac: j, .. } => *j = Some(Arc::new(jac)),
            ProblemFns::Scalar { .. } => {
                panic!("with_jacobian: this problem takes a gradient, not a Jacobian")
            }
        }
        self
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    /// Output dimension of the vector map, once known. For vector problems
    /// this is discovered at the first evaluation; scalar problems report 1.
    pub fn dim_out(&self) -> Option<usize> {
        match &self.fns {
            ProblemFns::Scalar { .. } => Some(1),
            ProblemFns::Vector { .. } => self.dim_out.get().copied(),
        }
    }

    pub(crate) fn note_dim_out(&self, m: usize) {
        let known = *self.dim_out.get_or_init(|| m);
        assert_eq!(
            known, m,
            "problem returned {m} outputs after previously returning {known}; \
             the map must be deterministic with a fixed output size"
        );
    }

    /// The lowering chain that produced this problem, original kind first.
    /// A freshly constructed problem has a one-element chain.
    pub fn chain(&self) -> &[ProblemKind] {
        &self.chain
    }

    /// Rewrap with new callables for a lowered kind, extending the chain.
    /// Used by the conversion layer in [`crate::api`].
    pub(crate) fn lowered(&self, kind: ProblemKind, fns: ProblemFns) -> Problem {
        let mut chain = self.chain.clone();
        chain.push(kind);
        Problem {
            kind,
            chain,
            fns,
            dim_in: self.dim_in,
            dim_out: Arc::new(OnceLock::new()),
        }
    }
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("kind", &self.kind)
            .field("chain", &self.chain)
            .field("dim_in", &self.dim_in)
            .finish()
    }
}

// ---------------------------------------------------------------------------
// Norms and termination
// ---------------------------------------------------------------------------

/// Vector norm used by termination tests and trust-region style descents.
#[derive(Clone, Default)]
pub enum Norm {
    /// `max_i |v_i|` — the default for termination.
    #[default]
    Max,
    /// Euclidean norm — the default for dogleg-style radius checks.
    Euclidean,
    /// Any user-supplied absolutely homogeneous norm.
    Custom(Arc<dyn Fn(&Vector) -> f64 + Send + Sync>),
}

impl Norm {
    pub fn apply(&self, v: &Vector) -> f64 {
        match self {
            Norm::Max => v.max_norm(),
            Norm::Euclidean => v.norm2(),
            Norm::Custom(f) => f(v),
        }
    }

    /// True for the built-in Euclidean norm; lets dogleg use its closed-form
    /// boundary intersection instead of bisection.
    pub fn is_euclidean(&self) -> bool {
        matches!(self, Norm::Euclidean)
    }
}

impl fmt::Debug for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Max => f.write_str("Norm::Max"),
            Norm::Euclidean => f.write_str("Norm::Euclidean"),
            Norm::Custom(_) => f.write_str("Norm::Custom(..)"),
        }
    }
}

/// Tolerances and budget for a solve.
#[derive(Debug, Clone)]
pub struct TerminationConfig {
    /// Relative tolerance `ε_r`.
    pub rtol: f64,
    /// Absolute tolerance `ε_a`.
    pub atol: f64,
    /// Norm applied to the scaled step in the Cauchy test.
    pub norm: Norm,
    /// Maximum number of proposals (accepted + rejected steps).
    pub max_iters: usize,
}

impl TerminationConfig {
    pub fn new(rtol: f64, atol: f64) -> Self {
        TerminationConfig {
            rtol,
            atol,
            norm: Norm::Max,
            max_iters: 2000,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }
}

impl Default for TerminationConfig {
    fn default() -> Self {
        TerminationConfig::new(1e-5, 1e-6)
    }
}

/// Two-sided Cauchy convergence test between consecutive accepted iterates.
///
/// Converged iff both
///
/// ```text
/// |f_next − f_prev| / (ε_a + ε_r·|f_prev|)            < 1
/// ‖ (x_next − x_prev) ⊘ (ε_a + ε_r·|x_prev|) ‖_norm   < 1
/// ```
///
/// The absolute values on `f_prev` and `x_prev` keep the scale denominators
/// positive for negative objectives and iterates. NaN anywhere yields `false`.
pub fn cauchy_termination(
    x_prev: &Vector,
    x_next: &Vector,
    f_prev: f64,
    f_next: f64,
    cfg: &TerminationConfig,
) -> bool {
    assert_eq!(x_prev.len(), x_next.len(), "cauchy: dimension mismatch");
    let f_scale = cfg.atol + cfg.rtol * f_prev.abs();
    let f_ok = (f_next - f_prev).abs() / f_scale < 1.0;
    let scaled = Vector::from_fn(x_prev.len(), |i| {
        (x_next[i] - x_prev[i]) / (cfg.atol + cfg.rtol * x_prev[i].abs())
    });
    let x_ok = cfg.norm.apply(&scaled) < 1.0;
    f_ok && x_ok
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveResult {
    /// The Cauchy test passed on an accepted step.
    Converged,
    /// The proposal budget ran out (also reported when a search shrank its
    /// step below the floor without ever hitting non-finite values).
    MaxItersReached,
    /// A proposed point produced a non-finite value and the search could not
    /// shrink any further.
    NonFiniteEncountered,
    /// An inner linear solve or one-dimensional root find broke down.
    LinearSolveFailed,
}

impl SolveResult {
    pub fn is_converged(self) -> bool {
        self == SolveResult::Converged
    }
}

/// Evaluation and step counters for one solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Proposals made; equals `accepted_steps + rejected_steps`.
    pub iterations: usize,
    /// Objective (or residual-map) evaluations requested by the driver: one
    /// per proposal plus one for the initial point. Finite-difference probe
    /// evaluations inside derivative computations are not included.
    pub fn_evals: usize,
    /// Gradient/Jacobian computations (analytic calls or finite-difference
    /// sweeps, one each).
    pub grad_evals: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// For root-find / fixed-point problems solved through the conversion
    /// chain: max-norm of the original map's defect at the returned point, so
    /// callers can detect convergence to a spurious local minimum.
    pub root_residual_norm: Option<f64>,
}

/// The result of a solve.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Final accepted iterate.
    pub value: Vector,
    /// Objective at `value`, in the metric of the executed problem (residual
    /// sum of squares for anything solved through the least-squares route).
    pub fval: f64,
    /// Final residual vector, when the executed problem was residual-based.
    pub residual: Option<Vector>,
    pub result: SolveResult,
    pub stats: SolveStats,
    /// Lowering chain actually executed, original kind first.
    pub lowering: Vec<ProblemKind>,
}
