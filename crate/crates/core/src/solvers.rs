//! Assembled solvers: information policies bound to a search and a descent,
//! plus the classical root-find and fixed-point steppers.
//!
//! A [`ComposedSolver`] is a pure configuration record — which information to
//! compute at each evaluated point, which search classifies proposals, which
//! descent turns scalars into steps, and when to stop. Compatibility between
//! the three parts is checked here, at construction, so an impossible
//! combination can never fail halfway through a solve.

use std::sync::Arc;

use crate::descents::{
    DampedNewtonDirect, Descent, NewtonDescent, NonlinearCg, SolveMode,
};
use crate::info::Hessian;
use crate::linalg::{LinAlgError, LstsqFactor, Matrix, Vector};
use crate::problem::{ProblemKind, TerminationConfig};
use crate::searches::{BacktrackingArmijo, ClassicalTrustRegion, LearningRate, Search};
use thiserror::Error;

/// Curvature safeguard threshold for BFGS updates: an update is skipped when
/// `yᵀs ≤ 1e-10·‖s‖‖y‖`, since such pairs would destroy positive
/// definiteness (or divide by ~zero).
const BFGS_CURVATURE_MIN: f64 = 1e-10;

/// A solver configuration that cannot run.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// The search/descent needs information the policy never produces, or
    /// the descent refuses the policy outright.
    #[error("incompatible composition: {0}")]
    Composition(String),
    /// The solver cannot handle the problem kind it was asked to run on.
    #[error("{solver} cannot solve {kind} problems")]
    Capability { solver: String, kind: ProblemKind },
    /// A parameter is out of range (non-positive tolerance, empty bracket…).
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// What gets computed at every evaluated point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoPolicy {
    /// Value and gradient only.
    GradientOnly,
    /// Value, gradient, and a BFGS approximation of the Hessian (or of its
    /// inverse), updated on every accepted step.
    GradientPlusBfgs { use_inverse: bool },
    /// Residual vector and its Jacobian; value `Σrᵢ²` and gradient `2Jᵀr`
    /// are derived for free.
    ResidualJacobian,
    /// Value, gradient, and a finite-difference Hessian of the gradient.
    GradientPlusTrueHessian,
}

impl InfoPolicy {
    /// The `FnInfo` fields this policy fills in, in the vocabulary of
    /// [`crate::info::InfoNeeds`].
    pub fn provides(&self) -> crate::info::InfoNeeds {
        crate::info::InfoNeeds {
            value: true,
            grad: true,
            quadratic: !matches!(self, InfoPolicy::GradientOnly),
        }
    }

    /// Whether the policy maintains an explicit Hessian model (as opposed to
    /// the implicit Gauss–Newton model carried by a residual Jacobian).
    pub fn produces_hessian(&self) -> bool {
        matches!(
            self,
            InfoPolicy::GradientPlusBfgs { .. } | InfoPolicy::GradientPlusTrueHessian
        )
    }
}

// ---------------------------------------------------------------------------
// BFGS updates
// ---------------------------------------------------------------------------

/// A BFGS curvature model: either `B ≈ ∇²f` or its inverse, tagged.
#[derive(Debug, Clone)]
pub struct BfgsState {
    matrix: Matrix,
    inverse: bool,
}

impl BfgsState {
    /// Fresh identity model (no curvature information yet).
    pub fn identity(dim: usize, inverse: bool) -> Self {
        BfgsState {
            matrix: Matrix::identity(dim),
            inverse,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    /// View as the tagged Hessian carried inside `FnInfo`.
    pub fn as_hessian(&self) -> Hessian {
        if self.inverse {
            Hessian::Inverse(self.matrix.clone())
        } else {
            Hessian::Direct(self.matrix.clone())
        }
    }
}

/// One BFGS update from a step `s = x_{k+1} − x_k` and gradient difference
/// `y = g_{k+1} − g_k`.
///
/// Pairs with insufficient curvature (`yᵀs ≤ 1e-10·‖s‖‖y‖`) leave the model
/// unchanged — updating on them would lose positive definiteness. Direct
/// mode applies the standard rank-two update to `B`; inverse mode applies
/// the Sherman–Morrison form to `B⁻¹`. The result is re-symmetrised to stop
/// floating-point drift accumulating over long runs.
pub fn bfgs_update(state: &BfgsState, s: &Vector, y: &Vector) -> BfgsState {
    assert_eq!(s.len(), y.len(), "bfgs_update: s and y must have equal length");
    let ys = y.dot(s);
    if ys <= BFGS_CURVATURE_MIN * s.norm2() * y.norm2() {
        return state.clone();
    }
    let n = s.len();
    let m = &state.matrix;
    let updated = if state.inverse {
        // H' = (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ, expanded so it costs one
        // matrix-vector product instead of two matrix-matrix ones.
        let rho = 1.0 / ys;
        let hy = m.matvec(y);
        let yhy = y.dot(&hy);
        let ss_coeff = rho * (1.0 + rho * yhy);
        Matrix::from_fn(n, n, |i, j| {
            m[(i, j)] - rho * (s[i] * hy[j] + hy[i] * s[j]) + ss_coeff * s[i] * s[j]
        })
    } else {
        // B' = B − (Bs)(Bs)ᵀ/(sᵀBs) + yyᵀ/(yᵀs)
        let bs = m.matvec(s);
        let sbs = s.dot(&bs);
        if sbs <= 0.0 {
            return state.clone();
        }
        Matrix::from_fn(n, n, |i, j| {
            m[(i, j)] - bs[i] * bs[j] / sbs + y[i] * y[j] / ys
        })
    };
    let symmetrised = Matrix::from_fn(n, n, |i, j| 0.5 * (updated[(i, j)] + updated[(j, i)]));
    BfgsState {
        matrix: symmetrised,
        inverse: state.inverse,
    }
}

// ---------------------------------------------------------------------------
// Composed solvers
// ---------------------------------------------------------------------------

/// An immutable solver configuration: information policy + search + descent
/// + termination. All mutable solve state lives in per-solve session objects,
/// so one `ComposedSolver` may serve any number of concurrent solves.
#[derive(Clone)]
pub struct ComposedSolver {
    policy: InfoPolicy,
    search: Arc<dyn Search>,
    descent: Arc<dyn Descent>,
    termination: TerminationConfig,
}

impl ComposedSolver {
    /// Bind a policy, search, and descent, rejecting combinations whose
    /// information diets don't line up.
    pub fn new(
        policy: InfoPolicy,
        search: impl Search + 'static,
        descent: impl Descent + 'static,
        termination: TerminationConfig,
    ) -> Result<Self, ConfigError> {
        Self::from_parts(policy, Arc::new(search), Arc::new(descent), termination)
    }

    pub fn from_parts(
        policy: InfoPolicy,
        search: Arc<dyn Search>,
        descent: Arc<dyn Descent>,
        termination: TerminationConfig,
    ) -> Result<Self, ConfigError> {
        let needs = search.needs().union(descent.needs());
        let provides = policy.provides();
        if needs.value && !provides.value {
            return Err(ConfigError::Composition(format!(
                "composition needs objective values but policy {policy:?} does not produce them"
            )));
        }
        if needs.grad && !provides.grad {
            return Err(ConfigError::Composition(format!(
                "composition needs gradients but policy {policy:?} does not produce them"
            )));
        }
        if needs.quadratic && !provides.quadratic {
            return Err(ConfigError::Composition(format!(
                "composition needs a quadratic model but policy {policy:?} is first-order only"
            )));
        }
        if descent.first_order_only() && policy.produces_hessian() {
            return Err(ConfigError::Composition(format!(
                "descent manages its own direction history and cannot be paired with \
                 Hessian-producing policy {policy:?}"
            )));
        }
        Ok(ComposedSolver {
            policy,
            search,
            descent,
            termination,
        })
    }

    pub fn policy(&self) -> InfoPolicy {
        self.policy
    }

    pub fn search(&self) -> &dyn Search {
        self.search.as_ref()
    }

    pub fn descent(&self) -> &dyn Descent {
        self.descent.as_ref()
    }

    pub fn termination(&self) -> &TerminationConfig {
        &self.termination
    }

    pub fn with_termination(mut self, termination: TerminationConfig) -> Self {
        self.termination = termination;
        self
    }
}

impl std::fmt::Debug for ComposedSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComposedSolver")
            .field("policy", &self.policy)
            .field("termination", &self.termination)
            .finish_non_exhaustive()
    }
}

fn positive_tols(rtol: f64, atol: f64) -> Result<(), ConfigError> {
    if rtol > 0.0 && atol > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!(
            "tolerances must be positive, got rtol = {rtol}, atol = {atol}"
        )))
    }
}

/// BFGS with its default pairing: backtracking Armijo line search and a
/// Newton descent over the BFGS matrix.
pub fn make_bfgs(rtol: f64, atol: f64, use_inverse: bool) -> ComposedSolver {
    make_bfgs_with(
        rtol,
        atol,
        use_inverse,
        BacktrackingArmijo::default(),
        NewtonDescent::new(),
    )
    .expect("the default BFGS composition is always valid")
}

/// BFGS information with any substituted search and descent — the
/// mix-and-match surface. Substituting a dogleg descent and a fixed learning
/// rate, for example, yields a BFGS-modelled trust-region hybrid with no new
/// solver code.
pub fn make_bfgs_with(
    rtol: f64,
    atol: f64,
    use_inverse: bool,
    search: impl Search + 'static,
    descent: impl Descent + 'static,
) -> Result<ComposedSolver, ConfigError> {
    ComposedSolver::new(
        InfoPolicy::GradientPlusBfgs { use_inverse },
        search,
        descent,
        TerminationConfig::new(rtol, atol),
    )
}

/// Gauss–Newton: residual information, full steps to the Gauss–Newton point.
pub fn make_gauss_newton(
    rtol: f64,
    atol: f64,
    mode: SolveMode,
) -> Result<ComposedSolver, ConfigError> {
    positive_tols(rtol, atol)?;
    ComposedSolver::new(
        InfoPolicy::ResidualJacobian,
        LearningRate::new(1.0),
        NewtonDescent::new().with_mode(mode),
        TerminationConfig::new(rtol, atol),
    )
}

/// Levenberg–Marquardt: residual information, reciprocally damped Newton
/// steps governed by a classical trust region.
pub fn make_levenberg_marquardt(
    rtol: f64,
    atol: f64,
    mode: SolveMode,
) -> Result<ComposedSolver, ConfigError> {
    positive_tols(rtol, atol)?;
    ComposedSolver::new(
        InfoPolicy::ResidualJacobian,
        ClassicalTrustRegion::default(),
        DampedNewtonDirect::new(mode),
        TerminationConfig::new(rtol, atol),
    )
}

/// Polak–Ribière nonlinear conjugate gradient with a backtracking Armijo
/// line search.
pub fn make_nonlinear_cg(rtol: f64, atol: f64) -> Result<ComposedSolver, ConfigError> {
    positive_tols(rtol, atol)?;
    ComposedSolver::new(
        InfoPolicy::GradientOnly,
        BacktrackingArmijo::default(),
        NonlinearCg,
        TerminationConfig::new(rtol, atol),
    )
}

// ---------------------------------------------------------------------------
// Classical steppers
// ---------------------------------------------------------------------------

/// Jacobian handling for Newton-family root steps.
#[derive(Debug, Clone)]
pub enum JacMode {
    /// Re-evaluate the Jacobian at every iterate.
    Newton,
    /// Reuse one Jacobian (typically from the initial point) for every step.
    Chord(Matrix),
}

/// One Newton (or chord) root-finding step: `x − J⁻¹ f(x)`, with `J` taken
/// at `x` or frozen per `mode`. The square system is solved through the
/// rank-revealing factorisation so a singular Jacobian is reported rather
/// than silently answered in least-squares.
pub fn newton_root_step(
    f: impl Fn(&Vector) -> Vector,
    jac: impl Fn(&Vector) -> Matrix,
    x: &Vector,
    mode: &JacMode,
) -> Result<Vector, LinAlgError> {
    let fx = f(x);
    let fresh;
    let j = match mode {
        JacMode::Newton => {
            fresh = jac(x);
            &fresh
        }
        JacMode::Chord(frozen) => frozen,
    };
    let factor = LstsqFactor::new(j)?;
    if factor.rank() < x.len() {
        return Err(LinAlgError::Singular {
            rank: factor.rank(),
            dim: x.len(),
        });
    }
    let newton = factor.solve(&fx)?;
    Ok(x - &newton)
}

/// One bisection step on a scalar sign change: evaluate the midpoint and
/// keep the half-interval that still brackets the root. An exact hit
/// collapses the interval to the root itself.
pub fn bisection_step(f: impl Fn(f64) -> f64, interval: (f64, f64)) -> ((f64, f64), f64) {
    let (lo, hi) = interval;
    let mid = 0.5 * (lo + hi);
    let f_mid = f(mid);
    if f_mid == 0.0 {
        return ((mid, mid), mid);
    }
    if f(lo) * f_mid < 0.0 {
        ((lo, mid), mid)
    } else {
        ((mid, hi), mid)
    }
}

/// One fixed-point step: simply `f(x)`.
pub fn fixed_point_step(f: impl Fn(&Vector) -> Vector, x: &Vector) -> Vector {
    f(x)
}
