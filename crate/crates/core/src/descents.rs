//! Descents: the vector half of the search/descent decomposition.
//!
//! A descent turns the search's scalar `alpha` into a concrete update
//! vector. Line-search descents interpret `alpha` as a step length along a
//! fixed direction; restricted descents interpret it as a trust radius and
//! choose both direction and length.
//!
//! Descents are stateful per solve because the expensive work — Newton
//! solves, Cauchy/Newton points, conjugate direction history — depends only
//! on the accepted iterate, not on `alpha`. The driver announces each
//! accepted iterate through [`DescentState::at_iterate`]; all per-`alpha`
//! proposals after that reuse the cached products, so a backtracking search
//! that rejects ten step sizes pays for one factorisation, not ten.

use crate::info::{FnInfo, InfoNeeds};
use crate::linalg::{solve_cholesky, solve_lstsq, LinAlgError, Matrix, Vector};
use crate::problem::Norm;
use thiserror::Error;

/// Maximum iterations for the scalar root-finds hidden inside restricted
/// descents (damping bisection, dogleg boundary crossing).
const MAX_ROOT_ITERS: usize = 100;

/// Relative tolerance on `‖step‖ = radius` for those root-finds.
const ROOT_REL_TOL: f64 = 1e-3;

/// Failure to produce an update vector.
#[derive(Debug, Error)]
pub enum StepError {
    #[error("linear solve failed: {0}")]
    LinAlg(#[from] LinAlgError),
    /// The scalar root-find for the damping parameter did not bracket a
    /// solution within its iteration budget.
    #[error("damping root-find stalled after {iterations} iterations")]
    RootFindStalled { iterations: usize },
}

/// A descent configuration; `start` opens a per-solve session holding all
/// mutable cache state.
pub trait Descent: Send + Sync {
    /// Fields the descent reads from the accepted-point `FnInfo`.
    fn needs(&self) -> InfoNeeds;

    /// True for descents that maintain their own direction recurrence and
    /// therefore must not be paired with Hessian-producing information
    /// policies (the quadratic model would silently disagree with the
    /// direction history).
    fn first_order_only(&self) -> bool {
        false
    }

    fn start(&self) -> Box<dyn DescentState>;
}

/// Per-solve descent state.
pub trait DescentState {
    /// Install a newly accepted iterate. Called once with the initial point
    /// and once per accepted step, in order; expensive `alpha`-independent
    /// work happens (and is cached) here.
    fn at_iterate(&mut self, info: &FnInfo) -> Result<(), StepError>;

    /// Propose the update vector for scalar `alpha` from the current
    /// accepted iterate.
    fn step(&mut self, alpha: f64) -> Result<Vector, StepError>;
}

// ---------------------------------------------------------------------------
// Steepest descent
// ---------------------------------------------------------------------------

/// The steepest-descent update `−alpha · ∇f(x)`.
pub fn steepest_step(alpha: f64, grad: &Vector) -> Vector {
    grad * -alpha
}

/// Step along the negative gradient.
#[derive(Debug, Clone, Copy, Default)]
pub struct Steepest;

impl Descent for Steepest {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds {
            grad: true,
            ..InfoNeeds::default()
        }
    }

    fn start(&self) -> Box<dyn DescentState> {
        Box::new(SteepestState { grad: None })
    }
}

struct SteepestState {
    grad: Option<Vector>,
}

impl DescentState for SteepestState {
    fn at_iterate(&mut self, info: &FnInfo) -> Result<(), StepError> {
        self.grad = Some(info.gradient().clone());
        Ok(())
    }

    fn step(&mut self, alpha: f64) -> Result<Vector, StepError> {
        Ok(steepest_step(alpha, self.grad.as_ref().expect("no iterate installed")))
    }
}

// ---------------------------------------------------------------------------
// Newton descent
// ---------------------------------------------------------------------------

/// Step a fraction `alpha` of the way to the (quasi-)Newton point: the exact
/// minimiser of the local quadratic model, or the Gauss–Newton point for
/// residual-based information. The Newton point is computed once per iterate
/// and scaled per proposal.
#[derive(Debug, Clone, Copy)]
pub struct NewtonDescent {
    mode: SolveMode,
}

impl NewtonDescent {
    pub fn new() -> Self {
        NewtonDescent {
            mode: SolveMode::AugmentedLstsq,
        }
    }

    /// Choose how the Gauss–Newton point is computed from residual
    /// information (no effect on Hessian-based information, which always
    /// solves by Cholesky).
    pub fn with_mode(mut self, mode: SolveMode) -> Self {
        self.mode = mode;
        self
    }
}

impl Default for NewtonDescent {
    fn default() -> Self {
        NewtonDescent::new()
    }
}

impl Descent for NewtonDescent {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds {
            grad: true,
            quadratic: true,
            ..InfoNeeds::default()
        }
    }

    fn start(&self) -> Box<dyn DescentState> {
        Box::new(NewtonState {
            mode: self.mode,
            point: None,
        })
    }
}

struct NewtonState {
    mode: SolveMode,
    point: Option<Vector>,
}

impl DescentState for NewtonState {
    fn at_iterate(&mut self, info: &FnInfo) -> Result<(), StepError> {
        let point = match (&info.residual, &info.jacobian, self.mode) {
            (Some(r), Some(j), SolveMode::NormalEquations) => {
                solve_cholesky(&j.ata(), &j.atb(r).scale(-1.0))?
            }
            _ => info.newton_point()?,
        };
        self.point = Some(point);
        Ok(())
    }

    fn step(&mut self, alpha: f64) -> Result<Vector, StepError> {
        Ok(self.point.as_ref().expect("no iterate installed") * alpha)
    }
}

// ---------------------------------------------------------------------------
// Damped Newton (direct)
// ---------------------------------------------------------------------------

/// How the damped linear system is solved for residual-based information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Form `JᵀJ` and Cholesky-solve `(JᵀJ + λI) p = −Jᵀr`. Cheapest, but
    /// squares the condition number of `J`.
    NormalEquations,
    /// QR-solve the stacked least-squares system `[J; √λ·I] p ≈ [−r; 0]`,
    /// which is algebraically the same equation without ever forming `JᵀJ`.
    AugmentedLstsq,
}

/// The `alpha`-independent part of a damped Newton system, built once per
/// iterate.
enum DampedSystem {
    /// Residual information: `JᵀJ`, `−Jᵀr`, plus the raw `J` and `r` for the
    /// stacked formulation.
    ResJac {
        jtj: Matrix,
        neg_jtr: Vector,
        jac: Matrix,
        residual: Vector,
    },
    /// Hessian information: `B` and `−g`. Both solve modes reduce to a
    /// Cholesky solve of `(B + λI) p = −g` here; the stacked form is specific
    /// to residual Jacobians.
    Hess { b: Matrix, neg_g: Vector },
}

impl DampedSystem {
    fn from_info(info: &FnInfo) -> Result<Self, StepError> {
        match (&info.residual, &info.jacobian) {
            (Some(r), Some(j)) => Ok(DampedSystem::ResJac {
                jtj: j.ata(),
                neg_jtr: j.atb(r).scale(-1.0),
                jac: j.clone(),
                residual: r.clone(),
            }),
            _ => {
                let b = info.hessian_matrix()?;
                Ok(DampedSystem::Hess {
                    b,
                    neg_g: -info.gradient(),
                })
            }
        }
    }

    /// Solve `(A + λI) p = rhs` for this system's `(A, rhs)` by Cholesky.
    fn solve_damped(&self, lambda: f64) -> Result<Vector, LinAlgError> {
        let (a, rhs) = match self {
            DampedSystem::ResJac { jtj, neg_jtr, .. } => (jtj, neg_jtr),
            DampedSystem::Hess { b, neg_g } => (b, neg_g),
        };
        let damped = a.add_scaled_identity(lambda);
        solve_cholesky(&damped, rhs)
    }

    /// Solve the same damped equation through the stacked least-squares
    /// formulation (residual systems only; Hessian systems fall back to
    /// Cholesky, where the distinction has no analogue).
    fn solve_stacked(&self, lambda: f64) -> Result<Vector, LinAlgError> {
        match self {
            DampedSystem::ResJac { jac, residual, .. } => {
                let (m, n) = (jac.nrows(), jac.ncols());
                let sqrt_l = lambda.sqrt();
                let stacked = Matrix::from_fn(m + n, n, |i, j| {
                    if i < m {
                        jac[(i, j)]
                    } else if i - m == j {
                        sqrt_l
                    } else {
                        0.0
                    }
                });
                let rhs = Vector::from_fn(m + n, |i| if i < m { -residual[i] } else { 0.0 });
                solve_lstsq(&stacked, &rhs)
            }
            DampedSystem::Hess { .. } => self.solve_damped(lambda),
        }
    }

    fn rhs_is_zero(&self) -> bool {
        let rhs = match self {
            DampedSystem::ResJac { neg_jtr, .. } => neg_jtr,
            DampedSystem::Hess { neg_g, .. } => neg_g,
        };
        rhs.iter().all(|v| *v == 0.0)
    }

    fn dim(&self) -> usize {
        match self {
            DampedSystem::ResJac { jtj, .. } => jtj.ncols(),
            DampedSystem::Hess { b, .. } => b.ncols(),
        }
    }
}

/// Levenberg–Marquardt style damping with the damping strength tied directly
/// to the search scalar: `λ = 1/alpha`, so a shrinking trust radius means a
/// more conservative, more gradient-like step.
#[derive(Debug, Clone, Copy)]
pub struct DampedNewtonDirect {
    mode: SolveMode,
}

impl DampedNewtonDirect {
    pub fn new(mode: SolveMode) -> Self {
        DampedNewtonDirect { mode }
    }
}

impl Default for DampedNewtonDirect {
    fn default() -> Self {
        DampedNewtonDirect::new(SolveMode::NormalEquations)
    }
}

impl Descent for DampedNewtonDirect {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds {
            grad: true,
            quadratic: true,
            ..InfoNeeds::default()
        }
    }

    fn start(&self) -> Box<dyn DescentState> {
        Box::new(DampedDirectState {
            mode: self.mode,
            system: None,
        })
    }
}

struct DampedDirectState {
    mode: SolveMode,
    system: Option<DampedSystem>,
}

impl DescentState for DampedDirectState {
    fn at_iterate(&mut self, info: &FnInfo) -> Result<(), StepError> {
        self.system = Some(DampedSystem::from_info(info)?);
        Ok(())
    }

    fn step(&mut self, alpha: f64) -> Result<Vector, StepError> {
        let system = self.system.as_ref().expect("no iterate installed");
        let lambda = 1.0 / alpha;
        let p = match self.mode {
            SolveMode::NormalEquations => system.solve_damped(lambda)?,
            SolveMode::AugmentedLstsq => system.solve_stacked(lambda)?,
        };
        Ok(p)
    }
}

// ---------------------------------------------------------------------------
// Damped Newton (indirect)
// ---------------------------------------------------------------------------

/// Trust-region subproblem solved indirectly: `alpha` is the radius `Δ`, and
/// the damping `λ ≥ 0` is found so that `‖p(λ)‖₂ = Δ` (taking the undamped
/// Newton point whenever it already lies inside the region).
///
/// The root-find is a safeguarded bisection: a Cholesky failure along the way
/// means `A + λI` is not yet positive definite, i.e. `λ` is still too small,
/// and tightens the lower bracket.
#[derive(Debug, Clone)]
pub struct DampedNewtonIndirect {
    norm: Norm,
}

impl DampedNewtonIndirect {
    pub fn new() -> Self {
        DampedNewtonIndirect {
            norm: Norm::Euclidean,
        }
    }

    /// Measure step lengths with a different norm.
    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }
}

impl Default for DampedNewtonIndirect {
    fn default() -> Self {
        DampedNewtonIndirect::new()
    }
}

impl Descent for DampedNewtonIndirect {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds {
            grad: true,
            quadratic: true,
            ..InfoNeeds::default()
        }
    }

    fn start(&self) -> Box<dyn DescentState> {
        Box::new(DampedIndirectState {
            norm: self.norm.clone(),
            system: None,
            newton: None,
        })
    }
}

struct DampedIndirectState {
    norm: Norm,
    system: Option<DampedSystem>,
    /// Undamped Newton point, when `A` itself is positive definite.
    newton: Option<Vector>,
}

impl DescentState for DampedIndirectState {
    fn at_iterate(&mut self, info: &FnInfo) -> Result<(), StepError> {
        let system = DampedSystem::from_info(info)?;
        self.newton = system.solve_damped(0.0).ok();
        self.system = Some(system);
        Ok(())
    }

    fn step(&mut self, delta: f64) -> Result<Vector, StepError> {
        let system = self.system.as_ref().expect("no iterate installed");

        // A zero right-hand side makes every damped solution zero; the
        // stationary point is the step.
        if system.rhs_is_zero() {
            return Ok(Vector::zeros(system.dim()));
        }
        if let Some(p) = &self.newton {
            if self.norm.apply(p) <= delta {
                return Ok(p.clone());
            }
        }

        let tol = ROOT_REL_TOL * delta;
        let mut iters = 0usize;

        // Bracket: ‖p(λ)‖ decreases in λ, so double λ until the step fits
        // inside the region. λ = 0 (Newton point outside or solve failed) is
        // a valid lower bound.
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        loop {
            iters += 1;
            if iters > MAX_ROOT_ITERS {
                return Err(StepError::RootFindStalled { iterations: iters - 1 });
            }
            match system.solve_damped(hi) {
                Ok(p) => {
                    let n = self.norm.apply(&p);
                    if (n - delta).abs() <= tol {
                        return Ok(p);
                    }
                    if n <= delta {
                        break;
                    }
                    lo = hi;
                }
                // Not positive definite yet: λ too small.
                Err(_) => lo = hi,
            }
            hi *= 2.0;
        }

        // Bisect [lo, hi] on ‖p(λ)‖ − Δ.
        loop {
            iters += 1;
            if iters > MAX_ROOT_ITERS {
                return Err(StepError::RootFindStalled { iterations: iters - 1 });
            }
            let mid = 0.5 * (lo + hi);
            match system.solve_damped(mid) {
                Ok(p) => {
                    let n = self.norm.apply(&p);
                    if (n - delta).abs() <= tol {
                        return Ok(p);
                    }
                    if n > delta {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Err(_) => lo = mid,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dogleg
// ---------------------------------------------------------------------------

/// Dogleg restricted descent: follow the steepest-descent leg to the Cauchy
/// point, then the leg towards the Newton point, stopping where the path
/// crosses the trust boundary.
///
/// Both anchor points are computed once per iterate. Under the Euclidean norm
/// the boundary crossing has a closed form; under any other norm it is found
/// by bisection along the second leg. When the model has non-positive
/// curvature along the gradient there is no Cauchy point and the step falls
/// back to the gradient ray scaled to the boundary; when only the Newton
/// point is unavailable the step stops at the Cauchy point.
#[derive(Debug, Clone)]
pub struct Dogleg {
    norm: Norm,
}

impl Dogleg {
    pub fn new() -> Self {
        Dogleg {
            norm: Norm::Euclidean,
        }
    }

    /// Measure steps with a different norm (boundary crossings switch from
    /// the closed form to bisection).
    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }
}

impl Default for Dogleg {
    fn default() -> Self {
        Dogleg::new()
    }
}

impl Descent for Dogleg {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds {
            grad: true,
            quadratic: true,
            ..InfoNeeds::default()
        }
    }

    fn start(&self) -> Box<dyn DescentState> {
        Box::new(DoglegState {
            norm: self.norm.clone(),
            cache: DoglegCache::Empty,
        })
    }
}

enum DoglegCache {
    Empty,
    /// Stationary point: the only sensible step is no step.
    ZeroGrad { dim: usize },
    /// No usable curvature along the gradient: step along `−g` to the
    /// boundary.
    GradientRay { grad: Vector },
    /// Cauchy point only (Newton point unavailable).
    CauchyOnly { p_u: Vector },
    Full { p_u: Vector, p_b: Vector },
}

struct DoglegState {
    norm: Norm,
    cache: DoglegCache,
}

impl DescentState for DoglegState {
    fn at_iterate(&mut self, info: &FnInfo) -> Result<(), StepError> {
        let g = info.gradient();
        if g.iter().all(|v| *v == 0.0) {
            self.cache = DoglegCache::ZeroGrad { dim: g.len() };
            return Ok(());
        }
        let curvature = match info.hess_vec(g) {
            Ok(hg) => g.dot(&hg),
            // An indefinite Hessian approximation is handled the same way as
            // explicit negative curvature: gradient-ray fallback.
            Err(_) => f64::NEG_INFINITY,
        };
        if !(curvature > 0.0) || !curvature.is_finite() {
            self.cache = DoglegCache::GradientRay { grad: g.clone() };
            return Ok(());
        }
        let p_u = g * -(g.dot(g) / curvature);
        self.cache = match info.newton_point() {
            Ok(p_b) => DoglegCache::Full { p_u, p_b },
            Err(_) => DoglegCache::CauchyOnly { p_u },
        };
        Ok(())
    }

    fn step(&mut self, delta: f64) -> Result<Vector, StepError> {
        let norm = &self.norm;
        let step = match &self.cache {
            DoglegCache::Empty => panic!("no iterate installed"),
            DoglegCache::ZeroGrad { dim } => Vector::zeros(*dim),
            DoglegCache::GradientRay { grad } => grad * -(delta / norm.apply(grad)),
            DoglegCache::CauchyOnly { p_u } => clip_to_radius(p_u, delta, norm),
            DoglegCache::Full { p_u, p_b } => {
                if norm.apply(p_b) <= delta {
                    p_b.clone()
                } else if norm.apply(p_u) >= delta {
                    clip_to_radius(p_u, delta, norm)
                } else {
                    let d = p_b - p_u;
                    if norm.is_euclidean() {
                        leg_crossing_euclidean(p_u, &d, delta)
                    } else {
                        leg_crossing_bisect(p_u, &d, delta, norm)
                    }
                }
            }
        };
        Ok(step)
    }
}

fn clip_to_radius(p: &Vector, delta: f64, norm: &Norm) -> Vector {
    let n = norm.apply(p);
    if n <= delta {
        p.clone()
    } else {
        p * (delta / n)
    }
}

/// Closed-form crossing of `‖p_u + s·d‖₂ = Δ` for `s ∈ [0, 1]`, given
/// `‖p_u‖ < Δ` (the positive quadratic root).
fn leg_crossing_euclidean(p_u: &Vector, d: &Vector, delta: f64) -> Vector {
    let a = d.dot(d);
    if a <= 0.0 {
        return p_u.clone();
    }
    let b = 2.0 * p_u.dot(d);
    let c = p_u.dot(p_u) - delta * delta;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let s = ((-b + disc.sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
    p_u.axpy(s, d)
}

/// Bisection fallback for non-Euclidean norms: the bracket
/// `norm(p_u) < Δ ≤ norm(p_b)` is guaranteed by the caller.
fn leg_crossing_bisect(p_u: &Vector, d: &Vector, delta: f64, norm: &Norm) -> Vector {
    let tol = ROOT_REL_TOL * delta;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut p = p_u.clone();
    for _ in 0..MAX_ROOT_ITERS {
        let mid = 0.5 * (lo + hi);
        p = p_u.axpy(mid, d);
        let n = norm.apply(&p);
        if (n - delta).abs() <= tol {
            break;
        }
        if n > delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    p
}

// ---------------------------------------------------------------------------
// Nonlinear conjugate gradient
// ---------------------------------------------------------------------------

/// Polak–Ribière(+) nonlinear conjugate-gradient directions.
///
/// At each accepted iterate the new direction is
/// `d = −g + β·d_prev` with `β = max(0, gᵀ(g − g_prev) / g_prevᵀg_prev)`,
/// restarting at plain steepest descent whenever the result fails to be a
/// descent direction (`gᵀd ≥ 0`). The step is `alpha · d`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NonlinearCg;

impl Descent for NonlinearCg {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds {
            grad: true,
            ..InfoNeeds::default()
        }
    }

    fn first_order_only(&self) -> bool {
        true
    }

    fn start(&self) -> Box<dyn DescentState> {
        Box::new(NonlinearCgState { history: None })
    }
}

struct NonlinearCgState {
    /// `(gradient, direction)` at the current accepted iterate.
    history: Option<(Vector, Vector)>,
}

impl DescentState for NonlinearCgState {
    fn at_iterate(&mut self, info: &FnInfo) -> Result<(), StepError> {
        let g = info.gradient().clone();
        let d = match &self.history {
            None => -&g,
            Some((g_prev, d_prev)) => {
                let denom = g_prev.dot(g_prev);
                let beta = if denom > 0.0 {
                    (g.dot(&g) - g.dot(g_prev)) / denom
                } else {
                    0.0
                };
                let beta = beta.max(0.0);
                let d = (-&g).axpy(beta, d_prev);
                if g.dot(&d) >= 0.0 {
                    -&g
                } else {
                    d
                }
            }
        };
        self.history = Some((g, d));
        Ok(())
    }

    fn step(&mut self, alpha: f64) -> Result<Vector, StepError> {
        let (_, d) = self.history.as_ref().expect("no iterate installed");
        Ok(d * alpha)
    }
}
