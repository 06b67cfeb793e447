//! A modular nonlinear-optimisation toolkit.
//!
//! The central idea is that most iterative solvers factor into two small,
//! independently swappable pieces:
//!
//! * a **search** ([`searches`]) picks a scalar `alpha` and judges each
//!   proposed step accepted or rejected — line searches, learning rates and
//!   trust regions all fit this shape;
//! * a **descent** ([`descents`]) turns `alpha` into a concrete step vector
//!   from whatever derivative information is available — steepest descent,
//!   (damped) Newton directions, dogleg paths, conjugate-gradient updates.
//!
//! A [`solvers::ComposedSolver`] pairs one of each with an information
//! policy describing which derivatives to evaluate, and the driver in
//! [`driver`] runs the resulting method with a flat step-rejection loop:
//! rejected proposals simply retry from the last accepted iterate, so the
//! bookkeeping `fn_evals = accepted + rejected + 1` holds exactly.
//!
//! Familiar algorithms are one-line compositions: BFGS is a backtracking
//! line search plus a Newton descent on a running secant model
//! ([`solvers::make_bfgs`]), Levenberg–Marquardt is a classical trust region
//! plus a damped Gauss–Newton solve
//! ([`solvers::make_levenberg_marquardt`]), and swapping parts yields
//! hybrids without any new solver code.

pub mod api;
pub mod descents;
pub mod diff;
pub mod driver;
pub mod info;
pub mod linalg;
pub mod problem;
pub mod searches;
pub mod sensitivity;
pub mod solvers;

pub use api::{
    fixed_point, fixed_point_with_jacobian, least_squares, least_squares_with_jacobian, minimise,
    minimise_with_gradient, root_find, root_find_with_jacobian, solve, IntoResiduals, Solver,
    SolverCapability,
};

pub use descents::{
    DampedNewtonDirect, DampedNewtonIndirect, Descent, DescentState, Dogleg, NewtonDescent,
    NonlinearCg, SolveMode, Steepest, StepError,
};
pub use info::{FnInfo, Hessian, InfoNeeds};
pub use linalg::{LinAlgError, Matrix, Vector};
pub use problem::{
    Norm, Problem, ProblemKind, Solution, SolveResult, SolveStats, TerminationConfig,
};
pub use searches::{
    BacktrackingArmijo, ClassicalTrustRegion, LearningRate, LinearTrustRegion, Search,
    SearchResult, SearchState,
};
pub use sensitivity::{
    implicit_jacobian, implicit_jacobian_instrumented, task_system, CurvatureModel,
    ImplicitSystem, ParamProblem, SensitivityError, SensitivityStats,
};
pub use solvers::{
    make_bfgs, make_bfgs_with, make_gauss_newton, make_levenberg_marquardt, make_nonlinear_cg,
    ComposedSolver, ConfigError, InfoPolicy, JacMode,
};
