//! Differentiating solutions with respect to problem parameters.
//!
//! A converged solve defines `x*(θ)` implicitly through some stationarity
//! equation `F(x*, θ) = 0` — the root map itself, `f(x) − x` for fixed
//! points, or the gradient of the objective for minimisation. When `dF/dx`
//! is nonsingular at the solution, the implicit function theorem gives
//!
//! ```text
//! dx*/dθ = −(dF/dx)⁻¹ · (dF/dθ)
//! ```
//!
//! without differentiating through the iteration loop: one linear system
//! per parameter column, sharing a single factorization. This is far
//! cheaper (and better conditioned) than finite-differencing the whole
//! solve, and [`implicit_jacobian`] implements exactly that contract.
//!
//! [`ParamProblem`] is the parameterised counterpart of
//! [`Problem`](crate::problem::Problem): bind a concrete `θ` with
//! [`ParamProblem::at`] to solve it, then hand the same description to
//! [`task_system`] to obtain the matching stationarity system.

use std::sync::Arc;

use thiserror::Error;

use crate::diff;
use crate::linalg::{max_norm, LinAlgError, LstsqFactor, Matrix, Vector};
use crate::problem::{Problem, ProblemKind};

type ParamScalarFn = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;
type ParamVectorFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
type ParamMatrixFn = Arc<dyn Fn(&Vector, &Vector) -> Matrix + Send + Sync>;

/// Failure modes of implicit differentiation.
#[derive(Debug, Error)]
pub enum SensitivityError {
    /// `dF/dx` is rank-deficient at the evaluation point, so the implicit
    /// function theorem's nonsingularity assumption fails and no (unique)
    /// sensitivity exists.
    #[error("dF/dx is singular (rank {rank} of {dim}); the implicit-function assumptions fail here")]
    SingularSystem { rank: usize, dim: usize },
    /// The underlying linear algebra failed for another reason.
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// A stationarity system `F(x, θ) = 0` with its two partial Jacobians.
///
/// Derivative callables are optional: missing ones are filled by central
/// finite differences of `F`. The caller is responsible for evaluating at a
/// genuine solution — `F(x*, θ) ≈ 0` with `dF/dx` nonsingular; use
/// [`ImplicitSystem::defect`] to check the first condition cheaply.
pub struct ImplicitSystem {
    f: ParamVectorFn,
    dfdx: Option<ParamMatrixFn>,
    dfdtheta: Option<ParamMatrixFn>,
}

impl ImplicitSystem {
    pub fn new(f: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static) -> Self {
        ImplicitSystem {
            f: Arc::new(f),
            dfdx: None,
            dfdtheta: None,
        }
    }

    /// Supply an analytic `dF/dx` (an `N×N` matrix function).
    pub fn with_dfdx(
        mut self,
        dfdx: impl Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.dfdx = Some(Arc::new(dfdx));
        self
    }

    /// Supply an analytic `dF/dθ` (an `N×M` matrix function).
    pub fn with_dfdtheta(
        mut self,
        dfdtheta: impl Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.dfdtheta = Some(Arc::new(dfdtheta));
        self
    }

    /// Evaluate `F(x, θ)`.
    pub fn f(&self, x: &Vector, theta: &Vector) -> Vector {
        (self.f)(x, theta)
    }

    /// `‖F(x, θ)‖_∞` — how far `x` is from satisfying the system at `θ`.
    pub fn defect(&self, x: &Vector, theta: &Vector) -> f64 {
        max_norm(&self.f(x, theta))
    }

    /// `dF/dx` at `(x, θ)`, analytic or finite-difference.
    pub fn dfdx(&self, x: &Vector, theta: &Vector) -> Matrix {
        match &self.dfdx {
            Some(d) => d(x, theta),
            None => {
                let f = self.f.clone();
                diff::jacobian(|p| f(p, theta), x)
            }
        }
    }

    /// `dF/dθ` at `(x, θ)`, analytic or finite-difference.
    pub fn dfdtheta(&self, x: &Vector, theta: &Vector) -> Matrix {
        match &self.dfdtheta {
            Some(d) => d(x, theta),
            None => {
                let f = self.f.clone();
                diff::jacobian(|t| f(x, t), theta)
            }
        }
    }
}

impl std::fmt::Debug for ImplicitSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImplicitSystem")
            .field("dfdx", &self.dfdx.as_ref().map(|_| "analytic"))
            .field("dfdtheta", &self.dfdtheta.as_ref().map(|_| "analytic"))
            .finish()
    }
}

/// Work performed by one [`implicit_jacobian_instrumented`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensitivityStats {
    /// Matrix factorizations of `dF/dx` — always exactly one.
    pub factorizations: usize,
    /// Triangular solves — one per parameter column.
    pub solves: usize,
}

/// The solution sensitivity `dx*/dθ = −(dF/dx)⁻¹ (dF/dθ)` at `(x_star, theta)`.
///
/// `dF/dx` is factorized once and back-substituted against each of the `M`
/// columns of `dF/dθ`. A rank-deficient `dF/dx` is an error: a solution
/// manifold with no unique sensitivity is reported, never silently
/// projected through a pseudo-inverse.
pub fn implicit_jacobian(
    sys: &ImplicitSystem,
    x_star: &Vector,
    theta: &Vector,
) -> Result<Matrix, SensitivityError> {
    implicit_jacobian_instrumented(sys, x_star, theta).map(|(m, _)| m)
}

/// [`implicit_jacobian`] returning its work counters alongside the result.
pub fn implicit_jacobian_instrumented(
    sys: &ImplicitSystem,
    x_star: &Vector,
    theta: &Vector,
) -> Result<(Matrix, SensitivityStats), SensitivityError> {
    let n = x_star.len();
    let a = sys.dfdx(x_star, theta);
    assert_eq!(
        (a.nrows(), a.ncols()),
        (n, n),
        "dF/dx must be square with the state dimension"
    );
    let b = sys.dfdtheta(x_star, theta);
    assert_eq!(b.nrows(), n, "dF/dθ must have one row per state entry");
    let m = b.ncols();

    let factor = LstsqFactor::new(&a)?;
    let mut stats = SensitivityStats {
        factorizations: 1,
        solves: 0,
    };
    if factor.rank() < n {
        return Err(SensitivityError::SingularSystem {
            rank: factor.rank(),
            dim: n,
        });
    }
    let mut columns = Vec::with_capacity(m);
    for j in 0..m {
        let rhs = Vector::from_fn(n, |i| -b[(i, j)]);
        columns.push(factor.solve(&rhs)?);
        stats.solves += 1;
    }
    let jac = Matrix::from_fn(n, m, |i, j| columns[j][i]);
    Ok((jac, stats))
}

/// Which curvature model a least-squares stationarity system uses for
/// `dF/dx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureModel {
    /// `2JᵀJ`, dropping second-order residual terms — the same model the
    /// least-squares solvers themselves use. Exact when residuals vanish at
    /// the solution.
    #[default]
    GaussNewton,
    /// A full finite-difference Jacobian of `F = 2Jᵀr`, retaining residual
    /// curvature. Costlier, but exact for nonzero-residual fits.
    FullFiniteDifference,
}

/// A problem family indexed by a parameter vector `θ`.
///
/// [`ParamProblem::at`] binds a concrete `θ` into an ordinary solvable
/// [`Problem`]; [`task_system`] derives the stationarity system whose root
/// is that problem's solution.
#[derive(Clone)]
pub struct ParamProblem {
    kind: ProblemKind,
    dim_in: usize,
    fns: ParamFns,
}

#[derive(Clone)]
enum ParamFns {
    Scalar {
        f: ParamScalarFn,
        grad: Option<ParamVectorFn>,
    },
    Vector {
        f: ParamVectorFn,
        jac: Option<ParamMatrixFn>,
    },
}

impl ParamProblem {
    pub fn minimise(
        dim_in: usize,
        f: impl Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ParamProblem {
            kind: ProblemKind::Minimise,
            dim_in,
            fns: ParamFns::Scalar {
                f: Arc::new(f),
                grad: None,
            },
        }
    }

    pub fn least_squares(
        dim_in: usize,
        r: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        ParamProblem {
            kind: ProblemKind::LeastSquares,
            dim_in,
            fns: ParamFns::Vector {
                f: Arc::new(r),
                jac: None,
            },
        }
    }

    pub fn root_find(
        dim_in: usize,
        f: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        ParamProblem {
            kind: ProblemKind::RootFind,
            dim_in,
            fns: ParamFns::Vector {
                f: Arc::new(f),
                jac: None,
            },
        }
    }

    pub fn fixed_point(
        dim_in: usize,
        f: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        ParamProblem {
            kind: ProblemKind::FixedPoint,
            dim_in,
            fns: ParamFns::Vector {
                f: Arc::new(f),
                jac: None,
            },
        }
    }

    /// Attach an analytic `θ`-parameterised gradient (scalar problems).
    pub fn with_gradient(
        mut self,
        grad: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        match &mut self.fns {
            ParamFns::Scalar { grad: g, .. } => *g = Some(Arc::new(grad)),
            ParamFns::Vector { .. } => {
                panic!("with_gradient: this problem takes a Jacobian, not a gradient")
            }
        }
        self
    }

    /// Attach an analytic `θ`-parameterised Jacobian in `x` (vector problems).
    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        match &mut self.fns {
            ParamFns::Vector { jac: j, .. } => *j = Some(Arc::new(jac)),
            ParamFns::Scalar { .. } => {
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

    /// Bind a concrete parameter vector, yielding a solvable [`Problem`].
    pub fn at(&self, theta: &Vector) -> Problem {
        let theta = theta.clone();
        match (&self.fns, self.kind) {
            (ParamFns::Scalar { f, grad }, _) => {
                let f2 = f.clone();
                let t2 = theta.clone();
                let mut problem = Problem::minimise(self.dim_in, move |x| f2(x, &t2));
                if let Some(g) = grad {
                    let g2 = g.clone();
                    problem = problem.with_gradient(move |x| g2(x, &theta));
                }
                problem
            }
            (ParamFns::Vector { f, jac }, kind) => {
                let f2 = f.clone();
                let t2 = theta.clone();
                let wrapped = move |x: &Vector| f2(x, &t2);
                let mut problem = match kind {
                    ProblemKind::LeastSquares => Problem::least_squares(self.dim_in, wrapped),
                    ProblemKind::RootFind => Problem::root_find(self.dim_in, wrapped),
                    ProblemKind::FixedPoint => Problem::fixed_point(self.dim_in, wrapped),
                    ProblemKind::Minimise => unreachable!("scalar problems hold scalar callables"),
                };
                if let Some(j) = jac {
                    let j2 = j.clone();
                    problem = problem.with_jacobian(move |x| j2(x, &theta));
                }
                problem
            }
        }
    }

    /// The gradient map `∇ₓf(x, θ)`, analytic or finite-difference
    /// (scalar problems only).
    fn gradient_map(&self) -> ParamVectorFn {
        match &self.fns {
            ParamFns::Scalar { f, grad } => match grad {
                Some(g) => g.clone(),
                None => {
                    let f = f.clone();
                    Arc::new(move |x: &Vector, theta: &Vector| {
                        diff::gradient(|p| f(p, theta), x)
                    })
                }
            },
            ParamFns::Vector { .. } => unreachable!("gradient_map is for scalar problems"),
        }
    }

    /// The Jacobian map `∂f/∂x`, analytic or finite-difference (vector
    /// problems only).
    fn jacobian_map(&self) -> ParamMatrixFn {
        match &self.fns {
            ParamFns::Vector { f, jac } => match jac {
                Some(j) => j.clone(),
                None => {
                    let f = f.clone();
                    Arc::new(move |x: &Vector, theta: &Vector| {
                        diff::jacobian(|p| f(p, theta), x)
                    })
                }
            },
            ParamFns::Scalar { .. } => unreachable!("jacobian_map is for vector problems"),
        }
    }
}

impl std::fmt::Debug for ParamProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParamProblem")
            .field("kind", &self.kind)
            .field("dim_in", &self.dim_in)
            .finish()
    }
}

/// The stationarity system whose root characterises the problem's solution:
///
/// * root find — `F = f` directly;
/// * fixed point — `F = f − x`, so `dF/dx = ∂f/∂x − I`;
/// * minimisation — `F = ∇f`, so `dF/dx` is the Hessian;
/// * least squares — `F = 2Jᵀr` with `dF/dx` per the chosen
///   [`CurvatureModel`].
///
/// Derivatives missing from the problem description are filled by central
/// finite differences.
pub fn task_system(problem: &ParamProblem, model: CurvatureModel) -> ImplicitSystem {
    match problem.kind {
        ProblemKind::RootFind => {
            let f = match &problem.fns {
                ParamFns::Vector { f, .. } => f.clone(),
                ParamFns::Scalar { .. } => unreachable!(),
            };
            let jac = problem.jacobian_map();
            let f2 = f.clone();
            ImplicitSystem::new(move |x: &Vector, theta: &Vector| f2(x, theta))
                .with_dfdx(move |x: &Vector, theta: &Vector| jac(x, theta))
        }
        ProblemKind::FixedPoint => {
            let f = match &problem.fns {
                ParamFns::Vector { f, .. } => f.clone(),
                ParamFns::Scalar { .. } => unreachable!(),
            };
            let jac = problem.jacobian_map();
            let f2 = f.clone();
            ImplicitSystem::new(move |x: &Vector, theta: &Vector| &f2(x, theta) - x)
                .with_dfdx(move |x: &Vector, theta: &Vector| {
                    jac(x, theta).add_scaled_identity(-1.0)
                })
        }
        ProblemKind::Minimise => {
            let grad = problem.gradient_map();
            let g2 = grad.clone();
            ImplicitSystem::new(move |x: &Vector, theta: &Vector| grad(x, theta)).with_dfdx(
                move |x: &Vector, theta: &Vector| {
                    let g3 = g2.clone();
                    diff::hessian_of_grad(move |p| g3(p, theta), x)
                },
            )
        }
        ProblemKind::LeastSquares => {
            let r = match &problem.fns {
                ParamFns::Vector { f, .. } => f.clone(),
                ParamFns::Scalar { .. } => unreachable!(),
            };
            let jac = problem.jacobian_map();
            let (r2, jac2) = (r.clone(), jac.clone());
            let stationarity = move |x: &Vector, theta: &Vector| {
                jac2(x, theta).t_matvec(&r2(x, theta)).scale(2.0)
            };
            let system = ImplicitSystem::new(stationarity.clone());
            match model {
                CurvatureModel::GaussNewton => system.with_dfdx(move |x: &Vector, theta: &Vector| {
                    jac(x, theta).ata().scale(2.0)
                }),
                CurvatureModel::FullFiniteDifference => {
                    system.with_dfdx(move |x: &Vector, theta: &Vector| {
                        let s = stationarity.clone();
                        diff::hessian_of_grad(move |p| s(p, theta), x)
                    })
                }
            }
        }
    }
}
