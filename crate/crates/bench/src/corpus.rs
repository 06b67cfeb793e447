//! The builtin problem corpus: classic small- to medium-dimensional test
//! problems with canonical starting points and, where known, the optimal
//! objective value and an optimal point.
//!
//! Every problem carries analytic derivatives so instrumented runs count
//! exactly the evaluations the driver requests (finite-difference probes
//! would otherwise blur the ledger), and so gradient quality never limits
//! how far a solver can converge.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use optikit::linalg::LstsqFactor;
use optikit::sensitivity::{CurvatureModel, ParamProblem};
use optikit::{
    make_bfgs, make_gauss_newton, Matrix, Problem, ProblemKind, SolveMode, Solver, Vector,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// The defining functions of a corpus problem, kept un-wrapped so
/// [`TestProblem::instrumented`] can splice an evaluation counter in front
/// of the objective before handing it to the solver.
#[derive(Clone)]
enum Def {
    /// A scalar objective (minimisation problems).
    Scalar {
        f: ScalarFn,
        grad: Option<VectorFn>,
    },
    /// A vector map: residuals, a root-find map, or a fixed-point map.
    Map {
        f: VectorFn,
        jac: Option<MatrixFn>,
    },
}

/// One benchmark problem: a problem builder plus the metadata the runner and
/// the profiles need (canonical start, known optimum, dimensions).
#[derive(Clone)]
pub struct TestProblem {
    name: &'static str,
    kind: ProblemKind,
    dim: usize,
    x0: Vector,
    f_star: Option<f64>,
    x_star: Option<Vector>,
    def: Def,
}

impl TestProblem {
    fn scalar(
        name: &'static str,
        x0: Vector,
        f: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TestProblem {
            name,
            kind: ProblemKind::Minimise,
            dim: x0.len(),
            x0,
            f_star: None,
            x_star: None,
            def: Def::Scalar {
                f: Arc::new(f),
                grad: None,
            },
        }
    }

    fn map(
        name: &'static str,
        kind: ProblemKind,
        x0: Vector,
        f: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        assert!(
            kind != ProblemKind::Minimise,
            "minimisation problems are scalar; use TestProblem::scalar"
        );
        TestProblem {
            name,
            kind,
            dim: x0.len(),
            x0,
            f_star: None,
            x_star: None,
            def: Def::Map {
                f: Arc::new(f),
                jac: None,
            },
        }
    }

    fn grad(mut self, g: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        match &mut self.def {
            Def::Scalar { grad, .. } => *grad = Some(Arc::new(g)),
            Def::Map { .. } => unreachable!("vector problems take a Jacobian"),
        }
        self
    }

    fn jac(mut self, j: impl Fn(&Vector) -> Matrix + Send + Sync + 'static) -> Self {
        match &mut self.def {
            Def::Map { jac, .. } => *jac = Some(Arc::new(j)),
            Def::Scalar { .. } => unreachable!("scalar problems take a gradient"),
        }
        self
    }

    fn optimum(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    fn argmin(mut self, x_star: Vector) -> Self {
        assert_eq!(x_star.len(), self.dim);
        self.x_star = Some(x_star);
        self
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    /// Optimal objective value in this problem's own metric (see
    /// [`TestProblem::objective`]), when known.
    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    /// A point attaining `f_star`, when one is known. Problems with several
    /// global optima record one representative.
    pub fn x_star(&self) -> Option<&Vector> {
        self.x_star.as_ref()
    }

    /// Build a fresh solvable [`Problem`]. Each call returns an independent
    /// instance so repeated timing runs share no state.
    pub fn problem(&self) -> Problem {
        self.build(None)
    }

    /// Build the problem with an evaluation counter spliced in front of the
    /// objective (or residual/map) function. Derivative calls and
    /// finite-difference probes do not touch the counter — it counts exactly
    /// the evaluations a solver's `fn_evals` ledger claims to make, plus the
    /// single defect evaluation for root-find and fixed-point origins.
    pub fn instrumented(&self) -> (Problem, Arc<AtomicUsize>) {
        let counter = Arc::new(AtomicUsize::new(0));
        (self.build(Some(counter.clone())), counter)
    }

    /// The canonical merit of a point, in the metric the solver reports as
    /// `fval`: the objective itself for minimisation, the residual sum of
    /// squares for least squares and root finding, and `‖f(x) − x‖²` for
    /// fixed points.
    pub fn objective(&self, x: &Vector) -> f64 {
        match &self.def {
            Def::Scalar { f, .. } => f(x),
            Def::Map { f, .. } => {
                let r = f(x);
                match self.kind {
                    ProblemKind::FixedPoint => {
                        (0..r.len()).map(|i| (r[i] - x[i]).powi(2)).sum()
                    }
                    _ => r.iter().map(|v| v * v).sum(),
                }
            }
        }
    }

    fn build(&self, counter: Option<Arc<AtomicUsize>>) -> Problem {
        match &self.def {
            Def::Scalar { f, grad } => {
                let f = f.clone();
                let problem = Problem::minimise(self.dim, move |x| {
                    if let Some(c) = &counter {
                        c.fetch_add(1, Ordering::Relaxed);
                    }
                    f(x)
                });
                match grad {
                    Some(g) => {
                        let g = g.clone();
                        problem.with_gradient(move |x| g(x))
                    }
                    None => problem,
                }
            }
            Def::Map { f, jac } => {
                let f = f.clone();
                let wrapped = move |x: &Vector| {
                    if let Some(c) = &counter {
                        c.fetch_add(1, Ordering::Relaxed);
                    }
                    f(x)
                };
                let problem = match self.kind {
                    ProblemKind::LeastSquares => Problem::least_squares(self.dim, wrapped),
                    ProblemKind::RootFind => Problem::root_find(self.dim, wrapped),
                    ProblemKind::FixedPoint => Problem::fixed_point(self.dim, wrapped),
                    ProblemKind::Minimise => unreachable!("scalar problems use Def::Scalar"),
                };
                match jac {
                    Some(j) => {
                        let j = j.clone();
                        problem.with_jacobian(move |x| j(x))
                    }
                    None => problem,
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Least-squares problems
// ---------------------------------------------------------------------------

/// Chained Rosenbrock in residual form: `scaling·(x[i+1] − x[i]²)` for each
/// adjacent pair followed by `1 − x[j]` for every coordinate, so the full
/// residual vector has `2n − 1` entries and vanishes exactly at all-ones.
fn chained_rosenbrock(name: &'static str, scaling: f64, x0: Vector) -> TestProblem {
    let n = x0.len();
    let residuals = move |x: &Vector| {
        let mut r = Vec::with_capacity(2 * n - 1);
        for i in 0..n - 1 {
            r.push(scaling * (x[i + 1] - x[i] * x[i]));
        }
        for j in 0..n {
            r.push(1.0 - x[j]);
        }
        Vector::from(r)
    };
    let jacobian = move |x: &Vector| {
        Matrix::from_fn(2 * n - 1, n, |row, col| {
            if row < n - 1 {
                if col == row {
                    -2.0 * scaling * x[row]
                } else if col == row + 1 {
                    scaling
                } else {
                    0.0
                }
            } else if col == row - (n - 1) {
                -1.0
            } else {
                0.0
            }
        })
    };
    TestProblem::map(name, ProblemKind::LeastSquares, x0, residuals)
        .jac(jacobian)
        .optimum(0.0)
        .argmin(Vector::filled(n, 1.0))
}

/// Biggs EXP6: fit a sum of three exponentials to 13 samples of
/// `e^{−t} − 5e^{−10t} + 3e^{−4t}` at `t = 0.1, …, 1.3`. Zero residual at
/// `(1, 10, 1, 5, 4, 3)`; a tough landscape with a well-known shallow local
/// minimum that traps line-search BFGS.
fn biggs_exp6() -> TestProblem {
    const M: usize = 13;
    let sample = |i: usize| {
        let t = 0.1 * (i + 1) as f64;
        let y = (-t).exp() - 5.0 * (-10.0 * t).exp() + 3.0 * (-4.0 * t).exp();
        (t, y)
    };
    let residuals = move |x: &Vector| {
        Vector::from_fn(M, |i| {
            let (t, y) = sample(i);
            x[2] * (-t * x[0]).exp() - x[3] * (-t * x[1]).exp() + x[5] * (-t * x[4]).exp() - y
        })
    };
    let jacobian = move |x: &Vector| {
        Matrix::from_fn(M, 6, |i, col| {
            let (t, _) = sample(i);
            match col {
                0 => -t * x[2] * (-t * x[0]).exp(),
                1 => t * x[3] * (-t * x[1]).exp(),
                2 => (-t * x[0]).exp(),
                3 => -(-t * x[1]).exp(),
                4 => -t * x[5] * (-t * x[4]).exp(),
                _ => (-t * x[4]).exp(),
            }
        })
    };
    TestProblem::map(
        "biggs-exp6",
        ProblemKind::LeastSquares,
        Vector::from([1.0, 2.0, 1.0, 1.0, 1.0, 1.0]),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
    .argmin(Vector::from([1.0, 10.0, 1.0, 5.0, 4.0, 3.0]))
}

/// The weights a noisy linear-regression member of the corpus is generated
/// from; recovery should land within the noise level of these.
pub const REGRESSION_TRUE_WEIGHTS: [f64; 3] = [3.14, -7.0, 2.71];

const REGRESSION_SAMPLES: usize = 99;
const REGRESSION_NOISE: f64 = 0.1;
const REGRESSION_SEED: u64 = 20140;

/// The fixed synthetic dataset behind [`linear_regression`]: 99 standard-
/// normal feature triples and their noisy targets, from a seeded generator
/// so every build sees byte-identical data.
pub fn regression_data() -> (Vec<[f64; 3]>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(REGRESSION_SEED);
    let mut draw = move || -> f64 { StandardNormal.sample(&mut rng) };
    let features: Vec<[f64; 3]> = (0..REGRESSION_SAMPLES)
        .map(|_| [draw(), draw(), draw()])
        .collect();
    let targets = features
        .iter()
        .map(|row| {
            let clean: f64 = row
                .iter()
                .zip(REGRESSION_TRUE_WEIGHTS)
                .map(|(x, w)| x * w)
                .sum();
            clean + REGRESSION_NOISE * draw()
        })
        .collect();
    (features, targets)
}

/// Noisy linear regression: one residual `wᵀx_i − y_i` per sample. The best
/// attainable objective (and the attaining weights) are computed from the
/// normal solution of the fixed dataset, so the optimum is known exactly
/// even though the data is noisy.
fn linear_regression() -> TestProblem {
    let (features, targets) = regression_data();
    let design = Matrix::from_fn(REGRESSION_SAMPLES, 3, |i, j| features[i][j]);
    let rhs = Vector::from(targets.clone());
    let best = LstsqFactor::new(&design)
        .expect("the design matrix is finite")
        .solve(&rhs)
        .expect("a 99×3 least-squares system always has a solution");
    let residual_at = {
        let features = features.clone();
        let targets = targets.clone();
        move |w: &Vector| {
            Vector::from_fn(REGRESSION_SAMPLES, |i| {
                features[i][0] * w[0] + features[i][1] * w[1] + features[i][2] * w[2]
                    - targets[i]
            })
        }
    };
    let f_best = {
        let r = residual_at(&best);
        r.iter().map(|v| v * v).sum()
    };
    let jacobian = move |_: &Vector| Matrix::from_fn(REGRESSION_SAMPLES, 3, |i, j| features[i][j]);
    TestProblem::map(
        "linear-regression",
        ProblemKind::LeastSquares,
        Vector::zeros(3),
        residual_at,
    )
    .jac(jacobian)
    .optimum(f_best)
    .argmin(best)
}

/// Beale in residual form: three residuals `y_i − x₀(1 − x₁^{i+1})` with
/// `y = (1.5, 2.25, 2.625)`; zero residual at `(3, 0.5)`.
fn beale() -> TestProblem {
    const Y: [f64; 3] = [1.5, 2.25, 2.625];
    let residuals = |x: &Vector| Vector::from_fn(3, |i| Y[i] - x[0] * (1.0 - x[1].powi(i as i32 + 1)));
    let jacobian = |x: &Vector| {
        Matrix::from_fn(3, 2, |i, col| {
            let p = i as i32 + 1;
            match col {
                0 => -(1.0 - x[1].powi(p)),
                _ => x[0] * p as f64 * x[1].powi(p - 1),
            }
        })
    };
    TestProblem::map(
        "beale",
        ProblemKind::LeastSquares,
        Vector::from([1.0, 1.0]),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
    .argmin(Vector::from([3.0, 0.5]))
}

/// Powell's singular function: four residuals in four variables whose
/// Jacobian drops to rank 2 at the solution (the origin), so convergence is
/// slow and rank-deficient linear algebra gets exercised.
fn powell_singular() -> TestProblem {
    let residuals = |x: &Vector| {
        Vector::from([
            x[0] + 10.0 * x[1],
            5f64.sqrt() * (x[2] - x[3]),
            (x[1] - 2.0 * x[2]).powi(2),
            10f64.sqrt() * (x[0] - x[3]).powi(2),
        ])
    };
    let jacobian = |x: &Vector| {
        let s5 = 5f64.sqrt();
        let s10 = 10f64.sqrt();
        Matrix::from_rows(&[
            vec![1.0, 10.0, 0.0, 0.0],
            vec![0.0, 0.0, s5, -s5],
            vec![
                0.0,
                2.0 * (x[1] - 2.0 * x[2]),
                -4.0 * (x[1] - 2.0 * x[2]),
                0.0,
            ],
            vec![
                2.0 * s10 * (x[0] - x[3]),
                0.0,
                0.0,
                -2.0 * s10 * (x[0] - x[3]),
            ],
        ])
    };
    TestProblem::map(
        "powell-singular",
        ProblemKind::LeastSquares,
        Vector::from([3.0, -1.0, 0.0, 1.0]),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
    .argmin(Vector::zeros(4))
}

/// Wood's function as six residuals over four variables: two coupled
/// Rosenbrock-like valleys plus two tie-down terms; zero residual at
/// all-ones.
fn wood() -> TestProblem {
    let residuals = |x: &Vector| {
        let s90 = 90f64.sqrt();
        let s10 = 10f64.sqrt();
        Vector::from([
            10.0 * (x[1] - x[0] * x[0]),
            1.0 - x[0],
            s90 * (x[3] - x[2] * x[2]),
            1.0 - x[2],
            s10 * (x[1] + x[3] - 2.0),
            (x[1] - x[3]) / s10,
        ])
    };
    let jacobian = |x: &Vector| {
        let s90 = 90f64.sqrt();
        let s10 = 10f64.sqrt();
        Matrix::from_rows(&[
            vec![-20.0 * x[0], 10.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, -2.0 * s90 * x[2], s90],
            vec![0.0, 0.0, -1.0, 0.0],
            vec![0.0, s10, 0.0, s10],
            vec![0.0, 1.0 / s10, 0.0, -1.0 / s10],
        ])
    };
    TestProblem::map(
        "wood",
        ProblemKind::LeastSquares,
        Vector::from([-3.0, -1.0, -3.0, -1.0]),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
    .argmin(Vector::filled(4, 1.0))
}

/// Box's three-dimensional function: ten exponential-difference residuals;
/// residuals vanish at `(1, 10, 1)` (among other points).
fn box_3d() -> TestProblem {
    const M: usize = 10;
    let residuals = |x: &Vector| {
        Vector::from_fn(M, |i| {
            let t = 0.1 * (i + 1) as f64;
            (-t * x[0]).exp() - (-t * x[1]).exp() - x[2] * ((-t).exp() - (-10.0 * t).exp())
        })
    };
    let jacobian = |x: &Vector| {
        Matrix::from_fn(M, 3, |i, col| {
            let t = 0.1 * (i + 1) as f64;
            match col {
                0 => -t * (-t * x[0]).exp(),
                1 => t * (-t * x[1]).exp(),
                _ => -((-t).exp() - (-10.0 * t).exp()),
            }
        })
    };
    TestProblem::map(
        "box-3d",
        ProblemKind::LeastSquares,
        Vector::from([0.0, 10.0, 20.0]),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
    .argmin(Vector::from([1.0, 10.0, 1.0]))
}

/// Brown's badly scaled problem: the two coordinates of the solution differ
/// by twelve orders of magnitude, punishing undamped steps and naive
/// scaling assumptions.
fn brown_badly_scaled() -> TestProblem {
    let residuals = |x: &Vector| {
        Vector::from([x[0] - 1e6, x[1] - 2e-6, x[0] * x[1] - 2.0])
    };
    let jacobian = |x: &Vector| {
        Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![x[1], x[0]],
        ])
    };
    TestProblem::map(
        "brown-badly-scaled",
        ProblemKind::LeastSquares,
        Vector::from([1.0, 1.0]),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
    .argmin(Vector::from([1e6, 2e-6]))
}

/// The helical valley: a spiral ravine around the `x₂` axis with its floor
/// at `(1, 0, 0)`. The angle is computed with `atan2`, which agrees with
/// the classical piecewise definition on the upper half-plane the canonical
/// trajectory stays in.
fn helical_valley() -> TestProblem {
    let theta = |x0: f64, x1: f64| x1.atan2(x0) / std::f64::consts::TAU;
    let residuals = move |x: &Vector| {
        let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
        Vector::from([
            10.0 * (x[2] - 10.0 * theta(x[0], x[1])),
            10.0 * (rho - 1.0),
            x[2],
        ])
    };
    let jacobian = |x: &Vector| {
        let rho2 = x[0] * x[0] + x[1] * x[1];
        let rho = rho2.sqrt();
        let dtheta_dx0 = -x[1] / (std::f64::consts::TAU * rho2);
        let dtheta_dx1 = x[0] / (std::f64::consts::TAU * rho2);
        Matrix::from_rows(&[
            vec![-100.0 * dtheta_dx0, -100.0 * dtheta_dx1, 10.0],
            vec![10.0 * x[0] / rho, 10.0 * x[1] / rho, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
    };
    TestProblem::map(
        "helical-valley",
        ProblemKind::LeastSquares,
        Vector::from([-1.0, 0.0, 0.0]),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
    .argmin(Vector::from([1.0, 0.0, 0.0]))
}

/// The trigonometric system in ten variables: residual `i` couples every
/// coordinate through a shared cosine sum. The canonical start often leads
/// descent methods to a nonzero local minimum — a legitimate benchmark
/// failure mode, not a bug.
fn trigonometric() -> TestProblem {
    const N: usize = 10;
    let residuals = |x: &Vector| {
        let cos_sum: f64 = (0..N).map(|j| x[j].cos()).sum();
        Vector::from_fn(N, |i| {
            N as f64 - cos_sum + (i + 1) as f64 * (1.0 - x[i].cos()) - x[i].sin()
        })
    };
    let jacobian = |x: &Vector| {
        Matrix::from_fn(N, N, |i, j| {
            let base = x[j].sin();
            if i == j {
                base + (i + 1) as f64 * x[i].sin() - x[i].cos()
            } else {
                base
            }
        })
    };
    TestProblem::map(
        "trigonometric",
        ProblemKind::LeastSquares,
        Vector::filled(N, 1.0 / N as f64),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
}

/// Powell's badly scaled pair: one residual lives at scale `10⁴`, the other
/// at scale `1`, and the solution has coordinates five orders of magnitude
/// apart.
fn powell_badly_scaled() -> TestProblem {
    let residuals = |x: &Vector| {
        Vector::from([
            1e4 * x[0] * x[1] - 1.0,
            (-x[0]).exp() + (-x[1]).exp() - 1.0001,
        ])
    };
    let jacobian = |x: &Vector| {
        Matrix::from_rows(&[
            vec![1e4 * x[1], 1e4 * x[0]],
            vec![-(-x[0]).exp(), -(-x[1]).exp()],
        ])
    };
    TestProblem::map(
        "powell-badly-scaled",
        ProblemKind::LeastSquares,
        Vector::from([0.0, 1.0]),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
}

/// Freudenstein–Roth: a two-residual system with a zero-residual root at
/// `(5, 4)` and a famous nonzero local minimum that captures most descent
/// methods started from the canonical point.
fn freudenstein_roth() -> TestProblem {
    let residuals = |x: &Vector| {
        Vector::from([
            -13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1],
            -29.0 + x[0] + ((x[1] + 1.0) * x[1] - 14.0) * x[1],
        ])
    };
    let jacobian = |x: &Vector| {
        Matrix::from_rows(&[
            vec![1.0, 10.0 * x[1] - 3.0 * x[1] * x[1] - 2.0],
            vec![1.0, 3.0 * x[1] * x[1] + 2.0 * x[1] - 14.0],
        ])
    };
    TestProblem::map(
        "freudenstein-roth",
        ProblemKind::LeastSquares,
        Vector::from([0.5, -2.0]),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
    .argmin(Vector::from([5.0, 4.0]))
}

/// Booth's function as two affine residuals — the one problem in the corpus
/// a single damped-Newton step can solve exactly.
fn booth() -> TestProblem {
    let residuals = |x: &Vector| {
        Vector::from([x[0] + 2.0 * x[1] - 7.0, 2.0 * x[0] + x[1] - 5.0])
    };
    let jacobian = |_: &Vector| Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
    TestProblem::map(
        "booth",
        ProblemKind::LeastSquares,
        Vector::zeros(2),
        residuals,
    )
    .jac(jacobian)
    .optimum(0.0)
    .argmin(Vector::from([1.0, 3.0]))
}

// ---------------------------------------------------------------------------
// Minimisation problems
// ---------------------------------------------------------------------------

/// Classic two-dimensional Rosenbrock as a scalar objective (the same
/// valley the residual forms describe, but exercising the minimisation
/// entry point).
fn rosenbrock_min() -> TestProblem {
    let f = |x: &Vector| {
        let a = x[1] - x[0] * x[0];
        let b = 1.0 - x[0];
        100.0 * a * a + b * b
    };
    let grad = |x: &Vector| {
        let a = x[1] - x[0] * x[0];
        Vector::from([-400.0 * x[0] * a - 2.0 * (1.0 - x[0]), 200.0 * a])
    };
    TestProblem::scalar("rosenbrock-min", Vector::from([-1.2, 1.0]), f)
        .grad(grad)
        .optimum(0.0)
        .argmin(Vector::from([1.0, 1.0]))
}

/// A diagonal quadratic whose curvatures span four orders of magnitude:
/// trivially convex, but ill-conditioned enough to spread first-order
/// methods across the profile.
fn scaled_quadratic() -> TestProblem {
    const A: [f64; 5] = [1.0, 10.0, 100.0, 1000.0, 10000.0];
    const C: [f64; 5] = [0.5, -0.3, 0.2, 0.7, -0.4];
    let f = |x: &Vector| (0..5).map(|i| A[i] * (x[i] - C[i]).powi(2)).sum();
    let grad = |x: &Vector| Vector::from_fn(5, |i| 2.0 * A[i] * (x[i] - C[i]));
    TestProblem::scalar("scaled-quadratic", Vector::zeros(5), f)
        .grad(grad)
        .optimum(0.0)
        .argmin(Vector::from(C))
}

/// Himmelblau's four-well polynomial; all four wells are global minima at
/// zero, so the recorded optimal point is just the one nearest the start.
fn himmelblau() -> TestProblem {
    let f = |x: &Vector| {
        let p = x[0] * x[0] + x[1] - 11.0;
        let q = x[0] + x[1] * x[1] - 7.0;
        p * p + q * q
    };
    let grad = |x: &Vector| {
        let p = x[0] * x[0] + x[1] - 11.0;
        let q = x[0] + x[1] * x[1] - 7.0;
        Vector::from([4.0 * x[0] * p + 2.0 * q, 2.0 * p + 4.0 * x[1] * q])
    };
    TestProblem::scalar("himmelblau", Vector::from([1.0, 1.0]), f)
        .grad(grad)
        .optimum(0.0)
        .argmin(Vector::from([3.0, 2.0]))
}

// ---------------------------------------------------------------------------
// Root-finding and fixed-point problems
// ---------------------------------------------------------------------------

/// The scalar cube root: `x³ − 8 = 0`, solved from a start with visibly
/// wrong curvature.
fn cube_root() -> TestProblem {
    let f = |x: &Vector| Vector::from([x[0] * x[0] * x[0] - 8.0]);
    let jac = |x: &Vector| Matrix::from_rows(&[vec![3.0 * x[0] * x[0]]]);
    TestProblem::map("cube-root", ProblemKind::RootFind, Vector::from([1.5]), f)
        .jac(jac)
        .optimum(0.0)
        .argmin(Vector::from([2.0]))
}

/// A small uncoupled root system `(x₀² − 2, x₁ − 1) = 0` — one genuinely
/// nonlinear coordinate, one affine.
fn root_2d() -> TestProblem {
    let f = |x: &Vector| Vector::from([x[0] * x[0] - 2.0, x[1] - 1.0]);
    let jac = |x: &Vector| Matrix::from_rows(&[vec![2.0 * x[0], 0.0], vec![0.0, 1.0]]);
    TestProblem::map("root-2d", ProblemKind::RootFind, Vector::from([1.0, 0.0]), f)
        .jac(jac)
        .optimum(0.0)
        .argmin(Vector::from([2f64.sqrt(), 1.0]))
}

/// The cosine fixed point `x = cos x` (the Dottie number), the textbook
/// contraction example.
fn cosine_fixed_point() -> TestProblem {
    let f = |x: &Vector| Vector::from([x[0].cos()]);
    let jac = |x: &Vector| Matrix::from_rows(&[vec![-x[0].sin()]]);
    TestProblem::map(
        "cosine-fixed-point",
        ProblemKind::FixedPoint,
        Vector::from([1.0]),
        f,
    )
    .jac(jac)
    .optimum(0.0)
    .argmin(Vector::from([0.739_085_133_215_160_7]))
}

/// An affine contraction with ratio one half: `f(x) = x/2 + c`, fixed point
/// `2c`.
fn affine_fixed_point() -> TestProblem {
    let f = |x: &Vector| Vector::from([0.5 * x[0] + 1.0, 0.5 * x[1] - 0.5]);
    let jac = |_: &Vector| Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
    TestProblem::map(
        "affine-fixed-point",
        ProblemKind::FixedPoint,
        Vector::zeros(2),
        f,
    )
    .jac(jac)
    .optimum(0.0)
    .argmin(Vector::from([2.0, -1.0]))
}

/// The full builtin corpus, in a stable order. Names are unique and every
/// problem kind is represented.
pub fn builtin_corpus() -> Vec<TestProblem> {
    vec![
        chained_rosenbrock("rosenbrock-2", 10.0, Vector::from([-1.2, 1.0])),
        chained_rosenbrock(
            "rosenbrock-10",
            10.0,
            Vector::from_fn(10, |i| if i % 2 == 0 { -1.2 } else { 1.0 }),
        ),
        chained_rosenbrock("rosenbrock-100", 10.0, Vector::zeros(100)),
        rosenbrock_min(),
        biggs_exp6(),
        linear_regression(),
        beale(),
        powell_singular(),
        wood(),
        box_3d(),
        brown_badly_scaled(),
        helical_valley(),
        trigonometric(),
        powell_badly_scaled(),
        freudenstein_roth(),
        booth(),
        scaled_quadratic(),
        himmelblau(),
        cube_root(),
        root_2d(),
        cosine_fixed_point(),
        affine_fixed_point(),
    ]
}

/// Fetch one corpus problem by name.
pub fn find_problem(corpus: &[TestProblem], name: &str) -> Option<TestProblem> {
    corpus.iter().find(|p| p.name() == name).cloned()
}

// ---------------------------------------------------------------------------
// Parameterised corpus
// ---------------------------------------------------------------------------

/// A parameterised problem family with everything needed to compare its
/// implicit-function sensitivities against re-solving: a concrete parameter
/// point, a starting iterate, and a solver tight enough that solution error
/// does not pollute derivative comparisons.
pub struct ParamCase {
    pub name: &'static str,
    pub family: ParamProblem,
    pub theta: Vector,
    pub x0: Vector,
    pub solver: Solver,
    pub model: CurvatureModel,
}

/// Parameterised problems spanning all four kinds, used to exercise
/// sensitivity computations end to end.
pub fn parameterized_corpus() -> Vec<ParamCase> {
    let newton = |rtol, atol| Solver::newton_root(rtol, atol);
    let tight_bfgs = || Solver::from(make_bfgs(1e-11, 1e-13, true));
    let tight_gn = || {
        Solver::from(
            make_gauss_newton(1e-12, 1e-14, SolveMode::AugmentedLstsq)
                .expect("positive tolerances"),
        )
    };

    let mut cases = Vec::new();

    // Decoupled cubic roots: F_i = x_i³ + a_i·x_i − θ_i.
    let a = [1.5, 2.5];
    cases.push(ParamCase {
        name: "cubic-roots",
        family: ParamProblem::root_find(2, move |x, th| {
            Vector::from_fn(2, |i| x[i].powi(3) + a[i] * x[i] - th[i])
        })
        .with_jacobian(move |x, _| {
            Matrix::from_fn(2, 2, |i, j| {
                if i == j {
                    3.0 * x[i] * x[i] + a[i]
                } else {
                    0.0
                }
            })
        }),
        theta: Vector::from([0.4, -0.7]),
        x0: Vector::zeros(2),
        solver: newton(1e-12, 1e-14),
        model: CurvatureModel::GaussNewton,
    });

    // A monotone scalar root: e^x + x = θ.
    cases.push(ParamCase {
        name: "exp-root",
        family: ParamProblem::root_find(1, |x, th| Vector::from([x[0].exp() + x[0] - th[0]]))
            .with_jacobian(|x, _| Matrix::from_rows(&[vec![x[0].exp() + 1.0]])),
        theta: Vector::from([1.0]),
        x0: Vector::from([0.0]),
        solver: newton(1e-12, 1e-14),
        model: CurvatureModel::GaussNewton,
    });

    // Separable quartic minimisation: stationarity x_i³ + b_i·x_i = θ_i.
    let b = [1.0, 2.0];
    cases.push(ParamCase {
        name: "quartic-argmin",
        family: ParamProblem::minimise(2, move |x, th| {
            (0..2)
                .map(|i| 0.25 * x[i].powi(4) + 0.5 * b[i] * x[i] * x[i] - th[i] * x[i])
                .sum()
        })
        .with_gradient(move |x, th| {
            Vector::from_fn(2, |i| x[i].powi(3) + b[i] * x[i] - th[i])
        }),
        theta: Vector::from([0.9, -1.1]),
        x0: Vector::zeros(2),
        solver: tight_bfgs(),
        model: CurvatureModel::GaussNewton,
    });

    // A quadratic bowl whose minimiser moves nonlinearly with θ:
    // x* = (θ₀, θ₀·θ₁).
    cases.push(ParamCase {
        name: "coupled-argmin",
        family: ParamProblem::minimise(2, |x, th| {
            (x[0] - th[0]).powi(2) + 2.0 * (x[1] - th[0] * th[1]).powi(2)
        })
        .with_gradient(|x, th| {
            Vector::from([2.0 * (x[0] - th[0]), 4.0 * (x[1] - th[0] * th[1])])
        }),
        theta: Vector::from([1.2, 0.7]),
        x0: Vector::zeros(2),
        solver: tight_bfgs(),
        model: CurvatureModel::GaussNewton,
    });

    // A damped sine contraction: x_i = c_i·sin(x_i) + 0.3·θ_i.
    let c = [0.4, -0.3];
    cases.push(ParamCase {
        name: "sine-fixed-point",
        family: ParamProblem::fixed_point(2, move |x, th| {
            Vector::from_fn(2, |i| c[i] * x[i].sin() + 0.3 * th[i])
        })
        .with_jacobian(move |x, _| {
            Matrix::from_fn(2, 2, |i, j| if i == j { c[i] * x[i].cos() } else { 0.0 })
        }),
        theta: Vector::from([0.8, -0.6]),
        x0: Vector::zeros(2),
        solver: Solver::fixed_point_iteration(1e-12, 1e-14),
        model: CurvatureModel::GaussNewton,
    });

    // Affine observation fit: residual L·x − θ, so x*(θ) is the linear
    // least-squares map and its sensitivity is exactly the pseudoinverse.
    let l_rows: [[f64; 2]; 3] = [[2.0, 0.0], [1.0, 1.0], [0.0, 3.0]];
    cases.push(ParamCase {
        name: "affine-fit",
        family: ParamProblem::least_squares(2, move |x, th| {
            Vector::from_fn(3, |i| l_rows[i][0] * x[0] + l_rows[i][1] * x[1] - th[i])
        })
        .with_jacobian(move |_, _| Matrix::from_fn(3, 2, |i, j| l_rows[i][j])),
        theta: Vector::from([1.0, -2.0, 0.5]),
        x0: Vector::zeros(2),
        solver: tight_gn(),
        model: CurvatureModel::GaussNewton,
    });

    cases
}
