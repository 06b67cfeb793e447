//! Entry-point behaviour that must hold however a problem reaches a solver:
//! every lowering path that converges lands on a genuine answer, lowering
//! never changes how often the user function is called, and the kind ×
//! solver dispatch either runs or refuses up front — it never fails midway.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use proptest::prelude::*;

use optikit::ProblemKind::{self, *};
use optikit::{
    fixed_point_with_jacobian, least_squares_with_jacobian, make_bfgs, make_gauss_newton,
    minimise_with_gradient, root_find_with_jacobian, ConfigError, Matrix, Solver, SolveMode,
    Vector,
};

const RTOL: f64 = 1e-8;
const ATOL: f64 = 1e-10;

/// A diagonally dominant affine system `f(x) = Ax − b` with a unique root.
fn affine_system(n: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (
        prop::collection::vec(prop::collection::vec(-1.0..1.0f64, n), n),
        prop::collection::vec(-2.0..2.0f64, n),
    )
        .prop_map(move |(mut rows, b)| {
            for (i, row) in rows.iter_mut().enumerate() {
                row[i] += 2.0 * n as f64 + 1.0;
            }
            (rows, b)
        })
}

/// A diagonal contraction `f(x) = c ⊙ x + d` with |cᵢ| ≤ 1/2, so the fixed
/// point is unique and plain iteration converges.
fn contraction(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-0.5..0.5f64, n),
        prop::collection::vec(-1.0..1.0f64, n),
    )
}

fn bfgs() -> Solver {
    Solver::from(make_bfgs(RTOL, ATOL, true))
}

fn gauss_newton() -> Solver {
    Solver::from(make_gauss_newton(RTOL, ATOL, SolveMode::AugmentedLstsq).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Solving the same root-find down three different lowering chains —
    /// native Newton, once-lowered Gauss–Newton, twice-lowered BFGS — must
    /// give three converged answers whose original-equation defect is within
    /// 10·(atol + rtol), and the answers themselves must agree.
    #[test]
    fn every_lowering_path_lands_on_the_same_root(
        (rows, b) in (1usize..=4).prop_flat_map(affine_system),
    ) {
        let a = Matrix::from_rows(&rows);
        let b = Vector::from(b);
        let n = b.len();
        let x0 = Vector::zeros(n);

        let solvers = [
            (Solver::newton_root(RTOL, ATOL), vec![RootFind]),
            (gauss_newton(), vec![RootFind, LeastSquares]),
            (bfgs(), vec![RootFind, LeastSquares, Minimise]),
        ];

        let bound = 10.0 * (ATOL + RTOL);
        let mut answers: Vec<Vector> = Vec::new();
        for (solver, chain) in solvers {
            let (aa, bb) = (a.clone(), b.clone());
            let jac = a.clone();
            let sol = root_find_with_jacobian(
                move |x: &Vector| &aa.matvec(x) - &bb,
                move |_: &Vector| jac.clone(),
                &solver,
                &x0,
            )
            .unwrap();
            prop_assert!(sol.result.is_converged(), "{:?} via {chain:?}", sol.result);
            prop_assert_eq!(sol.lowering, chain);
            let defect = sol.stats.root_residual_norm.unwrap();
            prop_assert!(defect <= bound, "defect {defect} exceeds {bound}");
            answers.push(sol.value);
        }
        for pair in answers.windows(2) {
            let gap = (&pair[0] - &pair[1]).max_norm();
            prop_assert!(gap <= 1e-6, "paths disagree by {gap}");
        }
    }

    /// The same commuting property through the full chain: a fixed point
    /// solved natively, as a root-find, as least squares, and as a
    /// minimisation must produce the same point with the same defect bound.
    #[test]
    fn every_lowering_path_lands_on_the_same_fixed_point(
        (c, d) in (1usize..=4).prop_flat_map(contraction),
    ) {
        let n = d.len();
        let x0 = Vector::zeros(n);

        let solvers = [
            (Solver::fixed_point_iteration(RTOL, ATOL), vec![FixedPoint]),
            (Solver::newton_root(RTOL, ATOL), vec![FixedPoint, RootFind]),
            (gauss_newton(), vec![FixedPoint, RootFind, LeastSquares]),
            (bfgs(), vec![FixedPoint, RootFind, LeastSquares, Minimise]),
        ];

        let bound = 10.0 * (ATOL + RTOL);
        let mut answers: Vec<Vector> = Vec::new();
        for (solver, chain) in solvers {
            let (cc, dd) = (c.clone(), d.clone());
            let jc = c.clone();
            let sol = fixed_point_with_jacobian(
                move |x: &Vector| Vector::from_fn(x.len(), |i| cc[i] * x[i] + dd[i]),
                move |x: &Vector| {
                    Matrix::from_fn(x.len(), x.len(), |i, j| if i == j { jc[i] } else { 0.0 })
                },
                &solver,
                &x0,
            )
            .unwrap();
            prop_assert!(sol.result.is_converged(), "{:?} via {chain:?}", sol.result);
            prop_assert_eq!(sol.lowering, chain);
            let defect = sol.stats.root_residual_norm.unwrap();
            prop_assert!(defect <= bound, "defect {defect} exceeds {bound}");
            answers.push(sol.value);
        }
        for pair in answers.windows(2) {
            let gap = (&pair[0] - &pair[1]).max_norm();
            prop_assert!(gap <= 1e-6, "paths disagree by {gap}");
        }
    }

    /// Lowering rewraps the user function but never re-evaluates it: however
    /// far down the chain a problem travels, the map is called exactly once
    /// per visited point. The only call outside the solver's own count is
    /// the single post-solve defect evaluation on root-find and fixed-point
    /// problems.
    #[test]
    fn lowering_calls_the_map_once_per_visited_point(
        (rows, b) in (1usize..=4).prop_flat_map(affine_system),
    ) {
        let a = Matrix::from_rows(&rows);
        let b = Vector::from(b);
        let n = b.len();
        let x0 = Vector::from_fn(n, |i| 0.3 * i as f64 - 0.5);

        // Root-find origin: one extra call for the defect check.
        for solver in [bfgs(), gauss_newton(), Solver::newton_root(RTOL, ATOL)] {
            let calls = Arc::new(AtomicUsize::new(0));
            let jac_calls = Arc::new(AtomicUsize::new(0));
            let (aa, bb) = (a.clone(), b.clone());
            let jac = a.clone();
            let (seen_f, seen_j) = (calls.clone(), jac_calls.clone());
            let sol = root_find_with_jacobian(
                move |x: &Vector| {
                    seen_f.fetch_add(1, Ordering::Relaxed);
                    &aa.matvec(x) - &bb
                },
                move |_: &Vector| {
                    seen_j.fetch_add(1, Ordering::Relaxed);
                    jac.clone()
                },
                &solver,
                &x0,
            )
            .unwrap();
            prop_assert!(sol.result.is_converged());
            prop_assert_eq!(
                calls.load(Ordering::Relaxed),
                sol.stats.fn_evals + 1,
                "fn calls vs counted evals, {:?}",
                sol.stats
            );
            prop_assert_eq!(jac_calls.load(Ordering::Relaxed), sol.stats.grad_evals);
        }

        // Least-squares origin: no defect check, so the counts match exactly,
        // and the composed drivers keep the proposal ledger balanced.
        for solver in [bfgs(), gauss_newton()] {
            let calls = Arc::new(AtomicUsize::new(0));
            let (aa, bb) = (a.clone(), b.clone());
            let jac = a.clone();
            let seen_f = calls.clone();
            let sol = least_squares_with_jacobian(
                move |x: &Vector| {
                    seen_f.fetch_add(1, Ordering::Relaxed);
                    &aa.matvec(x) - &bb
                },
                move |_: &Vector| jac.clone(),
                &solver,
                &x0,
            )
            .unwrap();
            prop_assert!(sol.result.is_converged());
            prop_assert_eq!(calls.load(Ordering::Relaxed), sol.stats.fn_evals);
            prop_assert_eq!(
                sol.stats.fn_evals,
                sol.stats.accepted_steps + sol.stats.rejected_steps + 1
            );
        }
    }

    /// Dispatch is total: each kind × solver pair either solves the problem
    /// or returns a capability error before touching the user function.
    /// Nothing errors mid-solve, and every accepted pairing actually reaches
    /// the answer.
    #[test]
    fn dispatch_runs_or_refuses_up_front(
        root in 0.2..0.8f64,
        rate in 0.1..0.9f64,
        flip in proptest::bool::ANY,
    ) {
        // The same scalar answer dressed up as all four problem kinds: the
        // fixed-point map x ↦ c·x + (1−c)·root contracts at rate |c| < 1.
        let c = if flip { -rate } else { rate };
        let x0 = Vector::from([0.0]);

        let solvers: Vec<(&str, Solver, ProblemKind)> = vec![
            ("bfgs", bfgs(), Minimise),
            ("gauss-newton", gauss_newton(), LeastSquares),
            ("newton", Solver::newton_root(RTOL, ATOL), RootFind),
            ("chord", Solver::chord(RTOL, ATOL), RootFind),
            (
                "bisection",
                Solver::bisection(0.0, 1.0, RTOL, ATOL).unwrap(),
                RootFind,
            ),
            (
                "fixed-point",
                Solver::fixed_point_iteration(RTOL, ATOL),
                FixedPoint,
            ),
        ];
        // The lowering chain runs strictly downward; a solver native at
        // `target` accepts exactly the kinds at or above it.
        let order = [FixedPoint, RootFind, LeastSquares, Minimise];
        let position = |kind: ProblemKind| order.iter().position(|&k| k == kind).unwrap();

        for kind in order {
            for (name, solver, target) in &solvers {
                let calls = Arc::new(AtomicUsize::new(0));
                let seen = calls.clone();
                let outcome = match kind {
                    Minimise => minimise_with_gradient(
                        move |x: &Vector| {
                            seen.fetch_add(1, Ordering::Relaxed);
                            (x[0] - root) * (x[0] - root)
                        },
                        move |x: &Vector| Vector::from([2.0 * (x[0] - root)]),
                        solver,
                        &x0,
                    ),
                    LeastSquares => least_squares_with_jacobian(
                        move |x: &Vector| {
                            seen.fetch_add(1, Ordering::Relaxed);
                            [x[0] - root]
                        },
                        |_: &Vector| Matrix::identity(1),
                        solver,
                        &x0,
                    ),
                    RootFind => root_find_with_jacobian(
                        move |x: &Vector| {
                            seen.fetch_add(1, Ordering::Relaxed);
                            Vector::from([x[0] - root])
                        },
                        |_: &Vector| Matrix::identity(1),
                        solver,
                        &x0,
                    ),
                    FixedPoint => fixed_point_with_jacobian(
                        move |x: &Vector| {
                            seen.fetch_add(1, Ordering::Relaxed);
                            Vector::from([c * x[0] + (1.0 - c) * root])
                        },
                        move |_: &Vector| Matrix::from_rows(&[vec![c]]),
                        solver,
                        &x0,
                    ),
                };

                if position(kind) <= position(*target) {
                    let sol = outcome.unwrap();
                    prop_assert!(
                        sol.result.is_converged(),
                        "{name} on {kind:?}: {:?}",
                        sol.result
                    );
                    prop_assert!(
                        (sol.value[0] - root).abs() <= 1e-6,
                        "{name} on {kind:?} landed at {} instead of {root}",
                        sol.value[0]
                    );
                    let expected: Vec<ProblemKind> =
                        order[position(kind)..=position(*target)].to_vec();
                    prop_assert_eq!(sol.lowering, expected);
                } else {
                    let err = outcome.unwrap_err();
                    prop_assert!(
                        matches!(err, ConfigError::Capability { .. }),
                        "{name} on {kind:?}: {err}"
                    );
                    prop_assert_eq!(
                        calls.load(Ordering::Relaxed),
                        0,
                        "{} refused {:?} but evaluated the map",
                        name,
                        kind
                    );
                }
            }
        }
    }
}
