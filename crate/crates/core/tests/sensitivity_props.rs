//! Implicit-function sensitivities checked against oracles that know
//! nothing about the implementation: a hand-inverted linear family, and a
//! central finite-difference of the *whole solve* — re-solving the problem
//! at perturbed parameters and differencing the answers.

use proptest::prelude::*;

use optikit::{
    implicit_jacobian, implicit_jacobian_instrumented, make_bfgs, make_gauss_newton, solve,
    task_system, CurvatureModel, ImplicitSystem, Matrix, ParamProblem, SensitivityError,
    SolveMode, Solver, Vector,
};

const FD_H: f64 = 1e-5;

/// A diagonally dominant square matrix, comfortably nonsingular.
fn dominant_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, n), n).prop_map(move |mut rows| {
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] += 2.0 * n as f64 + 1.0;
        }
        rows
    })
}

fn max_abs_entry(m: &Matrix) -> f64 {
    let mut best = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

/// Solve the bound problem and insist it converged.
fn solve_at(pp: &ParamProblem, solver: &Solver, theta: &Vector, x0: &Vector) -> Vector {
    let sol = solve(pp.at(theta), solver, x0).unwrap();
    assert!(
        sol.result.is_converged(),
        "solve at θ = {theta} ended with {:?}",
        sol.result
    );
    sol.value
}

/// The oracle: dx*/dθ by central differences of the solution map itself,
/// one pair of full re-solves per parameter.
fn fd_resolve_jacobian(
    pp: &ParamProblem,
    solver: &Solver,
    theta: &Vector,
    x0: &Vector,
) -> Matrix {
    let n = pp.dim_in();
    let m = theta.len();
    let mut cols = Vec::with_capacity(m);
    for k in 0..m {
        let mut plus = theta.clone();
        plus[k] += FD_H;
        let mut minus = theta.clone();
        minus[k] -= FD_H;
        let x_plus = solve_at(pp, solver, &plus, x0);
        let x_minus = solve_at(pp, solver, &minus, x0);
        cols.push((&x_plus - &x_minus).scale(1.0 / (2.0 * FD_H)));
    }
    Matrix::from_fn(n, m, |i, j| cols[j][i])
}

/// Elementwise agreement within max(1e-5, 1e-3·‖J‖) of the oracle.
fn assert_matches_oracle(ift: &Matrix, oracle: &Matrix) -> Result<(), TestCaseError> {
    prop_assert_eq!((ift.nrows(), ift.ncols()), (oracle.nrows(), oracle.ncols()));
    let tol = (1e-3 * max_abs_entry(oracle)).max(1e-5);
    for i in 0..ift.nrows() {
        for j in 0..ift.ncols() {
            let gap = (ift[(i, j)] - oracle[(i, j)]).abs();
            prop_assert!(
                gap <= tol,
                "({}, {}): implicit {} vs re-solve {} differs by {gap} > {tol}",
                i,
                j,
                ift[(i, j)],
                oracle[(i, j)]
            );
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// For F(x, θ) = Ax − Bθ the sensitivity is A⁻¹B, so pushing the
    /// computed Jacobian back through A must reproduce B to linear-solve
    /// accuracy — no finite differences anywhere in the check.
    #[test]
    fn linear_systems_recover_the_exact_inverse_map(
        (rows, m) in (1usize..=4).prop_flat_map(|n| (dominant_matrix(n), 1usize..=5)),
        seed in prop::collection::vec(-2.0..2.0f64, 20),
    ) {
        let a = Matrix::from_rows(&rows);
        let n = a.nrows();
        let b = Matrix::from_fn(n, m, |i, j| seed[(i * m + j) % seed.len()]);

        let (a2, b2) = (a.clone(), b.clone());
        let sys = ImplicitSystem::new(move |x: &Vector, theta: &Vector| {
            &a2.matvec(x) - &b2.matvec(theta)
        })
        .with_dfdx({
            let a3 = a.clone();
            move |_: &Vector, _: &Vector| a3.clone()
        })
        .with_dfdtheta({
            let b3 = b.clone();
            move |_: &Vector, _: &Vector| b3.scale(-1.0)
        });

        let jac = implicit_jacobian(&sys, &Vector::zeros(n), &Vector::zeros(m)).unwrap();
        let reproduced = a.matmul(&jac);
        let slack = 1e-9 * (1.0 + max_abs_entry(&b));
        for i in 0..n {
            for j in 0..m {
                let gap = (reproduced[(i, j)] - b[(i, j)]).abs();
                prop_assert!(gap <= slack, "A·J differs from B by {gap} at ({i}, {j})");
            }
        }
    }

    /// Root-find sensitivities: F(x, θ)ᵢ = xᵢ³ + aᵢxᵢ − θᵢ is strictly
    /// monotone, so Newton solves it for any θ and the implicit Jacobian
    /// must match differencing those solves.
    #[test]
    fn root_find_sensitivity_matches_the_resolve_oracle(
        (stiffness, theta) in (1usize..=3).prop_flat_map(|n| {
            (
                prop::collection::vec(1.0..3.0f64, n),
                prop::collection::vec(-2.0..2.0f64, n),
            )
        }),
    ) {
        let n = stiffness.len();
        let a = stiffness.clone();
        let pp = ParamProblem::root_find(n, move |x: &Vector, theta: &Vector| {
            Vector::from_fn(x.len(), |i| x[i] * x[i] * x[i] + a[i] * x[i] - theta[i])
        });
        let solver = Solver::newton_root(1e-12, 1e-14);
        let theta = Vector::from(theta);
        let x0 = Vector::zeros(n);

        let x_star = solve_at(&pp, &solver, &theta, &x0);
        let sys = task_system(&pp, CurvatureModel::GaussNewton);
        let ift = implicit_jacobian(&sys, &x_star, &theta).unwrap();
        let oracle = fd_resolve_jacobian(&pp, &solver, &theta, &x0);
        assert_matches_oracle(&ift, &oracle)?;

        // Decoupled coordinates have the closed form 1/(3x² + a) on the
        // diagonal; check it too so the oracle itself stays honest.
        for i in 0..n {
            let closed = 1.0 / (3.0 * x_star[i] * x_star[i] + stiffness[i]);
            prop_assert!((ift[(i, i)] - closed).abs() <= 1e-5);
        }
    }

    /// Minimisation sensitivities through the Hessian: the argmin of
    /// Σ xᵢ⁴/4 + aᵢxᵢ²/2 − θᵢxᵢ shares the cubic stationarity above, solved
    /// here by BFGS with the Hessian reconstructed by finite differences.
    #[test]
    fn argmin_sensitivity_matches_the_resolve_oracle(
        (stiffness, theta) in (1usize..=3).prop_flat_map(|n| {
            (
                prop::collection::vec(1.0..3.0f64, n),
                prop::collection::vec(-2.0..2.0f64, n),
            )
        }),
    ) {
        let n = stiffness.len();
        let (a1, a2) = (stiffness.clone(), stiffness.clone());
        let pp = ParamProblem::minimise(n, move |x: &Vector, theta: &Vector| {
            (0..x.len())
                .map(|i| {
                    0.25 * x[i].powi(4) + 0.5 * a1[i] * x[i] * x[i] - theta[i] * x[i]
                })
                .sum()
        })
        .with_gradient(move |x: &Vector, theta: &Vector| {
            Vector::from_fn(x.len(), |i| x[i] * x[i] * x[i] + a2[i] * x[i] - theta[i])
        });
        let solver = Solver::from(make_bfgs(1e-11, 1e-13, true));
        let theta = Vector::from(theta);
        let x0 = Vector::zeros(n);

        let x_star = solve_at(&pp, &solver, &theta, &x0);
        let sys = task_system(&pp, CurvatureModel::GaussNewton);
        let ift = implicit_jacobian(&sys, &x_star, &theta).unwrap();
        let oracle = fd_resolve_jacobian(&pp, &solver, &theta, &x0);
        assert_matches_oracle(&ift, &oracle)?;
    }

    /// Fixed-point sensitivities: a sine contraction with |∂f/∂x| ≤ 1/2,
    /// solved by plain iteration, differentiated through F = f − x.
    #[test]
    fn fixed_point_sensitivity_matches_the_resolve_oracle(
        (gain, theta) in (1usize..=3).prop_flat_map(|n| {
            (
                prop::collection::vec(-0.5..0.5f64, n),
                prop::collection::vec(-1.0..1.0f64, n),
            )
        }),
    ) {
        let n = gain.len();
        let c = gain.clone();
        let pp = ParamProblem::fixed_point(n, move |x: &Vector, theta: &Vector| {
            Vector::from_fn(x.len(), |i| c[i] * x[i].sin() + 0.3 * theta[i])
        });
        let solver = Solver::fixed_point_iteration(1e-12, 1e-14);
        let theta = Vector::from(theta);
        let x0 = Vector::zeros(n);

        let x_star = solve_at(&pp, &solver, &theta, &x0);
        let sys = task_system(&pp, CurvatureModel::GaussNewton);
        let ift = implicit_jacobian(&sys, &x_star, &theta).unwrap();
        let oracle = fd_resolve_jacobian(&pp, &solver, &theta, &x0);
        assert_matches_oracle(&ift, &oracle)?;

        // Closed form for the decoupled map: 0.3/(1 − cᵢ·cos xᵢ*).
        for i in 0..n {
            let closed = 0.3 / (1.0 - gain[i] * x_star[i].cos());
            prop_assert!((ift[(i, i)] - closed).abs() <= 1e-5);
        }
    }

    /// Zero-residual least squares: r = Lx − θ vanishes at the solution, so
    /// the Gauss–Newton curvature model is exact and the sensitivity is the
    /// inverse of L.
    #[test]
    fn least_squares_sensitivity_matches_the_resolve_oracle(
        (rows, theta) in (1usize..=3).prop_flat_map(|n| {
            (dominant_matrix(n), prop::collection::vec(-2.0..2.0f64, n))
        }),
    ) {
        let l = Matrix::from_rows(&rows);
        let n = l.nrows();
        let (l1, l2) = (l.clone(), l.clone());
        let pp = ParamProblem::least_squares(n, move |x: &Vector, theta: &Vector| {
            &l1.matvec(x) - theta
        })
        .with_jacobian(move |_: &Vector, _: &Vector| l2.clone());
        let solver =
            Solver::from(make_gauss_newton(1e-12, 1e-14, SolveMode::AugmentedLstsq).unwrap());
        let theta = Vector::from(theta);
        let x0 = Vector::zeros(n);

        let x_star = solve_at(&pp, &solver, &theta, &x0);
        let sys = task_system(&pp, CurvatureModel::GaussNewton);
        let ift = implicit_jacobian(&sys, &x_star, &theta).unwrap();
        let oracle = fd_resolve_jacobian(&pp, &solver, &theta, &x0);
        assert_matches_oracle(&ift, &oracle)?;

        // L·(dx*/dθ) = I, since x*(θ) = L⁻¹θ.
        let identity = l.matmul(&ift);
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((identity[(i, j)] - expect).abs() <= 1e-6);
            }
        }
    }

    /// However many parameters there are, dF/dx is factorized exactly once
    /// and back-substituted once per parameter column.
    #[test]
    fn one_factorization_serves_all_columns(
        (rows, m) in (1usize..=4).prop_flat_map(|n| (dominant_matrix(n), 1usize..=6)),
    ) {
        let a = Matrix::from_rows(&rows);
        let n = a.nrows();
        let b = Matrix::from_fn(n, m, |i, j| ((i + 2 * j) % 5) as f64 - 2.0);

        let (a2, b2) = (a.clone(), b.clone());
        let sys = ImplicitSystem::new(move |x: &Vector, theta: &Vector| {
            &a2.matvec(x) - &b2.matvec(theta)
        })
        .with_dfdx(move |_: &Vector, _: &Vector| a.clone())
        .with_dfdtheta(move |_: &Vector, _: &Vector| b.scale(-1.0));

        let (jac, stats) =
            implicit_jacobian_instrumented(&sys, &Vector::zeros(n), &Vector::zeros(m)).unwrap();
        prop_assert_eq!((jac.nrows(), jac.ncols()), (n, m));
        prop_assert_eq!(stats.factorizations, 1);
        prop_assert_eq!(stats.solves, m);
    }

    /// A rank-deficient dF/dx has no unique sensitivity; the error must say
    /// so rather than silently projecting through a pseudo-inverse.
    #[test]
    fn singular_stationarity_systems_are_refused(
        (rows, m) in (2usize..=4).prop_flat_map(|n| (dominant_matrix(n), 1usize..=3)),
    ) {
        let mut rows = rows;
        let n = rows.len();
        rows[n - 1] = rows[0].clone();
        let a = Matrix::from_rows(&rows);

        let a2 = a.clone();
        let sys = ImplicitSystem::new(move |x: &Vector, _: &Vector| a2.matvec(x))
            .with_dfdx(move |_: &Vector, _: &Vector| a.clone())
            .with_dfdtheta(move |_: &Vector, _: &Vector| Matrix::from_fn(n, m, |_, _| 1.0));

        let err = implicit_jacobian(&sys, &Vector::zeros(n), &Vector::zeros(m)).unwrap_err();
        match err {
            SensitivityError::SingularSystem { rank, dim } => {
                prop_assert_eq!(dim, n);
                prop_assert!(rank < n, "rank {rank} should be deficient");
            }
            other => prop_assert!(false, "unexpected error {other}"),
        }
    }
}
