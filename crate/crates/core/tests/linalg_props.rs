//! Property suites for the dense linear-algebra kernel.

use optikit::linalg::{max_norm, solve_cg, solve_cholesky, solve_lstsq, Matrix, Vector};
use proptest::prelude::*;

/// Random square matrix with entries in ±2.
fn square(dim: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-2.0..2.0f64, dim * dim)
        .prop_map(move |v| Matrix::from_fn(dim, dim, |i, j| v[i * dim + j]))
}

/// Random rectangular matrix.
fn rect(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-2.0..2.0f64, rows * cols)
        .prop_map(move |v| Matrix::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

fn vector(dim: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-3.0..3.0f64, dim).prop_map(Vector::from)
}

/// `GᵀG + I` is symmetric positive definite for any `G`.
fn spd(dim: usize) -> impl Strategy<Value = Matrix> {
    square(dim).prop_map(|g| g.ata().add_scaled_identity(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cholesky_and_cg_agree_on_spd_systems(
        (a, b) in (2usize..=6).prop_flat_map(|n| (spd(n), vector(n)))
    ) {
        let direct = solve_cholesky(&a, &b).unwrap();
        let iterative = solve_cg(&a, &b, 1e-12, 10_000).unwrap();
        let scale = 1.0 + max_norm(&direct);
        prop_assert!(
            max_norm(&(&direct - &iterative.x)) <= 1e-6 * scale,
            "cholesky {:?} vs cg {:?}",
            direct.as_slice(),
            iterative.x.as_slice()
        );
    }

    #[test]
    fn lstsq_residual_is_orthogonal_to_the_column_space(
        (a, b) in (2usize..=5).prop_flat_map(|n| {
            (3usize..=7).prop_flat_map(move |m| (rect(m.max(n), n), vector(m.max(n))))
        })
    ) {
        let x = solve_lstsq(&a, &b).unwrap();
        let residual = &a.matvec(&x) - &b;
        let atr = a.t_matvec(&residual);
        let bound = 1e-8 * (1.0 + max_norm(&a.t_matvec(&b)));
        prop_assert!(
            max_norm(&atr) <= bound,
            "‖Aᵀ(Ax−b)‖∞ = {} > {}",
            max_norm(&atr),
            bound
        );
    }

    #[test]
    fn stacked_and_normal_equation_damping_agree(
        (j, b, lambda) in (2usize..=4).prop_flat_map(|n| {
            (4usize..=7).prop_flat_map(move |m| {
                (rect(m, n), vector(m), 1e-3..10.0f64)
            })
        })
    ) {
        let n = j.ncols();
        let m = j.nrows();
        // Normal-equations route: (JᵀJ + λI) x = Jᵀb.
        let damped = j.ata().add_scaled_identity(lambda);
        let via_cholesky = solve_cholesky(&damped, &j.atb(&b)).unwrap();

        // Stacked route: least squares on [J; √λ·I] x = [b; 0].
        let sqrt_l = lambda.sqrt();
        let stacked = Matrix::from_fn(m + n, n, |r, c| {
            if r < m {
                j[(r, c)]
            } else if r - m == c {
                sqrt_l
            } else {
                0.0
            }
        });
        let rhs = Vector::from_fn(m + n, |r| if r < m { b[r] } else { 0.0 });
        let via_lstsq = solve_lstsq(&stacked, &rhs).unwrap();

        let scale = 1.0 + max_norm(&via_cholesky);
        prop_assert!(
            max_norm(&(&via_cholesky - &via_lstsq)) <= 1e-6 * scale,
            "normal {:?} vs stacked {:?} (λ = {lambda})",
            via_cholesky.as_slice(),
            via_lstsq.as_slice()
        );
    }

    #[test]
    fn cholesky_solutions_actually_solve(
        (a, b) in (1usize..=6).prop_flat_map(|n| (spd(n), vector(n)))
    ) {
        let x = solve_cholesky(&a, &b).unwrap();
        let back = a.matvec(&x);
        prop_assert!(max_norm(&(&back - &b)) <= 1e-7 * (1.0 + max_norm(&b)));
    }
}
