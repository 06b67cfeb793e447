//! Central finite differences, used as the fallback whenever a problem does
//! not supply analytic derivatives.
//!
//! Steps scale with the coordinate: `h_i = step·(1 + |x_i|)`, with
//! `step = 1e-6` for first derivatives and `1e-5` for Hessians assembled from
//! a gradient map.

use crate::linalg::{Matrix, Vector};

/// Relative step for first-order differences.
pub const GRAD_STEP: f64 = 1e-6;

/// Relative step when differencing a gradient map into a Hessian.
pub const HESS_STEP: f64 = 1e-5;

/// Central-difference gradient of a scalar function.
pub fn gradient(f: impl Fn(&Vector) -> f64, x: &Vector) -> Vector {
    let n = x.len();
    let mut g = Vector::zeros(n);
    let mut xp = x.clone();
    for i in 0..n {
        let h = GRAD_STEP * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Jacobian of a vector map (rows: outputs, columns:
/// inputs).
pub fn jacobian(f: impl Fn(&Vector) -> Vector, x: &Vector) -> Matrix {
    let n = x.len();
    let mut xp = x.clone();
    let mut cols: Vec<Vector> = Vec::with_capacity(n);
    for i in 0..n {
        let h = GRAD_STEP * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        cols.push((&fp - &fm).scale(1.0 / (2.0 * h)));
    }
    let m = cols.first().map_or(0, Vector::len);
    Matrix::from_fn(m, n, |r, c| cols[c][r])
}

/// Hessian assembled by central-differencing a gradient map, symmetrised as
/// `(H + Hᵀ)/2` to wash out differencing asymmetry.
pub fn hessian_of_grad(grad: impl Fn(&Vector) -> Vector, x: &Vector) -> Matrix {
    let n = x.len();
    let mut xp = x.clone();
    let mut cols: Vec<Vector> = Vec::with_capacity(n);
    for i in 0..n {
        let h = HESS_STEP * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let gp = grad(&xp);
        xp[i] = x[i] - h;
        let gm = grad(&xp);
        xp[i] = x[i];
        cols.push((&gp - &gm).scale(1.0 / (2.0 * h)));
    }
    Matrix::from_fn(n, n, |r, c| 0.5 * (cols[c][r] + cols[r][c]))
}
