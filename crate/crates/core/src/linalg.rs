//! Dense linear algebra used by the solver stack.
//!
//! Everything here is deliberately small and explicit: a row-major [`Matrix`],
//! a [`Vector`] newtype, and three solve kernels —
//!
//! * [`solve_cholesky`] for symmetric positive-definite systems,
//! * [`solve_cg`] (unpreconditioned Hestenes–Stiefel conjugate gradients),
//! * [`solve_lstsq`] for minimum-norm least squares via column-pivoted
//!   Householder QR plus a complete orthogonal decomposition, so
//!   rank-deficient systems are handled without falling back to a basic
//!   solution.
//!
//! Problems in this crate are desk-scale (tens to a few hundred unknowns), so
//! the kernels favour clarity and well-defined failure modes over blocked
//! performance tricks.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use thiserror::Error;

/// Cholesky pivots at or below this value are treated as "not positive
/// definite" and abort the factorisation.
pub const CHOLESKY_PIVOT_MIN: f64 = 1e-14;

/// Relative rank tolerance for the pivoted QR: a diagonal entry with
/// `|R_kk| <= RANK_TOL * |R_00|` marks the numerical rank.
pub const RANK_TOL: f64 = 1e-12;

/// Errors from the dense kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinAlgError {
    #[error("matrix not positive definite: pivot {pivot:.3e} at column {index}")]
    NotPositiveDefinite { pivot: f64, index: usize },
    #[error("non-finite values encountered during linear solve")]
    NonFinite,
    #[error("matrix numerically singular: rank {rank} of {dim}")]
    Singular { rank: usize, dim: usize },
}

// ---------------------------------------------------------------------------
// Vector
// ---------------------------------------------------------------------------

/// A dense column vector of `f64`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector { data: vec![0.0; n] }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Vector {
            data: vec![value; n],
        }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        Vector {
            data: (0..n).map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Euclidean norm.
    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Max-norm `max_i |v_i|`; any NaN entry propagates as NaN.
    pub fn max_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for &v in &self.data {
            if v.is_nan() {
                return f64::NAN;
            }
            m = m.max(v.abs());
        }
        m
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self + a * v`, allocating a new vector.
    pub fn axpy(&self, a: f64, v: &Vector) -> Vector {
        assert_eq!(self.len(), v.len(), "axpy: length mismatch");
        Vector::from_fn(self.len(), |i| self.data[i] + a * v.data[i])
    }

    pub fn scale(&self, a: f64) -> Vector {
        Vector {
            data: self.data.iter().map(|v| v * a).collect(),
        }
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Vector {
        Vector {
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.data.clone()
    }
}

/// Max-norm of a vector; NaN entries propagate.
pub fn max_norm(v: &Vector) -> f64 {
    v.max_norm()
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Vector { data }
    }
}

impl From<&[f64]> for Vector {
    fn from(data: &[f64]) -> Self {
        Vector {
            data: data.to_vec(),
        }
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(data: [f64; N]) -> Self {
        Vector {
            data: data.to_vec(),
        }
    }
}

impl FromIterator<f64> for Vector {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        Vector {
            data: iter.into_iter().collect(),
        }
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, a: f64) -> Vector {
        self.scale(a)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// A dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Build from nested rows; panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|row| row.len() == c),
            "from_rows: ragged rows"
        );
        Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x`.
    pub fn matvec(&self, x: &Vector) -> Vector {
        assert_eq!(self.cols, x.len(), "matvec: dimension mismatch");
        Vector::from_fn(self.rows, |i| {
            self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum()
        })
    }

    /// `Aᵀ x`.
    pub fn t_matvec(&self, x: &Vector) -> Vector {
        assert_eq!(self.rows, x.len(), "t_matvec: dimension mismatch");
        let mut out = Vector::zeros(self.cols);
        for i in 0..self.rows {
            let xi = x[i];
            for j in 0..self.cols {
                out[j] += self[(i, j)] * xi;
            }
        }
        out
    }

    /// `Aᵀ A` (symmetric by construction).
    pub fn ata(&self) -> Matrix {
        let n = self.cols;
        let mut out = Matrix::zeros(n, n);
        for k in 0..self.rows {
            let row = self.row(k);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    out[(i, j)] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out[(i, j)] = out[(j, i)];
            }
        }
        out
    }

    /// `Aᵀ b`.
    pub fn atb(&self, b: &Vector) -> Vector {
        self.t_matvec(b)
    }

    /// Plain matrix product; used mostly by tests and the BFGS update.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul: dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self + a * I`; panics if not square.
    pub fn add_scaled_identity(&self, a: f64) -> Matrix {
        assert_eq!(self.rows, self.cols, "add_scaled_identity: not square");
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] += a;
        }
        out
    }

    pub fn scale(&self, a: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * a).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

/// Solve `A x = b` for symmetric positive-definite `A` via an LLᵀ Cholesky
/// factorisation. Only the lower triangle of `A` is read.
///
/// Fails with [`LinAlgError::NotPositiveDefinite`] as soon as a pivot drops
/// to `1e-14` or below (this also catches NaN pivots from non-finite input).
pub fn solve_cholesky(a: &Matrix, b: &Vector) -> Result<Vector, LinAlgError> {
    let l = cholesky_factor(a)?;
    Ok(cholesky_solve_with(&l, b))
}

/// Lower Cholesky factor of `A`, or an error if `A` is not numerically SPD.
pub fn cholesky_factor(a: &Matrix) -> Result<Matrix, LinAlgError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "cholesky: matrix must be square");
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        // `!(d > PIVOT_MIN)` also rejects NaN.
        if !(d > CHOLESKY_PIVOT_MIN) {
            return Err(LinAlgError::NotPositiveDefinite { pivot: d, index: j });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solve with a precomputed lower Cholesky factor.
pub fn cholesky_solve_with(l: &Matrix, b: &Vector) -> Vector {
    let n = l.nrows();
    assert_eq!(n, b.len(), "cholesky solve: dimension mismatch");
    // Forward substitution: L y = b.
    let mut y = Vector::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    // Back substitution: Lᵀ x = y.
    let mut x = Vector::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

// ---------------------------------------------------------------------------
// Conjugate gradients
// ---------------------------------------------------------------------------

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CgResult {
    pub x: Vector,
    /// False if the iteration budget ran out before `‖r‖₂ <= tol·‖b‖₂`.
    pub converged: bool,
    pub iterations: usize,
}

/// Unpreconditioned Hestenes–Stiefel conjugate gradients for SPD systems,
/// starting from `x = 0` and stopping at `‖r‖₂ <= tol·‖b‖₂`.
pub fn solve_cg(a: &Matrix, b: &Vector, tol: f64, max_iter: usize) -> Result<CgResult, LinAlgError> {
    assert_eq!(a.nrows(), a.ncols(), "cg: matrix must be square");
    solve_cg_op(|v| a.matvec(v), b, tol, max_iter)
}

/// Operator form of [`solve_cg`]: `apply` computes `A v` for SPD `A`.
pub fn solve_cg_op(
    apply: impl Fn(&Vector) -> Vector,
    b: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<CgResult, LinAlgError> {
    let n = b.len();
    if !b.all_finite() {
        return Err(LinAlgError::NonFinite);
    }
    let bnorm = b.norm2();
    let mut x = Vector::zeros(n);
    if bnorm == 0.0 {
        return Ok(CgResult {
            x,
            converged: true,
            iterations: 0,
        });
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs_old = r.dot(&r);
    for iter in 0..max_iter {
        let ap = apply(&p);
        let p_ap = p.dot(&ap);
        if !p_ap.is_finite() {
            return Err(LinAlgError::NonFinite);
        }
        if p_ap <= 0.0 {
            // Negative or zero curvature: the operator is not SPD.
            return Err(LinAlgError::NotPositiveDefinite {
                pivot: p_ap,
                index: iter,
            });
        }
        let alpha = rs_old / p_ap;
        x = x.axpy(alpha, &p);
        r = r.axpy(-alpha, &ap);
        if !r.all_finite() {
            return Err(LinAlgError::NonFinite);
        }
        let rs_new = r.dot(&r);
        if rs_new.sqrt() <= tol * bnorm {
            return Ok(CgResult {
                x,
                converged: true,
                iterations: iter + 1,
            });
        }
        p = r.axpy(rs_new / rs_old, &p);
        rs_old = rs_new;
    }
    Ok(CgResult {
        x,
        converged: false,
        iterations: max_iter,
    })
}

// ---------------------------------------------------------------------------
// Least squares: column-pivoted QR + complete orthogonal decomposition
// ---------------------------------------------------------------------------

/// A Householder reflector `H = I − β v vᵀ` acting on coordinates
/// `offset..offset+v.len()`.
#[derive(Debug, Clone)]
struct Reflector {
    offset: usize,
    v: Vec<f64>,
    beta: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        if self.beta == 0.0 {
            return;
        }
        let seg = &mut x[self.offset..self.offset + self.v.len()];
        let s: f64 = self.v.iter().zip(seg.iter()).map(|(a, b)| a * b).sum();
        let bs = self.beta * s;
        for (xi, vi) in seg.iter_mut().zip(&self.v) {
            *xi -= bs * vi;
        }
    }
}

/// Reflector zeroing the tail of row `row` against its diagonal entry, acting
/// from the right on coordinates `{col} ∪ {tail_start..n}` (the tzrzf step of
/// the complete orthogonal decomposition).
#[derive(Debug, Clone)]
struct RowReflector {
    col: usize,
    tail_start: usize,
    /// Tail of the Householder vector; the head coordinate is fixed at 1.
    z: Vec<f64>,
    beta: f64,
}

impl RowReflector {
    fn apply(&self, x: &mut Vector) {
        if self.beta == 0.0 {
            return;
        }
        let mut s = x[self.col];
        for (k, zk) in self.z.iter().enumerate() {
            s += zk * x[self.tail_start + k];
        }
        let bs = self.beta * s;
        x[self.col] -= bs;
        for (k, zk) in self.z.iter().enumerate() {
            x[self.tail_start + k] -= bs * zk;
        }
    }
}

/// Rank-revealing factorisation of an `m × n` matrix, reusable across
/// right-hand sides: one factorisation, any number of `solve` calls.
#[derive(Debug, Clone)]
pub struct LstsqFactor {
    m: usize,
    n: usize,
    rank: usize,
    /// Upper-triangular `T` (rank × rank) after the COD step.
    t: Matrix,
    perm: Vec<usize>,
    q_reflectors: Vec<Reflector>,
    z_reflectors: Vec<RowReflector>,
}

impl LstsqFactor {
    /// Factor `A` with column-pivoted Householder QR; columns whose remaining
    /// norm falls to `1e-12·|R_00|` or below mark the numerical rank. A
    /// second sweep of reflectors from the right (on the trapezoidal part)
    /// makes minimum-norm solutions available for rank-deficient systems.
    pub fn new(a: &Matrix) -> Result<Self, LinAlgError> {
        if !a.all_finite() {
            return Err(LinAlgError::NonFinite);
        }
        let m = a.nrows();
        let n = a.ncols();
        let kmax = m.min(n);
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut q_reflectors = Vec::with_capacity(kmax);
        let mut r00 = 0.0f64;
        let mut rank = kmax;

        for k in 0..kmax {
            // Recompute remaining column norms; cheap at our scale and free of
            // the classical downdating instability.
            let mut best = k;
            let mut best_norm = 0.0f64;
            for j in k..n {
                let norm: f64 = (k..m).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>().sqrt();
                if norm > best_norm {
                    best_norm = norm;
                    best = j;
                }
            }
            if k == 0 {
                r00 = best_norm;
            }
            if best_norm <= RANK_TOL * r00 {
                rank = k;
                break;
            }
            if best != k {
                for i in 0..m {
                    let tmp = r[(i, k)];
                    r[(i, k)] = r[(i, best)];
                    r[(i, best)] = tmp;
                }
                perm.swap(k, best);
            }

            // Householder vector for column k, rows k..m.
            let x0 = r[(k, k)];
            let alpha = -x0.signum() * best_norm;
            let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|t| t * t).sum();
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            let refl = Reflector { offset: k, v, beta };

            r[(k, k)] = alpha;
            for i in (k + 1)..m {
                r[(i, k)] = 0.0;
            }
            // Apply to the trailing columns.
            let mut col = vec![0.0f64; m];
            for j in (k + 1)..n {
                for (i, c) in col.iter_mut().enumerate() {
                    *c = r[(i, j)];
                }
                refl.apply(&mut col);
                for (i, c) in col.iter().enumerate() {
                    r[(i, j)] = *c;
                }
            }
            q_reflectors.push(refl);
        }

        // Complete orthogonal decomposition: annihilate columns rank..n of the
        // upper-trapezoidal block with reflectors from the right, leaving an
        // upper-triangular rank × rank block T.
        let mut z_reflectors = Vec::new();
        if rank > 0 && rank < n {
            for i in (0..rank).rev() {
                let head = r[(i, i)];
                let tail: Vec<f64> = (rank..n).map(|j| r[(i, j)]).collect();
                let norm = (head * head + tail.iter().map(|t| t * t).sum::<f64>()).sqrt();
                if norm == 0.0 {
                    continue;
                }
                let new_head = -head.signum() * norm;
                let v0 = head - new_head;
                if v0 == 0.0 {
                    continue;
                }
                let z: Vec<f64> = tail.iter().map(|t| t / v0).collect();
                let wtw = 1.0 + z.iter().map(|t| t * t).sum::<f64>();
                let beta = 2.0 / wtw;
                let refl = RowReflector {
                    col: i,
                    tail_start: rank,
                    z,
                    beta,
                };
                // Row i becomes (new_head, 0…0); rows above get mixed.
                r[(i, i)] = new_head;
                for j in rank..n {
                    r[(i, j)] = 0.0;
                }
                let mut row = Vector::zeros(n);
                for p in 0..i {
                    for j in 0..n {
                        row[j] = r[(p, j)];
                    }
                    refl.apply(&mut row);
                    for j in 0..n {
                        r[(p, j)] = row[j];
                    }
                }
                z_reflectors.push(refl);
            }
        }

        let t = Matrix::from_fn(rank, rank, |i, j| if j >= i { r[(i, j)] } else { 0.0 });
        Ok(LstsqFactor {
            m,
            n,
            rank,
            t,
            perm,
            q_reflectors,
            z_reflectors,
        })
    }

    /// Numerical rank detected during factorisation.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Minimum-norm `x` minimising `‖A x − b‖₂` for the factored `A`.
    pub fn solve(&self, b: &Vector) -> Result<Vector, LinAlgError> {
        assert_eq!(b.len(), self.m, "lstsq solve: rhs length mismatch");
        if !b.all_finite() {
            return Err(LinAlgError::NonFinite);
        }
        if self.rank == 0 {
            return Ok(Vector::zeros(self.n));
        }
        // y = Qᵀ b.
        let mut y = b.to_vec();
        for refl in &self.q_reflectors {
            refl.apply(&mut y);
        }
        // Back substitution on T w = y[0..rank].
        let mut w = Vector::zeros(self.rank);
        for i in (0..self.rank).rev() {
            let mut s = y[i];
            for j in (i + 1)..self.rank {
                s -= self.t[(i, j)] * w[j];
            }
            w[i] = s / self.t[(i, i)];
        }
        // Lift to n coordinates and undo the right-side reflectors (applied in
        // the same order they were generated, which realises Zᵀ).
        let mut u = Vector::zeros(self.n);
        for i in 0..self.rank {
            u[i] = w[i];
        }
        for refl in self.z_reflectors.iter().rev() {
            refl.apply(&mut u);
        }
        // Undo the column permutation.
        let mut x = Vector::zeros(self.n);
        for (pos, &orig) in self.perm.iter().enumerate() {
            x[orig] = u[pos];
        }
        if !x.all_finite() {
            return Err(LinAlgError::NonFinite);
        }
        Ok(x)
    }
}

/// Minimum-norm least-squares solve: returns the `x` of smallest Euclidean
/// norm minimising `‖A x − b‖₂`. Rank deficiency is tolerated.
pub fn solve_lstsq(a: &Matrix, b: &Vector) -> Result<Vector, LinAlgError> {
    LstsqFactor::new(a)?.solve(b)
}
