//! The information packet exchanged between the driver, searches and
//! descents.
//!
//! Solvers in this crate are compositions over a shared vocabulary: at each
//! evaluated point the driver assembles an [`FnInfo`] — whatever mix of
//! value, gradient, residual, Jacobian and (approximate) Hessian the solver's
//! information policy produces — and searches/descents consume only the
//! fields they declared a need for. That keeps every search compatible with
//! every descent whose inputs are available, which is the point of the
//! decomposition.

use crate::linalg::{
    cholesky_factor, cholesky_solve_with, solve_cholesky, solve_lstsq, LinAlgError, Matrix, Vector,
};

/// A Hessian approximation, tagged by whether the matrix stored is `B ≈ ∇²f`
/// or its inverse. Storing the inverse lets quasi-Newton methods trade a
/// linear solve per step for a matrix-vector product.
#[derive(Debug, Clone)]
pub enum Hessian {
    Direct(Matrix),
    Inverse(Matrix),
}

impl Hessian {
    pub fn matrix(&self) -> &Matrix {
        match self {
            Hessian::Direct(m) | Hessian::Inverse(m) => m,
        }
    }

    pub fn is_inverse(&self) -> bool {
        matches!(self, Hessian::Inverse(_))
    }
}

/// What a search or descent reads from an [`FnInfo`]. Solver construction
/// checks these needs against what the chosen information policy produces, so
/// an incompatible composition fails before the first function evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InfoNeeds {
    /// Requires the objective value.
    pub value: bool,
    /// Requires the gradient.
    pub grad: bool,
    /// Requires some quadratic-model source: a Hessian (exact or
    /// approximate) or a residual Jacobian.
    pub quadratic: bool,
}

impl InfoNeeds {
    /// Union of two requirement sets.
    pub fn union(self, other: InfoNeeds) -> InfoNeeds {
        InfoNeeds {
            value: self.value || other.value,
            grad: self.grad || other.grad,
            quadratic: self.quadratic || other.quadratic,
        }
    }
}

/// Local information about the objective at a single point.
///
/// At least one field is populated; which ones depends on the solver's
/// information policy. `grad` and `value` are always filled in by the
/// built-in policies (derived from the residual and Jacobian when the
/// underlying problem is residual-based, at no extra user-function calls).
#[derive(Debug, Clone, Default)]
pub struct FnInfo {
    /// Objective value `f(x)` (residual sum of squares for residual-based
    /// problems).
    pub value: Option<f64>,
    /// Gradient `∇f(x)`.
    pub grad: Option<Vector>,
    /// Residual vector `r(x)`.
    pub residual: Option<Vector>,
    /// Jacobian of the residual map.
    pub jacobian: Option<Matrix>,
    /// Hessian or Hessian-inverse approximation.
    pub hessian: Option<Hessian>,
}

impl FnInfo {
    pub fn new() -> Self {
        FnInfo::default()
    }

    pub fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn with_grad(mut self, g: Vector) -> Self {
        self.grad = Some(g);
        self
    }

    pub fn with_residual(mut self, r: Vector) -> Self {
        self.residual = Some(r);
        self
    }

    pub fn with_jacobian(mut self, j: Matrix) -> Self {
        self.jacobian = Some(j);
        self
    }

    pub fn with_hessian(mut self, h: Hessian) -> Self {
        self.hessian = Some(h);
        self
    }

    /// Objective value, deriving `‖r‖²` from the residual if no scalar value
    /// was stored.
    pub fn objective(&self) -> f64 {
        if let Some(v) = self.value {
            return v;
        }
        if let Some(r) = &self.residual {
            return r.dot(r);
        }
        panic!("FnInfo carries neither a value nor a residual");
    }

    /// Gradient reference; the built-in policies always populate it.
    pub fn gradient(&self) -> &Vector {
        self.grad
            .as_ref()
            .expect("FnInfo has no gradient; the information policy must supply one")
    }

    fn quadratic_fields(&self) -> QuadraticSource<'_> {
        if let (Some(r), Some(j)) = (&self.residual, &self.jacobian) {
            QuadraticSource::ResidualJacobian(r, j)
        } else if let Some(h) = &self.hessian {
            QuadraticSource::Hessian(h)
        } else {
            QuadraticSource::None
        }
    }

    /// Full Newton/Gauss–Newton point `p` solving the local quadratic model:
    /// `−H⁻¹g` for Hessian-carrying info, the least-squares step `argmin_p
    /// ‖J p + r‖₂` for residual-based info.
    pub fn newton_point(&self) -> Result<Vector, LinAlgError> {
        match self.quadratic_fields() {
            QuadraticSource::ResidualJacobian(r, j) => solve_lstsq(j, &-r),
            QuadraticSource::Hessian(Hessian::Direct(h)) => {
                solve_cholesky(h, &-self.gradient())
            }
            QuadraticSource::Hessian(Hessian::Inverse(hinv)) => {
                Ok(-&hinv.matvec(self.gradient()))
            }
            QuadraticSource::None => panic!(
                "FnInfo carries no quadratic-model fields; composition validation should \
                 have rejected this descent"
            ),
        }
    }

    /// Hessian–vector product `H v` under whatever representation is stored
    /// (a linear solve for inverse-form Hessians, `2JᵀJv` for residual info).
    pub fn hess_vec(&self, v: &Vector) -> Result<Vector, LinAlgError> {
        match self.quadratic_fields() {
            QuadraticSource::ResidualJacobian(_, j) => Ok(j.t_matvec(&j.matvec(v)).scale(2.0)),
            QuadraticSource::Hessian(Hessian::Direct(h)) => Ok(h.matvec(v)),
            QuadraticSource::Hessian(Hessian::Inverse(hinv)) => solve_cholesky(hinv, v),
            QuadraticSource::None => panic!(
                "FnInfo carries no quadratic-model fields; composition validation should \
                 have rejected this descent"
            ),
        }
    }

    /// Materialise the model Hessian as an explicit matrix (`2JᵀJ` for
    /// residual info; inverse-form Hessians are inverted column by column).
    pub fn hessian_matrix(&self) -> Result<Matrix, LinAlgError> {
        match self.quadratic_fields() {
            QuadraticSource::ResidualJacobian(_, j) => Ok(j.ata().scale(2.0)),
            QuadraticSource::Hessian(Hessian::Direct(h)) => Ok(h.clone()),
            QuadraticSource::Hessian(Hessian::Inverse(hinv)) => {
                let n = hinv.nrows();
                let l = cholesky_factor(hinv)?;
                let mut out = Matrix::zeros(n, n);
                let mut e = Vector::zeros(n);
                for j in 0..n {
                    e[j] = 1.0;
                    let col = cholesky_solve_with(&l, &e);
                    e[j] = 0.0;
                    for i in 0..n {
                        out[(i, j)] = col[i];
                    }
                }
                // The inverse of a symmetric matrix is symmetric; enforce it
                // against rounding drift.
                Ok(Matrix::from_fn(n, n, |i, j| {
                    0.5 * (out[(i, j)] + out[(j, i)])
                }))
            }
            QuadraticSource::None => panic!(
                "FnInfo carries no quadratic-model fields; composition validation should \
                 have rejected this descent"
            ),
        }
    }

    /// Predicted reduction `m(0) − m(δ) = −(gᵀδ + ½·δᵀHδ)` of the local
    /// quadratic model. NaN when the required fields are missing or the
    /// Hessian product fails — callers treat a non-positive prediction as a
    /// rejected step.
    pub fn quadratic_model_reduction(&self, step: &Vector) -> f64 {
        let Some(g) = &self.grad else {
            return f64::NAN;
        };
        let Ok(hs) = self.hess_vec(step) else {
            return f64::NAN;
        };
        -(g.dot(step) + 0.5 * step.dot(&hs))
    }

    /// Predicted reduction `−gᵀδ` of the local linear model.
    pub fn linear_model_reduction(&self, step: &Vector) -> f64 {
        match &self.grad {
            Some(g) => -g.dot(step),
            None => f64::NAN,
        }
    }

    /// Check the structural invariants: at least one populated field,
    /// dimensional consistency against the input dimension, and symmetry of
    /// any stored Hessian (within `1e-8` max-norm).
    pub fn validate(&self, dim_in: usize) -> Result<(), String> {
        if self.value.is_none()
            && self.grad.is_none()
            && self.residual.is_none()
            && self.jacobian.is_none()
            && self.hessian.is_none()
        {
            return Err("no fields populated".into());
        }
        if let Some(g) = &self.grad {
            if g.len() != dim_in {
                return Err(format!("gradient length {} != {}", g.len(), dim_in));
            }
        }
        if let (Some(r), Some(j)) = (&self.residual, &self.jacobian) {
            if j.nrows() != r.len() || j.ncols() != dim_in {
                return Err(format!(
                    "jacobian {}×{} inconsistent with residual length {} and input dim {}",
                    j.nrows(),
                    j.ncols(),
                    r.len(),
                    dim_in
                ));
            }
        }
        if let Some(h) = &self.hessian {
            let m = h.matrix();
            if m.nrows() != dim_in || m.ncols() != dim_in {
                return Err(format!("hessian {}×{} != {dim_in}²", m.nrows(), m.ncols()));
            }
            if m.all_finite() && !m.is_symmetric(1e-8) {
                return Err("hessian not symmetric within 1e-8".into());
            }
        }
        Ok(())
    }
}

enum QuadraticSource<'a> {
    ResidualJacobian(&'a Vector, &'a Matrix),
    Hessian(&'a Hessian),
    None,
}
