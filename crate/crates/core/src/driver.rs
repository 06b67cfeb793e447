//! The step-rejection iteration driver.
//!
//! One flat loop runs every composed solver: propose a step, evaluate the
//! information policy at the proposed point (exactly one user-function call),
//! let the search classify the proposal, and either commit it or retry from
//! the last accepted iterate with the search's new scalar. There is no inner
//! line-search loop — a rejected proposal simply becomes the next iteration —
//! which is what keeps the evaluation count exact: `fn_evals` is always
//! `accepted + rejected + 1`.

use crate::diff;
use crate::info::{FnInfo, Hessian};
use crate::linalg::Vector;
use crate::problem::{
    cauchy_termination, Problem, ProblemFns, Solution, SolveResult, SolveStats, TerminationConfig,
};
use crate::solvers::{bfgs_update, BfgsState, ComposedSolver, InfoPolicy};

/// Hard floor on the search scalar: a search that shrinks `alpha` below this
/// is declared stalled rather than looping to the iteration budget.
const ALPHA_FLOOR: f64 = 1e-12;

/// Counts user-function work while producing policy-shaped [`FnInfo`]s.
struct Evaluator<'p> {
    problem: &'p Problem,
    fn_evals: usize,
    grad_evals: usize,
}

impl<'p> Evaluator<'p> {
    fn new(problem: &'p Problem) -> Self {
        Evaluator {
            problem,
            fn_evals: 0,
            grad_evals: 0,
        }
    }

    /// Evaluate whatever `policy` wants at `x`. The objective (or residual
    /// map) is called exactly once per invocation; derivative callables and
    /// finite-difference sweeps are tallied separately as `grad_evals`.
    fn info_at(&mut self, policy: InfoPolicy, x: &Vector, bfgs: Option<&BfgsState>) -> FnInfo {
        match &self.problem.fns {
            ProblemFns::Scalar { f, grad } => {
                self.fn_evals += 1;
                let value = f(x);
                self.grad_evals += 1;
                let g = match grad {
                    Some(g) => g(x),
                    None => diff::gradient(|p| f(p), x),
                };
                let mut info = FnInfo::new().with_value(value).with_grad(g);
                match policy {
                    InfoPolicy::GradientOnly => {}
                    InfoPolicy::GradientPlusBfgs { .. } => {
                        let state = bfgs.expect("BFGS policy requires a BFGS state");
                        info = info.with_hessian(state.as_hessian());
                    }
                    InfoPolicy::GradientPlusTrueHessian => {
                        let gfun = |p: &Vector| match grad {
                            Some(g) => g(p),
                            None => diff::gradient(|q| f(q), p),
                        };
                        let h = diff::hessian_of_grad(gfun, x);
                        info = info.with_hessian(Hessian::Direct(h));
                    }
                    InfoPolicy::ResidualJacobian => {
                        unreachable!("dispatch never pairs residual policies with scalar problems")
                    }
                }
                info
            }
            ProblemFns::Vector { f, jac } => {
                self.fn_evals += 1;
                let r = f(x);
                self.problem.note_dim_out(r.len());
                self.grad_evals += 1;
                let j = match jac {
                    Some(jf) => jf(x),
                    None => diff::jacobian(|p| f(p), x),
                };
                // Least-squares objective and its gradient come free with
                // (r, J): f = Σrᵢ², ∇f = 2Jᵀr.
                let value = r.dot(&r);
                let grad = j.t_matvec(&r).scale(2.0);
                let mut info = FnInfo::new().with_value(value).with_grad(grad);
                match policy {
                    InfoPolicy::GradientOnly => {}
                    InfoPolicy::ResidualJacobian => {
                        info = info.with_residual(r).with_jacobian(j);
                    }
                    InfoPolicy::GradientPlusBfgs { .. } => {
                        let state = bfgs.expect("BFGS policy requires a BFGS state");
                        info = info.with_hessian(state.as_hessian());
                    }
                    InfoPolicy::GradientPlusTrueHessian => {
                        let gfun = |p: &Vector| {
                            let rp = f(p);
                            let jp = match jac {
                                Some(jf) => jf(p),
                                None => diff::jacobian(|q| f(q), p),
                            };
                            jp.t_matvec(&rp).scale(2.0)
                        };
                        let h = diff::hessian_of_grad(gfun, x);
                        info = info.with_hessian(Hessian::Direct(h));
                    }
                }
                info
            }
        }
    }
}

/// Run a composed solver from `x0` until the Cauchy test passes on an
/// accepted step, the proposal budget runs out, or the solve breaks down.
///
/// Rejected proposals retry from the last accepted iterate and never enter
/// the termination test; the test is likewise never applied at the initial
/// point, so a solve reports `Converged` only after at least one accepted
/// step.
pub fn iterate(
    problem: &Problem,
    solver: &ComposedSolver,
    x0: &Vector,
    cfg: &TerminationConfig,
) -> Solution {
    assert_eq!(
        x0.len(),
        problem.dim_in(),
        "initial point has length {}, problem expects {}",
        x0.len(),
        problem.dim_in()
    );
    let policy = solver.policy();
    let mut evaluator = Evaluator::new(problem);
    let mut bfgs = match policy {
        InfoPolicy::GradientPlusBfgs { use_inverse } => {
            Some(BfgsState::identity(x0.len(), use_inverse))
        }
        _ => None,
    };

    let mut x_curr = x0.clone();
    let mut info_curr = evaluator.info_at(policy, &x_curr, bfgs.as_ref());

    let mut iterations = 0usize;
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    let result = 'solve: {
        if !x_curr.all_finite() || !info_curr.objective().is_finite() {
            break 'solve SolveResult::NonFiniteEncountered;
        }
        let mut search = solver.search().start();
        let mut descent = solver.descent().start();
        if descent.at_iterate(&info_curr).is_err() {
            break 'solve SolveResult::LinearSolveFailed;
        }
        let mut alpha = search.first_alpha();
        // Whether the current rejection streak has seen a non-finite value —
        // distinguishes "shrank into the floor fleeing an overflow" from a
        // plain stall.
        let mut streak_non_finite = false;

        loop {
            if iterations >= cfg.max_iters {
                break 'solve SolveResult::MaxItersReached;
            }
            if !(alpha >= ALPHA_FLOOR) {
                break 'solve if streak_non_finite {
                    SolveResult::NonFiniteEncountered
                } else {
                    SolveResult::MaxItersReached
                };
            }
            let step = match descent.step(alpha) {
                Ok(s) => s,
                Err(_) => break 'solve SolveResult::LinearSolveFailed,
            };
            iterations += 1;
            let x_prop = &x_curr + &step;
            let mut info_prop = evaluator.info_at(policy, &x_prop, bfgs.as_ref());
            let verdict = search.step(&info_prop, &info_curr, &step);
            // A proposal too small to move the iterate — `x + αd` rounds back
            // to `x` in every component — is invisible to the search: the
            // objective is bitwise unchanged while a strict sufficient-decrease
            // bound keeps rejecting it, and no smaller `α` can yield a
            // different point. That iterate is converged to attainable
            // precision, so commit the no-op step and let the Cauchy test
            // conclude.
            if verdict.accept || x_prop == x_curr {
                accepted += 1;
                // Searches that accept unconditionally can commit to garbage;
                // catch it here so `x_curr` stays the last finite iterate.
                if !x_prop.all_finite() || !info_prop.objective().is_finite() {
                    break 'solve SolveResult::NonFiniteEncountered;
                }
                if let Some(state) = &bfgs {
                    let y = info_prop.gradient() - info_curr.gradient();
                    let next = bfgs_update(state, &step, &y);
                    // The committed iterate carries the refreshed model: the
                    // next proposals and ratio tests all see the same matrix.
                    info_prop.hessian = Some(next.as_hessian());
                    bfgs = Some(next);
                }
                let converged = cauchy_termination(
                    &x_curr,
                    &x_prop,
                    info_curr.objective(),
                    info_prop.objective(),
                    cfg,
                );
                x_curr = x_prop;
                info_curr = info_prop;
                streak_non_finite = false;
                if converged {
                    break 'solve SolveResult::Converged;
                }
                if descent.at_iterate(&info_curr).is_err() {
                    break 'solve SolveResult::LinearSolveFailed;
                }
            } else {
                rejected += 1;
                streak_non_finite = streak_non_finite || !info_prop.objective().is_finite();
            }
            alpha = verdict.alpha;
        }
    };

    Solution {
        fval: info_curr.objective(),
        residual: info_curr.residual.clone(),
        value: x_curr,
        result,
        stats: SolveStats {
            iterations,
            fn_evals: evaluator.fn_evals,
            grad_evals: evaluator.grad_evals,
            accepted_steps: accepted,
            rejected_steps: rejected,
            root_residual_norm: None,
        },
        lowering: problem.chain().to_vec(),
    }
}

/// Drive a vector-to-vector update map `next = step(x)` under the Cauchy
/// test, using `defect` as the scalar whose decrease the f-criterion
/// monitors. Shared by the classical Newton/chord, bisection, and
/// fixed-point drivers, which have no search/descent structure.
pub(crate) fn run_simple<E, F>(
    x0: &Vector,
    cfg: &TerminationConfig,
    mut step: F,
    defect0: f64,
) -> (Vector, f64, SolveResult, usize)
where
    F: FnMut(&Vector) -> Result<(Vector, f64), E>,
    E: Into<SolveResult>,
{
    let mut x = x0.clone();
    let mut defect = defect0;
    if !x.all_finite() || !defect.is_finite() {
        return (x, defect, SolveResult::NonFiniteEncountered, 0);
    }
    for iteration in 1..=cfg.max_iters {
        let (x_next, defect_next) = match step(&x) {
            Ok(pair) => pair,
            Err(e) => return (x, defect, e.into(), iteration - 1),
        };
        if !x_next.all_finite() || !defect_next.is_finite() {
            return (x, defect, SolveResult::NonFiniteEncountered, iteration);
        }
        let converged = cauchy_termination(&x, &x_next, defect, defect_next, cfg);
        x = x_next;
        defect = defect_next;
        if converged {
            return (x, defect, SolveResult::Converged, iteration);
        }
    }
    (x, defect, SolveResult::MaxItersReached, cfg.max_iters)
}
