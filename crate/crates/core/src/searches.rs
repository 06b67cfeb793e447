//! Searches: the scalar half of the search/descent decomposition.
//!
//! A search consumes the information at the latest proposed point (plus the
//! point it was proposed from) and produces two things: a verdict on that
//! proposal — accept or reject — and the scalar `alpha` that parametrises the
//! next one. What `alpha` *means* belongs to the descent: a line-search step
//! length for line-search descents, a trust-region radius for restricted
//! descents.
//!
//! All searches here are pure state machines: the algorithmic cores are free
//! functions mapping `(inputs, state) → (result, state)`, and the [`Search`]
//! trait wraps them in per-solve sessions so solver configurations stay
//! immutable and shareable across threads.

use crate::info::{FnInfo, InfoNeeds};
use crate::linalg::Vector;

/// Verdict on the latest proposal plus the scalar for the next one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    /// Parametrises the next proposal (step length or trust radius).
    pub alpha: f64,
    /// Whether the proposal just evaluated becomes the next iterate.
    pub accept: bool,
}

/// A search configuration. `start` opens a fresh per-solve session carrying
/// all mutable state, so one configuration value can serve many concurrent
/// solves.
pub trait Search: Send + Sync {
    /// Fields the search reads from the accepted-point `FnInfo`.
    fn needs(&self) -> InfoNeeds;

    fn start(&self) -> Box<dyn SearchState>;
}

/// Per-solve search state.
pub trait SearchState {
    /// `alpha` for the very first proposal, before any verdict exists.
    fn first_alpha(&self) -> f64;

    /// Classify the proposal that produced `info_new` (stepping by
    /// `proposed_step` from the accepted point described by `info_old`) and
    /// yield the next `alpha`.
    fn step(&mut self, info_new: &FnInfo, info_old: &FnInfo, proposed_step: &Vector)
        -> SearchResult;
}

// ---------------------------------------------------------------------------
// Learning rate
// ---------------------------------------------------------------------------

/// Fixed step scalar: always accepts and always proposes the same `alpha`.
/// Composed with a restricted descent this is a fixed trust radius; with a
/// line-search descent it is plain gradient-style stepping.
#[derive(Debug, Clone, Copy)]
pub struct LearningRate {
    rate: f64,
}

impl LearningRate {
    pub fn new(rate: f64) -> Self {
        assert!(rate.is_finite() && rate > 0.0, "learning rate must be positive");
        LearningRate { rate }
    }
}

/// One learning-rate decision: unconditionally accept, keep `alpha` fixed.
pub fn learning_rate_step(rate: f64) -> SearchResult {
    SearchResult {
        alpha: rate,
        accept: true,
    }
}

impl Search for LearningRate {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds::default()
    }

    fn start(&self) -> Box<dyn SearchState> {
        Box::new(LearningRateState { rate: self.rate })
    }
}

struct LearningRateState {
    rate: f64,
}

impl SearchState for LearningRateState {
    fn first_alpha(&self) -> f64 {
        self.rate
    }

    fn step(&mut self, _new: &FnInfo, _old: &FnInfo, _step: &Vector) -> SearchResult {
        learning_rate_step(self.rate)
    }
}

// ---------------------------------------------------------------------------
// Backtracking Armijo
// ---------------------------------------------------------------------------

/// State of the backtracking line search: the step size that produced the
/// current proposal and whether the sufficient-decrease condition held for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoState {
    pub step_size: f64,
    pub satisfied: bool,
}

impl Default for ArmijoState {
    fn default() -> Self {
        // The first proposal takes a full step.
        ArmijoState {
            step_size: 1.0,
            satisfied: true,
        }
    }
}

/// One backtracking-Armijo decision.
///
/// The proposal is accepted iff the sufficient-decrease condition
/// `f(x + δ) ≤ f(x) + slope·δᵀ∇f(x)` holds (non-finite `f(x + δ)` counts as
/// a violation). On acceptance the step size resets to 1; on rejection it
/// shrinks geometrically by `backtrack`.
pub fn armijo_step(
    info_new: &FnInfo,
    info_old: &FnInfo,
    proposed_step: &Vector,
    state: &ArmijoState,
    backtrack: f64,
    slope: f64,
) -> (SearchResult, ArmijoState) {
    let f_old = info_old.objective();
    let f_new = info_new.objective();
    let directional = proposed_step.dot(info_old.gradient());
    let satisfied = f_new.is_finite() && f_new <= f_old + slope * directional;
    let alpha = if satisfied {
        1.0
    } else {
        backtrack * state.step_size
    };
    (
        SearchResult {
            alpha,
            accept: satisfied,
        },
        ArmijoState {
            step_size: alpha,
            satisfied,
        },
    )
}

/// Backtracking Armijo line search.
#[derive(Debug, Clone, Copy)]
pub struct BacktrackingArmijo {
    /// Geometric shrink factor applied on rejection.
    backtrack: f64,
    /// Sufficient-decrease slope coefficient.
    slope: f64,
}

impl BacktrackingArmijo {
    pub fn new(backtrack: f64, slope: f64) -> Self {
        assert!(
            backtrack > 0.0 && backtrack < 1.0,
            "backtrack factor must lie in (0, 1)"
        );
        assert!(slope > 0.0 && slope < 1.0, "slope factor must lie in (0, 1)");
        BacktrackingArmijo { backtrack, slope }
    }
}

impl Default for BacktrackingArmijo {
    fn default() -> Self {
        BacktrackingArmijo::new(0.5, 1e-4)
    }
}

impl Search for BacktrackingArmijo {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds {
            value: true,
            grad: true,
            quadratic: false,
        }
    }

    fn start(&self) -> Box<dyn SearchState> {
        Box::new(ArmijoSession {
            cfg: *self,
            state: ArmijoState::default(),
        })
    }
}

struct ArmijoSession {
    cfg: BacktrackingArmijo,
    state: ArmijoState,
}

impl SearchState for ArmijoSession {
    fn first_alpha(&self) -> f64 {
        self.state.step_size
    }

    fn step(&mut self, info_new: &FnInfo, info_old: &FnInfo, step: &Vector) -> SearchResult {
        let (result, next) = armijo_step(
            info_new,
            info_old,
            step,
            &self.state,
            self.cfg.backtrack,
            self.cfg.slope,
        );
        self.state = next;
        result
    }
}

// ---------------------------------------------------------------------------
// Trust regions
// ---------------------------------------------------------------------------

/// Trust-region state: current radius and the reduction ratio of the last
/// classified proposal (`−∞` when the prediction was unusable).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionState {
    pub radius: f64,
    pub ratio: f64,
}

/// Shared radius-update rule for both trust-region flavours.
///
/// With `ρ = (f(x) − f(x+δ)) / predicted_reduction`:
/// grow the radius by `grow` when `ρ > high_cutoff`, keep it when
/// `low_cutoff < ρ ≤ high_cutoff`, shrink by `shrink` when `ρ ≤ low_cutoff`.
/// The proposal is accepted iff `ρ > low_cutoff`. A non-positive or
/// non-finite `predicted_reduction`, or a non-finite `f(x+δ)`, counts as
/// `ρ = −∞`: reject and shrink.
pub fn trust_region_classify(
    f_old: f64,
    f_new: f64,
    predicted_reduction: f64,
    state: &TrustRegionState,
    shrink: f64,
    grow: f64,
    low_cutoff: f64,
    high_cutoff: f64,
) -> (SearchResult, TrustRegionState) {
    let ratio = if predicted_reduction > 0.0 && f_new.is_finite() {
        (f_old - f_new) / predicted_reduction
    } else {
        f64::NEG_INFINITY
    };
    let radius = if ratio > high_cutoff {
        grow * state.radius
    } else if ratio > low_cutoff {
        state.radius
    } else {
        shrink * state.radius
    };
    (
        SearchResult {
            alpha: radius,
            accept: ratio > low_cutoff,
        },
        TrustRegionState { radius, ratio },
    )
}

/// One classical (quadratic-model) trust-region decision. The caller supplies
/// `predicted_reduction = m(0) − m(δ)` of the quadratic model at the accepted
/// point.
pub fn classical_trust_region_step(
    info_new: &FnInfo,
    info_old: &FnInfo,
    _proposed_step: &Vector,
    predicted_reduction: f64,
    state: &TrustRegionState,
    shrink: f64,
    grow: f64,
    low_cutoff: f64,
    high_cutoff: f64,
) -> (SearchResult, TrustRegionState) {
    trust_region_classify(
        info_old.objective(),
        info_new.objective(),
        predicted_reduction,
        state,
        shrink,
        grow,
        low_cutoff,
        high_cutoff,
    )
}

/// One linear-model trust-region decision; `predicted_reduction = −gᵀδ`.
pub fn linear_trust_region_step(
    info_new: &FnInfo,
    info_old: &FnInfo,
    _proposed_step: &Vector,
    predicted_reduction: f64,
    state: &TrustRegionState,
    shrink: f64,
    grow: f64,
    low_cutoff: f64,
    high_cutoff: f64,
) -> (SearchResult, TrustRegionState) {
    trust_region_classify(
        info_old.objective(),
        info_new.objective(),
        predicted_reduction,
        state,
        shrink,
        grow,
        low_cutoff,
        high_cutoff,
    )
}

#[derive(Debug, Clone, Copy)]
struct TrustRegionParams {
    shrink: f64,
    grow: f64,
    low_cutoff: f64,
    high_cutoff: f64,
    initial_radius: f64,
}

impl Default for TrustRegionParams {
    fn default() -> Self {
        TrustRegionParams {
            shrink: 0.25,
            grow: 2.0,
            low_cutoff: 0.01,
            high_cutoff: 0.99,
            initial_radius: 1.0,
        }
    }
}

impl TrustRegionParams {
    fn validate(&self) {
        assert!(self.shrink > 0.0 && self.shrink < 1.0, "shrink must lie in (0, 1)");
        assert!(self.grow > 1.0, "grow must exceed 1");
        assert!(
            self.low_cutoff < self.high_cutoff,
            "cutoffs must satisfy low < high"
        );
        assert!(self.initial_radius > 0.0, "initial radius must be positive");
    }
}

/// Classical trust region over the local quadratic model.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalTrustRegion {
    params: TrustRegionParams,
}

impl ClassicalTrustRegion {
    pub fn new(shrink: f64, grow: f64, low_cutoff: f64, high_cutoff: f64) -> Self {
        let params = TrustRegionParams {
            shrink,
            grow,
            low_cutoff,
            high_cutoff,
            ..TrustRegionParams::default()
        };
        params.validate();
        ClassicalTrustRegion { params }
    }

    pub fn with_initial_radius(mut self, radius: f64) -> Self {
        self.params.initial_radius = radius;
        self.params.validate();
        self
    }
}

impl Default for ClassicalTrustRegion {
    fn default() -> Self {
        ClassicalTrustRegion {
            params: TrustRegionParams::default(),
        }
    }
}

impl Search for ClassicalTrustRegion {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds {
            value: true,
            grad: true,
            quadratic: true,
        }
    }

    fn start(&self) -> Box<dyn SearchState> {
        Box::new(TrustRegionSession {
            params: self.params,
            quadratic: true,
            state: TrustRegionState {
                radius: self.params.initial_radius,
                ratio: 0.0,
            },
        })
    }
}

/// Trust region over the local linear model — usable with purely first-order
/// information.
#[derive(Debug, Clone, Copy)]
pub struct LinearTrustRegion {
    params: TrustRegionParams,
}

impl LinearTrustRegion {
    pub fn new(shrink: f64, grow: f64, low_cutoff: f64, high_cutoff: f64) -> Self {
        let params = TrustRegionParams {
            shrink,
            grow,
            low_cutoff,
            high_cutoff,
            ..TrustRegionParams::default()
        };
        params.validate();
        LinearTrustRegion { params }
    }

    pub fn with_initial_radius(mut self, radius: f64) -> Self {
        self.params.initial_radius = radius;
        self.params.validate();
        self
    }
}

impl Default for LinearTrustRegion {
    fn default() -> Self {
        LinearTrustRegion {
            params: TrustRegionParams::default(),
        }
    }
}

impl Search for LinearTrustRegion {
    fn needs(&self) -> InfoNeeds {
        InfoNeeds {
            value: true,
            grad: true,
            quadratic: false,
        }
    }

    fn start(&self) -> Box<dyn SearchState> {
        Box::new(TrustRegionSession {
            params: self.params,
            quadratic: false,
            state: TrustRegionState {
                radius: self.params.initial_radius,
                ratio: 0.0,
            },
        })
    }
}

struct TrustRegionSession {
    params: TrustRegionParams,
    quadratic: bool,
    state: TrustRegionState,
}

impl SearchState for TrustRegionSession {
    fn first_alpha(&self) -> f64 {
        self.state.radius
    }

    fn step(&mut self, info_new: &FnInfo, info_old: &FnInfo, step: &Vector) -> SearchResult {
        let predicted = if self.quadratic {
            info_old.quadratic_model_reduction(step)
        } else {
            info_old.linear_model_reduction(step)
        };
        let p = self.params;
        let (result, next) = trust_region_classify(
            info_old.objective(),
            info_new.objective(),
            predicted,
            &self.state,
            p.shrink,
            p.grow,
            p.low_cutoff,
            p.high_cutoff,
        );
        self.state = next;
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::Hessian;
    use crate::linalg::Matrix;

    fn scalar_info(value: f64, grad: &[f64]) -> FnInfo {
        FnInfo::new()
            .with_value(value)
            .with_grad(Vector::from(grad))
    }

    #[test]
    fn learning_rate_always_accepts_with_fixed_alpha() {
        let mut s = LearningRate::new(0.1).start();
        assert_eq!(s.first_alpha(), 0.1);
        // Even a catastrophic increase is accepted: the verdict never
        // depends on the values.
        let worse = scalar_info(1e6, &[0.0]);
        let old = scalar_info(0.0, &[1.0]);
        let r = s.step(&worse, &old, &Vector::from([1.0]));
        assert!(r.accept);
        assert_eq!(r.alpha, 0.1);
    }

    #[test]
    fn armijo_accepts_sufficient_decrease() {
        // f(x) = x² at x = 1: f = 1, ∇f = 2. Step δ = −0.5 gives f(0.5) =
        // 0.25 and threshold 1 + 0.1·(−0.5·2) = 0.9: accepted, alpha resets.
        let old = scalar_info(1.0, &[2.0]);
        let new = scalar_info(0.25, &[1.0]);
        let state = ArmijoState {
            step_size: 0.5,
            satisfied: false,
        };
        let (r, next) = armijo_step(&new, &old, &Vector::from([-0.5]), &state, 0.5, 0.1);
        assert!(r.accept);
        assert_eq!(r.alpha, 1.0);
        assert!(next.satisfied);
        assert_eq!(next.step_size, 1.0);
    }

    #[test]
    fn armijo_shrinks_geometrically_on_rejection() {
        // No decrease at all: rejected, and the new alpha is c·(previous
        // step size) = 0.5·0.5 = 0.25.
        let old = scalar_info(1.0, &[2.0]);
        let new = scalar_info(1.0, &[2.0]);
        let state = ArmijoState {
            step_size: 0.5,
            satisfied: false,
        };
        let (r, next) = armijo_step(&new, &old, &Vector::from([-0.5]), &state, 0.5, 1e-4);
        assert!(!r.accept);
        assert!((r.alpha - 0.25).abs() < 1e-15);
        assert_eq!(next.step_size, r.alpha);

        // Driving a session through consecutive rejections yields cⁿ.
        let mut s = BacktrackingArmijo::default().start();
        let mut alphas = Vec::new();
        for _ in 0..4 {
            let r = s.step(&new, &old, &Vector::from([-0.5]));
            assert!(!r.accept);
            alphas.push(r.alpha);
        }
        assert_eq!(alphas, vec![0.5, 0.25, 0.125, 0.0625]);
    }

    #[test]
    fn armijo_zero_step_equal_values_accepts() {
        // δ = 0 and f unchanged: the condition holds with equality.
        let old = scalar_info(2.0, &[0.0]);
        let new = scalar_info(2.0, &[0.0]);
        let (r, _) = armijo_step(
            &new,
            &old,
            &Vector::zeros(1),
            &ArmijoState::default(),
            0.5,
            1e-4,
        );
        assert!(r.accept);
    }

    #[test]
    fn armijo_rejects_non_finite_value() {
        let old = scalar_info(1.0, &[2.0]);
        let new = scalar_info(f64::NAN, &[0.0]);
        let (r, next) = armijo_step(
            &new,
            &old,
            &Vector::from([-1.0]),
            &ArmijoState::default(),
            0.5,
            1e-4,
        );
        assert!(!r.accept);
        assert_eq!(r.alpha, 0.5);
        assert!(!next.satisfied);
    }

    #[test]
    fn trust_region_perfect_model_grows_radius() {
        // Exact quadratic: predicted reduction 0.5, actual reduction 0.5,
        // ρ = 1 > 0.99 → accept and double the radius.
        let old = scalar_info(1.0, &[1.0, 0.0]).with_hessian(Hessian::Direct(Matrix::identity(2)));
        let new = scalar_info(0.5, &[0.0, 0.0]);
        let state = TrustRegionState {
            radius: 1.0,
            ratio: 0.0,
        };
        let step = Vector::from([-1.0, 0.0]);
        let pred = old.quadratic_model_reduction(&step);
        assert!((pred - 0.5).abs() < 1e-15);
        let (r, next) =
            classical_trust_region_step(&new, &old, &step, pred, &state, 0.25, 2.0, 0.01, 0.99);
        assert!(r.accept);
        assert_eq!(r.alpha, 2.0);
        assert!((next.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trust_region_middling_ratio_keeps_radius() {
        // ρ = 0.5: accept, radius unchanged.
        let old = scalar_info(1.0, &[1.0]).with_hessian(Hessian::Direct(Matrix::identity(1)));
        let state = TrustRegionState {
            radius: 0.8,
            ratio: 0.0,
        };
        let (r, next) = trust_region_classify(1.0, 0.75, 0.5, &state, 0.25, 2.0, 0.01, 0.99);
        let _ = old;
        assert!(r.accept);
        assert_eq!(r.alpha, 0.8);
        assert!((next.ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn trust_region_poor_ratio_rejects_and_shrinks() {
        // The objective increased: ρ < 0 → reject, radius ×0.25.
        let state = TrustRegionState {
            radius: 1.0,
            ratio: 0.0,
        };
        let (r, _) = trust_region_classify(1.0, 1.1, 0.5, &state, 0.25, 2.0, 0.01, 0.99);
        assert!(!r.accept);
        assert_eq!(r.alpha, 0.25);
    }

    #[test]
    fn trust_region_nonpositive_prediction_rejects() {
        let state = TrustRegionState {
            radius: 1.0,
            ratio: 0.0,
        };
        for pred in [0.0, -1.0, f64::NAN] {
            let (r, next) = trust_region_classify(1.0, 0.5, pred, &state, 0.25, 2.0, 0.01, 0.99);
            assert!(!r.accept, "pred = {pred} must reject");
            assert_eq!(r.alpha, 0.25);
            assert_eq!(next.ratio, f64::NEG_INFINITY);
        }
    }

    #[test]
    fn trust_region_non_finite_value_rejects() {
        let state = TrustRegionState {
            radius: 2.0,
            ratio: 0.0,
        };
        let (r, _) = trust_region_classify(1.0, f64::INFINITY, 0.5, &state, 0.25, 2.0, 0.01, 0.99);
        assert!(!r.accept);
        assert_eq!(r.alpha, 0.5);
    }

    #[test]
    fn trust_region_boundary_ratio_at_low_cutoff_rejects() {
        // ρ == low_cutoff is `≤`, not `<`: reject and shrink. All values
        // here are exactly representable so the ratio is exactly 0.25.
        let state = TrustRegionState {
            radius: 1.0,
            ratio: 0.0,
        };
        let (r, _) = trust_region_classify(1.0, 0.75, 1.0, &state, 0.5, 2.0, 0.25, 0.99);
        assert!(!r.accept);
        assert_eq!(r.alpha, 0.5);
    }

    #[test]
    fn linear_trust_region_uses_first_order_model() {
        // g = (1, 0), δ = (−0.5, 0): predicted = 0.5; actual drop 0.4 →
        // ρ = 0.8: accept, radius unchanged.
        let old = scalar_info(1.0, &[1.0, 0.0]);
        let new = scalar_info(0.6, &[0.5, 0.0]);
        let step = Vector::from([-0.5, 0.0]);
        let pred = old.linear_model_reduction(&step);
        assert!((pred - 0.5).abs() < 1e-15);
        let state = TrustRegionState {
            radius: 1.0,
            ratio: 0.0,
        };
        let (r, next) =
            linear_trust_region_step(&new, &old, &step, pred, &state, 0.25, 2.0, 0.01, 0.99);
        assert!(r.accept);
        assert_eq!(r.alpha, 1.0);
        assert!((next.ratio - 0.8).abs() < 1e-12);
    }
}
