//! Inner primal-dual solver for `max_{μ ∈ M} min_{y ∈ Y} L(μ, y)`.
//!
//! `M` is the nonnegative orthant on the inequality block and free on the
//! equality block. Two variants are provided:
//!
//! - [`MaxMinMode::Accelerated`]: Nesterov momentum on the dual variable,
//!   `μ_{t+½} = μ_t + (t−1)/(t+2) (μ_t − μ_{t−1})` with `μ_{−1} = μ_0`, followed
//!   by `T_y` projected gradient steps in `y` and one projected ascent step
//!   in `μ`.
//! - [`MaxMinMode::SingleLoop`]: no momentum and a single `y` step per dual
//!   step. Converges linearly when `g^c` is affine in `y` and `Y = ℝ^{d_y}`.

use crate::error::{check_len, BloccError, Result};
use crate::linalg;
use crate::problem::{BilevelOracle, LipschitzBounds, PrimalDualPair, StepsizeDefaults};

/// Gradient access to a Lagrangian `L(μ, y)` at a fixed upper-level point.
pub trait SaddleLagrangian {
    fn dim_y(&self) -> usize;
    fn num_ineq(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn grad_y(&self, y: &[f64], mu: &[f64]) -> Vec<f64>;
    /// `∇_μ L(μ, y)`, which does not depend on `μ`.
    fn grad_mu(&self, y: &[f64]) -> Vec<f64>;
    fn project_y(&self, v: &[f64]) -> Vec<f64>;
    /// Per-coordinate multipliers applied to `η_y` in the `y` steps.
    fn step_scale(&self) -> Option<&[f64]> {
        None
    }
}

/// `L_g(μ, y; x) = g(x, y) + ⟨μ, g^c(x, y)⟩`
pub struct LowerLagrangian<'a, O: ?Sized> {
    pub oracle: &'a O,
    pub x: &'a [f64],
    pub step_scale: Option<Vec<f64>>,
}

impl<'a, O: BilevelOracle + ?Sized> LowerLagrangian<'a, O> {
    pub fn new(oracle: &'a O, x: &'a [f64]) -> Self {
        Self {
            oracle,
            x,
            step_scale: None,
        }
    }

    pub fn with_step_scale(mut self, scale: Option<Vec<f64>>) -> Self {
        self.step_scale = scale;
        self
    }
}

impl<O: BilevelOracle + ?Sized> SaddleLagrangian for LowerLagrangian<'_, O> {
    fn dim_y(&self) -> usize {
        self.oracle.dim_y()
    }
    fn num_ineq(&self) -> usize {
        self.oracle.num_ineq()
    }
    fn num_constraints(&self) -> usize {
        self.oracle.num_constraints()
    }
    fn grad_y(&self, y: &[f64], mu: &[f64]) -> Vec<f64> {
        let mut g = self.oracle.grad_g_y(self.x, y);
        linalg::axpy(1.0, &self.oracle.vjp_gc_y(self.x, y, mu), &mut g);
        g
    }
    fn grad_mu(&self, y: &[f64]) -> Vec<f64> {
        self.oracle.gc(self.x, y)
    }
    fn project_y(&self, v: &[f64]) -> Vec<f64> {
        self.oracle.project_y(v)
    }
    fn step_scale(&self) -> Option<&[f64]> {
        self.step_scale.as_deref()
    }
}

/// `L_F(μ, y; x) = f(x, y) + γ (g(x, y) − v(x)) + ⟨μ, g^c(x, y)⟩`
pub struct PenaltyLagrangian<'a, O: ?Sized> {
    pub oracle: &'a O,
    pub x: &'a [f64],
    pub gamma: f64,
    pub step_scale: Option<Vec<f64>>,
}

impl<'a, O: BilevelOracle + ?Sized> PenaltyLagrangian<'a, O> {
    pub fn new(oracle: &'a O, x: &'a [f64], gamma: f64) -> Self {
        Self {
            oracle,
            x,
            gamma,
            step_scale: None,
        }
    }

    pub fn with_step_scale(mut self, scale: Option<Vec<f64>>) -> Self {
        self.step_scale = scale;
        self
    }
}

impl<O: BilevelOracle + ?Sized> SaddleLagrangian for PenaltyLagrangian<'_, O> {
    fn dim_y(&self) -> usize {
        self.oracle.dim_y()
    }
    fn num_ineq(&self) -> usize {
        self.oracle.num_ineq()
    }
    fn num_constraints(&self) -> usize {
        self.oracle.num_constraints()
    }
    fn grad_y(&self, y: &[f64], mu: &[f64]) -> Vec<f64> {
        let mut g = self.oracle.grad_f_y(self.x, y);
        linalg::axpy(self.gamma, &self.oracle.grad_g_y(self.x, y), &mut g);
        linalg::axpy(1.0, &self.oracle.vjp_gc_y(self.x, y, mu), &mut g);
        g
    }
    fn grad_mu(&self, y: &[f64]) -> Vec<f64> {
        self.oracle.gc(self.x, y)
    }
    fn project_y(&self, v: &[f64]) -> Vec<f64> {
        self.oracle.project_y(v)
    }
    fn step_scale(&self) -> Option<&[f64]> {
        self.step_scale.as_deref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxMinMode {
    Accelerated,
    SingleLoop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxMinConfig {
    pub mode: MaxMinMode,
    /// Dual iterations `T`.
    pub outer_iters: usize,
    /// Primal steps per dual iteration `T_y`; must be 1 in single-loop mode.
    pub inner_y_iters: usize,
    pub eta_y: f64,
    pub eta_mu: f64,
    /// Early stop once `max(‖Δy‖, ‖Δμ‖) ≤ tol`.
    pub tol: f64,
}

impl MaxMinConfig {
    pub fn accelerated(outer_iters: usize, inner_y_iters: usize, eta_y: f64, eta_mu: f64) -> Self {
        Self {
            mode: MaxMinMode::Accelerated,
            outer_iters,
            inner_y_iters,
            eta_y,
            eta_mu,
            tol: 0.0,
        }
    }

    pub fn single_loop(outer_iters: usize, eta_y: f64, eta_mu: f64) -> Self {
        Self {
            mode: MaxMinMode::SingleLoop,
            outer_iters,
            inner_y_iters: 1,
            eta_y,
            eta_mu,
            tol: 0.0,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == MaxMinMode::SingleLoop && self.inner_y_iters != 1 {
            return Err(BloccError::config(format!(
                "single-loop mode requires inner_y_iters = 1, got {}",
                self.inner_y_iters
            )));
        }
        if self.outer_iters == 0 || self.inner_y_iters == 0 {
            return Err(BloccError::config("maxmin iteration counts must be positive"));
        }
        if !(self.eta_y > 0.0 && self.eta_y.is_finite()) {
            return Err(BloccError::config(format!("eta_y must be positive, got {}", self.eta_y)));
        }
        if !(self.eta_mu > 0.0 && self.eta_mu.is_finite()) {
            return Err(BloccError::config(format!(
                "eta_mu must be positive, got {}",
                self.eta_mu
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(BloccError::config(format!("tol must be nonnegative, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinResult {
    pub pd: PrimalDualPair,
    pub iterations_used: usize,
    pub final_step_norm: f64,
    /// Whether the `tol` criterion fired before the budget ran out.
    pub converged: bool,
}

/// Momentum weight `(t−1)/(t+2)`.
pub fn momentum_coefficient(t: usize) -> f64 {
    (t as f64 - 1.0) / (t as f64 + 2.0)
}

/// `steps` projected gradient steps on `L(mu, ·)` starting from `y0`.
///
/// With a step scale `s`, coordinate `i` moves by `η_y s_i ∂_i L`. This is a
/// projected gradient step in the metric `diag(1/s)` only when `Y` is a box.
pub fn inner_y_descent<L: SaddleLagrangian + ?Sized>(
    lag: &L,
    y0: &[f64],
    mu: &[f64],
    eta_y: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(BloccError::config("inner_y_descent needs at least one step"));
    }
    let mut y = y0.to_vec();
    for step in 0..steps {
        let grad = lag.grad_y(&y, mu);
        if !linalg::all_finite(&grad) {
            return Err(BloccError::NonFinite {
                context: "inner y descent gradient",
                iteration: step,
                detail: format!("y = {:?}", preview(&y)),
            });
        }
        match lag.step_scale() {
            Some(scale) => {
                for ((yi, gi), si) in y.iter_mut().zip(&grad).zip(scale) {
                    *yi -= eta_y * si * gi;
                }
            }
            None => linalg::axpy(-eta_y, &grad, &mut y),
        }
        y = lag.project_y(&y);
    }
    Ok(y)
}

/// Projected dual ascent step; only the first `num_ineq` entries are clamped.
pub fn mu_ascent_step(grad_mu: &[f64], mu_half: &[f64], eta_mu: f64, num_ineq: usize) -> Vec<f64> {
    debug_assert_eq!(grad_mu.len(), mu_half.len());
    mu_half
        .iter()
        .zip(grad_mu)
        .enumerate()
        .map(|(i, (m, g))| {
            let v = m + eta_mu * g;
            if i < num_ineq {
                v.max(0.0)
            } else {
                v
            }
        })
        .collect()
}

pub fn solve_maxmin<L: SaddleLagrangian + ?Sized>(
    lag: &L,
    config: &MaxMinConfig,
    init: &PrimalDualPair,
) -> Result<MaxMinResult> {
    solve_maxmin_observed(lag, config, init, |_, _| {})
}

/// Same as [`solve_maxmin`], calling `observer(t, &(y_{t+1}, μ_{t+1}))` after
/// every dual iteration.
pub fn solve_maxmin_observed<L, F>(
    lag: &L,
    config: &MaxMinConfig,
    init: &PrimalDualPair,
    mut observer: F,
) -> Result<MaxMinResult>
where
    L: SaddleLagrangian + ?Sized,
    F: FnMut(usize, &PrimalDualPair),
{
    config.validate()?;
    check_len("y", lag.dim_y(), init.y.len())?;
    if let Some(scale) = lag.step_scale() {
        check_len("step_scale", lag.dim_y(), scale.len())?;
        if !scale.iter().all(|s| *s > 0.0 && s.is_finite()) {
            return Err(BloccError::config("step scale entries must be positive and finite"));
        }
    }
    check_len("mu", lag.num_constraints(), init.mu.len())?;
    let num_ineq = lag.num_ineq();
    if let Some(m) = init.mu[..num_ineq].iter().find(|m| **m < 0.0) {
        return Err(BloccError::config(format!(
            "initial inequality multipliers must be nonnegative, found {m}"
        )));
    }

    let mut state = PrimalDualPair::new(lag.project_y(&init.y), init.mu.clone());
    let mut mu_prev = init.mu.clone();
    let mut step_norm = f64::INFINITY;
    let mut used = 0;
    let mut converged = false;

    for t in 0..config.outer_iters {
        let mu_half = match config.mode {
            MaxMinMode::Accelerated => {
                let beta = momentum_coefficient(t);
                state
                    .mu
                    .iter()
                    .zip(&mu_prev)
                    .map(|(m, p)| m + beta * (m - p))
                    .collect()
            }
            MaxMinMode::SingleLoop => state.mu.clone(),
        };

        let y_next = inner_y_descent(lag, &state.y, &mu_half, config.eta_y, config.inner_y_iters)
            .map_err(|e| match e {
                BloccError::NonFinite { context, detail, .. } => BloccError::NonFinite {
                    context,
                    iteration: t,
                    detail,
                },
                other => other,
            })?;
        let grad_mu = lag.grad_mu(&y_next);
        let mu_next = mu_ascent_step(&grad_mu, &mu_half, config.eta_mu, num_ineq);
        if !linalg::all_finite(&y_next) || !linalg::all_finite(&mu_next) {
            return Err(BloccError::NonFinite {
                context: "maxmin iterate",
                iteration: t,
                detail: format!(
                    "last finite y = {:?}, mu = {:?}",
                    preview(&state.y),
                    preview(&state.mu)
                ),
            });
        }

        let dy = linalg::dist(&y_next, &state.y);
        let dmu = linalg::dist(&mu_next, &state.mu);
        step_norm = dy.max(dmu);
        mu_prev = std::mem::replace(&mut state.mu, mu_next);
        state.y = y_next;
        used = t + 1;
        observer(t, &state);

        if step_norm <= config.tol {
            converged = true;
            break;
        }
    }

    Ok(MaxMinResult {
        pd: state,
        iterations_used: used,
        final_step_norm: step_norm,
        converged,
    })
}

fn preview(v: &[f64]) -> &[f64] {
    &v[..v.len().min(8)]
}

/// Where a stepsize pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepsizeSource {
    /// Computed from declared Lipschitz constants.
    Rule,
    /// Problem-declared defaults (no usable constants).
    ProblemDefault,
    /// The rule was degenerate (zero denominator); defaults were used.
    DegenerateFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeChoice {
    pub eta_y: f64,
    pub eta_mu: f64,
    pub source: StepsizeSource,
}

fn fallback_choice(
    fallback: Option<StepsizeDefaults>,
    source: StepsizeSource,
    why: &str,
) -> Result<StepsizeChoice> {
    match fallback {
        Some(d) => Ok(StepsizeChoice {
            eta_y: d.eta_y,
            eta_mu: d.eta_mu,
            source,
        }),
        None => Err(BloccError::config(format!(
            "{why}; supply eta_y and eta_mu explicitly"
        ))),
    }
}

/// Single-loop dual step `a² ε (2 s a + s²/ε)^{-1} η_y` for strong-convexity
/// modulus `a`.
fn single_loop_dual_step(modulus: f64, lips: &LipschitzBounds, eta_y: f64) -> Option<f64> {
    let s = lips.s_max?;
    let eps = lips.target_eps?;
    if !(s > 0.0 && eps > 0.0) {
        return None;
    }
    Some(modulus * modulus * eps / (2.0 * s * modulus + s * s / eps) * eta_y)
}

/// Stepsizes for the lower-level Lagrangian.
///
/// Accelerated: `η_y = 1/(l_{g,1} + l_{g^c,1})`, `η_μ = α_g / l_{g^c,0}`.
/// Single-loop: `η_y = 1/l_{g,1}` with the dual step scaled from it.
pub fn default_stepsizes_g(
    lips: Option<&LipschitzBounds>,
    alpha_g: f64,
    mode: MaxMinMode,
    fallback: Option<StepsizeDefaults>,
) -> Result<StepsizeChoice> {
    let Some(l) = lips else {
        return fallback_choice(fallback, StepsizeSource::ProblemDefault, "no Lipschitz bounds");
    };
    match mode {
        MaxMinMode::Accelerated => {
            let denom_y = l.l_g1 + l.l_gc1;
            if !(denom_y > 0.0) || !(l.l_gc0 > 0.0) {
                return fallback_choice(
                    fallback,
                    StepsizeSource::DegenerateFallback,
                    "stepsize rule divides by zero",
                );
            }
            Ok(StepsizeChoice {
                eta_y: 1.0 / denom_y,
                eta_mu: alpha_g / l.l_gc0,
                source: StepsizeSource::Rule,
            })
        }
        MaxMinMode::SingleLoop => {
            if !(l.l_g1 > 0.0) {
                return fallback_choice(
                    fallback,
                    StepsizeSource::DegenerateFallback,
                    "stepsize rule divides by zero",
                );
            }
            let eta_y = 1.0 / l.l_g1;
            match single_loop_dual_step(alpha_g, l, eta_y) {
                Some(eta_mu) => Ok(StepsizeChoice {
                    eta_y,
                    eta_mu,
                    source: StepsizeSource::Rule,
                }),
                None => fallback_choice(
                    fallback,
                    StepsizeSource::ProblemDefault,
                    "single-loop rule needs s_max and target_eps",
                ),
            }
        }
    }
}

/// Stepsizes for the penalized Lagrangian.
///
/// Accelerated: `η_y = 1/(l_{f,1} + γ l_{g,1} + l_{g^c,1})`,
/// `η_μ = (γ α_g − l_{f,1}) / l_{g^c,0}`. Requires `γ α_g > l_{f,1}`.
pub fn default_stepsizes_f(
    lips: Option<&LipschitzBounds>,
    alpha_g: f64,
    gamma: f64,
    mode: MaxMinMode,
    fallback: Option<StepsizeDefaults>,
) -> Result<StepsizeChoice> {
    crate::problem::check_gamma(gamma)?;
    let Some(l) = lips else {
        return fallback_choice(fallback, StepsizeSource::ProblemDefault, "no Lipschitz bounds");
    };
    let modulus = gamma * alpha_g - l.l_f1;
    if !(modulus > 0.0) {
        return Err(BloccError::config(format!(
            "gamma * alpha_g > l_f1 violated: {gamma} * {alpha_g} <= {}",
            l.l_f1
        )));
    }
    match mode {
        MaxMinMode::Accelerated => {
            let denom_y = l.l_f1 + gamma * l.l_g1 + l.l_gc1;
            if !(denom_y > 0.0) || !(l.l_gc0 > 0.0) {
                return fallback_choice(
                    fallback,
                    StepsizeSource::DegenerateFallback,
                    "stepsize rule divides by zero",
                );
            }
            Ok(StepsizeChoice {
                eta_y: 1.0 / denom_y,
                eta_mu: modulus / l.l_gc0,
                source: StepsizeSource::Rule,
            })
        }
        MaxMinMode::SingleLoop => {
            let denom_y = l.l_f1 + gamma * l.l_g1;
            if !(denom_y > 0.0) {
                return fallback_choice(
                    fallback,
                    StepsizeSource::DegenerateFallback,
                    "stepsize rule divides by zero",
                );
            }
            let eta_y = 1.0 / denom_y;
            match single_loop_dual_step(modulus, l, eta_y) {
                Some(eta_mu) => Ok(StepsizeChoice {
                    eta_y,
                    eta_mu,
                    source: StepsizeSource::Rule,
                }),
                None => fallback_choice(
                    fallback,
                    StepsizeSource::ProblemDefault,
                    "single-loop rule needs s_max and target_eps",
                ),
            }
        }
    }
}
