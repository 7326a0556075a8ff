//! Outer loop: projected gradient descent on the penalty surrogate `F_γ`.
//!
//! Each iteration solves the lower-level saddle problem (giving `y_g`, `μ_g`)
//! and the penalized one (giving `y_F`, `μ_F`) at the current `x`, forms
//!
//! ```text
//! g_v = ∇_x g(x, y_g) + ⟨μ_g, ∇_x g^c(x, y_g)⟩
//! g_F = ∇_x f(x, y_F) + γ (∇_x g(x, y_F) − g_v) + ⟨μ_F, ∇_x g^c(x, y_F)⟩
//! ```
//!
//! and steps `x ← Proj_X(x − η g_F)`. The value function itself is never
//! evaluated; `g(x, y_F) − g(x, y_g)` stands in for `g − v` in traces.

use std::time::Instant;

use crate::error::{check_len, BloccError, Result};
use crate::linalg;
use crate::maxmin::{
    default_stepsizes_f, default_stepsizes_g, solve_maxmin, LowerLagrangian, MaxMinConfig,
    MaxMinMode, MaxMinResult, PenaltyLagrangian,
};
use crate::problem::{
    check_gamma, max_eq_violation, max_ineq_violation, BilevelOracle, PrimalDualPair,
};

#[derive(Debug, Clone, PartialEq)]
pub struct BloccConfig {
    pub gamma: f64,
    pub eta: f64,
    pub outer_iters: usize,
    pub maxmin_g: MaxMinConfig,
    pub maxmin_f: MaxMinConfig,
    /// Seed inner solves from the previous outer iteration's pairs.
    pub warm_start: bool,
    /// Stop once `‖x_{t+1} − x_t‖ ≤ outer_tol`.
    pub outer_tol: f64,
    /// Stop once `|f(x_t, y_g) − f(x_{t−1}, y_g)|` falls below this.
    pub f_update_tol: Option<f64>,
    pub seed: u64,
    /// Run the two inner solves of an iteration on separate threads.
    pub parallel_inner: bool,
    /// Record wall-clock time per iteration; zeros otherwise.
    pub record_timing: bool,
    /// Re-solve both inner problems at `x_final` before returning.
    pub final_inner_solve: bool,
    /// Inner configuration for the final `g`-side solve (defaults to `maxmin_g`).
    pub final_maxmin_g: Option<MaxMinConfig>,
    /// Apply the oracle's per-coordinate `y` step scales in the inner solves.
    pub scaled_y_steps: bool,
}

impl BloccConfig {
    pub fn new(gamma: f64, eta: f64, outer_iters: usize, maxmin_g: MaxMinConfig, maxmin_f: MaxMinConfig) -> Self {
        Self {
            gamma,
            eta,
            outer_iters,
            maxmin_g,
            maxmin_f,
            warm_start: true,
            outer_tol: 0.0,
            f_update_tol: None,
            seed: 0,
            parallel_inner: false,
            record_timing: true,
            final_inner_solve: true,
            final_maxmin_g: None,
            scaled_y_steps: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(BloccError::config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.outer_tol >= 0.0) {
            return Err(BloccError::config("outer_tol must be nonnegative"));
        }
        if let Some(t) = self.f_update_tol {
            if !(t >= 0.0) {
                return Err(BloccError::config("f_update_tol must be nonnegative"));
            }
        }
        self.maxmin_g.validate()?;
        self.maxmin_f.validate()?;
        if let Some(c) = &self.final_maxmin_g {
            c.validate()?;
        }
        Ok(())
    }
}

/// Inner configurations built from the problem's stepsize rules or defaults.
pub fn default_inner_configs(
    oracle: &(impl BilevelOracle + ?Sized),
    gamma: f64,
    mode: MaxMinMode,
    outer_iters: usize,
    inner_y_iters: usize,
    tol: f64,
) -> Result<(MaxMinConfig, MaxMinConfig)> {
    let lips = oracle.lipschitz();
    let alpha = oracle.alpha_g();
    let sg = default_stepsizes_g(lips.as_ref(), alpha, mode, oracle.default_stepsizes_g())?;
    let sf = default_stepsizes_f(lips.as_ref(), alpha, gamma, mode, oracle.default_stepsizes_f(gamma))?;
    let t_y = if mode == MaxMinMode::SingleLoop { 1 } else { inner_y_iters };
    let make = |eta_y, eta_mu| MaxMinConfig {
        mode,
        outer_iters,
        inner_y_iters: t_y,
        eta_y,
        eta_mu,
        tol,
    };
    Ok((make(sg.eta_y, sg.eta_mu), make(sf.eta_y, sf.eta_mu)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateTrace {
    pub iter: usize,
    /// `x_t`, the point at which the inner problems were solved.
    pub x: Vec<f64>,
    pub f_at_yf: f64,
    pub f_at_yg: f64,
    pub g_gap: f64,
    pub gen_grad_norm: f64,
    /// Largest constraint violation at `y_g`: positive inequality residuals
    /// and absolute equality residuals.
    pub max_violation: f64,
    pub inner_iters_g: usize,
    pub inner_iters_f: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    IterationLimit,
    StepTolerance,
    UpdateTolerance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x_final: Vec<f64>,
    pub pd_f: PrimalDualPair,
    pub pd_g: PrimalDualPair,
    pub trace: Vec<IterateTrace>,
    /// Mean of `gen_grad_norm²` over the trace.
    pub avg_sq_gen_grad: f64,
    pub stop_reason: StopReason,
}

/// `∇_x g(x, y_g) + ⟨μ_g, ∇_x g^c(x, y_g)⟩`
pub fn estimate_grad_v(
    oracle: &(impl BilevelOracle + ?Sized),
    x: &[f64],
    pd_g: &PrimalDualPair,
) -> Result<Vec<f64>> {
    check_len("x", oracle.dim_x(), x.len())?;
    pd_g.check_dims(oracle)?;
    let mut out = oracle.grad_g_x(x, &pd_g.y);
    linalg::axpy(1.0, &oracle.vjp_gc_x(x, &pd_g.y, &pd_g.mu), &mut out);
    Ok(out)
}

/// `∇_x f(x, y_F) + γ (∇_x g(x, y_F) − g_v) + ⟨μ_F, ∇_x g^c(x, y_F)⟩`
pub fn estimate_grad_f(
    oracle: &(impl BilevelOracle + ?Sized),
    x: &[f64],
    pd_f: &PrimalDualPair,
    grad_v: &[f64],
    gamma: f64,
) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    check_len("x", oracle.dim_x(), x.len())?;
    check_len("grad_v", oracle.dim_x(), grad_v.len())?;
    pd_f.check_dims(oracle)?;
    let mut out = oracle.grad_f_x(x, &pd_f.y);
    let mut penalty = oracle.grad_g_x(x, &pd_f.y);
    linalg::axpy(-1.0, grad_v, &mut penalty);
    linalg::axpy(gamma, &penalty, &mut out);
    linalg::axpy(1.0, &oracle.vjp_gc_x(x, &pd_f.y, &pd_f.mu), &mut out);
    Ok(out)
}

/// `Proj_X(x − η g_F)`
pub fn outer_step(oracle: &(impl BilevelOracle + ?Sized), x: &[f64], g_f: &[f64], eta: f64) -> Vec<f64> {
    let mut v = x.to_vec();
    linalg::axpy(-eta, g_f, &mut v);
    oracle.project_x(&v)
}

/// `‖x_next − x_prev‖ / η`
pub fn generalized_grad_norm(x_prev: &[f64], x_next: &[f64], eta: f64) -> f64 {
    linalg::dist(x_prev, x_next) / eta
}

struct StepScales {
    g: Option<Vec<f64>>,
    f: Option<Vec<f64>>,
}

fn solve_g_side<O: BilevelOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    cfg: &MaxMinConfig,
    init: &PrimalDualPair,
    scale: Option<Vec<f64>>,
) -> Result<MaxMinResult> {
    solve_maxmin(&LowerLagrangian::new(oracle, x).with_step_scale(scale), cfg, init)
}

fn solve_f_side<O: BilevelOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    gamma: f64,
    cfg: &MaxMinConfig,
    init: &PrimalDualPair,
    scale: Option<Vec<f64>>,
) -> Result<MaxMinResult> {
    solve_maxmin(&PenaltyLagrangian::new(oracle, x, gamma).with_step_scale(scale), cfg, init)
}

fn inner_abort(side: &'static str, outer_iter: usize) -> impl FnOnce(BloccError) -> BloccError {
    move |e| BloccError::InnerAbort {
        side,
        outer_iter,
        source: Box::new(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn solve_both<O: BilevelOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    gamma: f64,
    cfg_g: &MaxMinConfig,
    cfg_f: &MaxMinConfig,
    init_g: &PrimalDualPair,
    init_f: &PrimalDualPair,
    scales: &StepScales,
    parallel: bool,
    outer_iter: usize,
) -> Result<(MaxMinResult, MaxMinResult)> {
    let (rg, rf) = if parallel {
        std::thread::scope(|s| {
            let hf = s.spawn(|| solve_f_side(oracle, x, gamma, cfg_f, init_f, scales.f.clone()));
            let rg = solve_g_side(oracle, x, cfg_g, init_g, scales.g.clone());
            (rg, hf.join().expect("inner solver thread panicked"))
        })
    } else {
        (
            solve_g_side(oracle, x, cfg_g, init_g, scales.g.clone()),
            solve_f_side(oracle, x, gamma, cfg_f, init_f, scales.f.clone()),
        )
    };
    Ok((
        rg.map_err(inner_abort("g", outer_iter))?,
        rf.map_err(inner_abort("F", outer_iter))?,
    ))
}

fn violation(oracle: &(impl BilevelOracle + ?Sized), x: &[f64], y: &[f64]) -> f64 {
    let r = oracle.gc(x, y);
    let m = oracle.num_ineq();
    max_ineq_violation(&r, m).max(max_eq_violation(&r, m))
}

/// Run the outer loop from `x0` (projected onto `X` first).
pub fn solve<O: BilevelOracle + ?Sized>(
    oracle: &O,
    config: &BloccConfig,
    x0: &[f64],
    init_g: &PrimalDualPair,
    init_f: &PrimalDualPair,
) -> Result<SolveResult> {
    config.validate()?;
    check_len("x0", oracle.dim_x(), x0.len())?;
    init_g.check_dims(oracle)?;
    init_f.check_dims(oracle)?;
    if let Some(l) = oracle.lipschitz() {
        if config.gamma * oracle.alpha_g() <= l.l_f1 {
            log::warn!(
                "gamma * alpha_g = {} does not exceed l_f1 = {}; penalty may be too weak",
                config.gamma * oracle.alpha_g(),
                l.l_f1
            );
        }
    }

    let scales = if config.scaled_y_steps {
        StepScales {
            g: oracle.y_step_scale_g(),
            f: oracle.y_step_scale_f(config.gamma),
        }
    } else {
        StepScales { g: None, f: None }
    };

    let num_ineq = oracle.num_ineq();
    let mut cold_g = init_g.clone();
    cold_g.clamp_multipliers(num_ineq);
    let mut cold_f = init_f.clone();
    cold_f.clamp_multipliers(num_ineq);

    let mut x = oracle.project_x(x0);
    let mut pd_g = cold_g.clone();
    let mut pd_f = cold_f.clone();
    let mut trace = Vec::with_capacity(config.outer_iters);
    let mut stop_reason = StopReason::IterationLimit;
    let start = Instant::now();

    for t in 0..config.outer_iters {
        let (seed_g, seed_f) = if config.warm_start { (&pd_g, &pd_f) } else { (&cold_g, &cold_f) };
        let (rg, rf) = solve_both(
            oracle,
            &x,
            config.gamma,
            &config.maxmin_g,
            &config.maxmin_f,
            seed_g,
            seed_f,
            &scales,
            config.parallel_inner,
            t,
        )?;
        pd_g = rg.pd;
        pd_f = rf.pd;

        let grad_v = estimate_grad_v(oracle, &x, &pd_g)?;
        let grad_f = estimate_grad_f(oracle, &x, &pd_f, &grad_v, config.gamma)?;
        if !linalg::all_finite(&grad_f) {
            return Err(BloccError::NonFinite {
                context: "hypergradient estimate",
                iteration: t,
                detail: format!("x = {:?}", &x[..x.len().min(8)]),
            });
        }
        let x_next = outer_step(oracle, &x, &grad_f, config.eta);

        let f_at_yg = oracle.f(&x, &pd_g.y);
        let record = IterateTrace {
            iter: t,
            x: x.clone(),
            f_at_yf: oracle.f(&x, &pd_f.y),
            f_at_yg,
            g_gap: oracle.g(&x, &pd_f.y) - oracle.g(&x, &pd_g.y),
            gen_grad_norm: generalized_grad_norm(&x, &x_next, config.eta),
            max_violation: violation(oracle, &x, &pd_g.y),
            inner_iters_g: rg.iterations_used,
            inner_iters_f: rf.iterations_used,
            wall_time_s: if config.record_timing { start.elapsed().as_secs_f64() } else { 0.0 },
        };
        let step = linalg::dist(&x, &x_next);
        let prev_f = trace.last().map(|r: &IterateTrace| r.f_at_yg);
        trace.push(record);
        x = x_next;

        if step <= config.outer_tol {
            stop_reason = StopReason::StepTolerance;
            break;
        }
        if let (Some(tol), Some(prev)) = (config.f_update_tol, prev_f) {
            if (f_at_yg - prev).abs() < tol {
                stop_reason = StopReason::UpdateTolerance;
                break;
            }
        }
    }

    if config.final_inner_solve {
        let cfg_g = config.final_maxmin_g.as_ref().unwrap_or(&config.maxmin_g);
        let (seed_g, seed_f) = if config.warm_start { (&pd_g, &pd_f) } else { (&cold_g, &cold_f) };
        let (rg, rf) = solve_both(
            oracle,
            &x,
            config.gamma,
            cfg_g,
            &config.maxmin_f,
            seed_g,
            seed_f,
            &scales,
            config.parallel_inner,
            trace.len(),
        )?;
        pd_g = rg.pd;
        pd_f = rf.pd;
    }

    let avg_sq_gen_grad = if trace.is_empty() {
        0.0
    } else {
        trace.iter().map(|r| r.gen_grad_norm * r.gen_grad_norm).sum::<f64>() / trace.len() as f64
    };

    Ok(SolveResult {
        x_final: x,
        pd_f,
        pd_g,
        trace,
        avg_sq_gen_grad,
        stop_reason,
    })
}
