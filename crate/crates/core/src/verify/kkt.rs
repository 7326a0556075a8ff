use crate::error::Result;
use crate::linalg;
use crate::problem::{lagrangian_g_grads, max_eq_violation, max_ineq_violation, BilevelOracle, PrimalDualPair};

/// KKT residuals of a candidate lower-level pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// Natural residual `‖y − Proj_Y(y − ∇_y L_g)‖`; equals `‖∇_y L_g‖` when
    /// `Y` is the whole space.
    pub stationarity_norm: f64,
    pub max_primal_violation: f64,
    /// `max |μ_i g^c_i|` over inequalities.
    pub max_complementarity: f64,
    /// Magnitude of the most negative inequality multiplier (0 if none).
    pub dual_feasibility: f64,
}

pub fn kkt_residual(oracle: &(impl BilevelOracle + ?Sized), x: &[f64], pd: &PrimalDualPair) -> Result<KktReport> {
    let (grad_y, residuals) = lagrangian_g_grads(oracle, x, pd)?;
    let step = oracle.project_y(&linalg::sub(&pd.y, &grad_y));
    let m = oracle.num_ineq();
    Ok(KktReport {
        stationarity_norm: linalg::dist(&pd.y, &step),
        max_primal_violation: max_ineq_violation(&residuals, m).max(max_eq_violation(&residuals, m)),
        max_complementarity: pd.mu[..m]
            .iter()
            .zip(&residuals)
            .fold(0.0, |acc: f64, (mu, r)| acc.max((mu * r).abs())),
        dual_feasibility: pd.mu[..m].iter().fold(0.0, |acc: f64, mu| acc.max(-mu)),
    })
}
