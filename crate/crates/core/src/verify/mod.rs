//! Independent oracles and numerical audits used to check the solvers.

mod audit;
mod fd;
mod grid;
mod growth;
mod kkt;
mod qp;

pub use audit::{gradient_audit, relative_error, GradientAudit};
pub use fd::{default_step, finite_diff_grad, finite_diff_grad_auto};
pub use grid::grid_oracle_lower;
pub use growth::{growth_margin, quadratic_growth_check, GrowthCheck};
pub use kkt::{kkt_residual, KktReport};
pub use qp::{active_set_qp, qp_from_oracle, QpProblem, QpSide, MAX_ACTIVE_SET_INEQ};
