//! Problem-oracle interface and the two inner Lagrangians.
//!
//! A bilevel instance is described by its objectives `f` (upper) and `g`
//! (lower), the coupled constraint map `g^c(x, y)`, and projections onto the
//! simple domains `X` and `Y`. Constraint residuals are laid out with the
//! inequality block (`g^c_i ≤ 0`) first and the equality block
//! (`g^c_j = 0`) after it. Multipliers follow the same layout: the inequality
//! block lives in the nonnegative orthant, the equality block is free.

use crate::error::{check_len, BloccError, Result};
use crate::linalg;

/// User-supplied bilevel problem definition.
///
/// Implementations must be pure functions of their arguments; solvers call
/// them from several threads at once.
pub trait BilevelOracle: Send + Sync {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn num_ineq(&self) -> usize;
    fn num_eq(&self) -> usize {
        0
    }
    fn num_constraints(&self) -> usize {
        self.num_ineq() + self.num_eq()
    }

    fn f(&self, x: &[f64], y: &[f64]) -> f64;
    fn grad_f_x(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    fn grad_f_y(&self, x: &[f64], y: &[f64]) -> Vec<f64>;

    fn g(&self, x: &[f64], y: &[f64]) -> f64;
    fn grad_g_x(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    fn grad_g_y(&self, x: &[f64], y: &[f64]) -> Vec<f64>;

    /// Constraint residuals, inequality block first.
    fn gc(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    /// `Σ_i μ_i ∇_x g^c_i(x, y)`
    fn vjp_gc_x(&self, x: &[f64], y: &[f64], mu: &[f64]) -> Vec<f64>;
    /// `Σ_i μ_i ∇_y g^c_i(x, y)`
    fn vjp_gc_y(&self, x: &[f64], y: &[f64], mu: &[f64]) -> Vec<f64>;

    fn project_x(&self, v: &[f64]) -> Vec<f64>;
    fn project_y(&self, v: &[f64]) -> Vec<f64>;

    /// Strong-convexity modulus of `g(x, ·)`.
    fn alpha_g(&self) -> f64;

    /// Coordinate bounds of `X` (infinite where unbounded).
    fn x_bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY); self.dim_x()]
    }

    /// Box from which random upper-level starting points are drawn.
    fn init_box(&self) -> Vec<(f64, f64)> {
        self.x_bounds()
            .into_iter()
            .map(|(lo, hi)| match (lo.is_finite(), hi.is_finite()) {
                (true, true) => (lo, hi),
                (true, false) => (lo, lo + 1.0),
                (false, true) => (hi - 1.0, hi),
                (false, false) => (-1.0, 1.0),
            })
            .collect()
    }

    fn lipschitz(&self) -> Option<LipschitzBounds> {
        None
    }

    /// Problem-declared `(η_y, η_μ)` for the lower-level Lagrangian.
    fn default_stepsizes_g(&self) -> Option<StepsizeDefaults> {
        None
    }

    /// Problem-declared `(η_y, η_μ)` for the penalized Lagrangian at `gamma`.
    fn default_stepsizes_f(&self, _gamma: f64) -> Option<StepsizeDefaults> {
        None
    }

    /// Optional per-coordinate multipliers on `η_y` for the lower-level
    /// Lagrangian, used when the solver enables scaled `y` steps.
    fn y_step_scale_g(&self) -> Option<Vec<f64>> {
        None
    }

    /// Same as [`Self::y_step_scale_g`] for the penalized Lagrangian.
    fn y_step_scale_f(&self, _gamma: f64) -> Option<Vec<f64>> {
        None
    }
}

/// Smoothness constants of the problem, when known.
///
/// All constants refer to the `y`-block curvature seen by the inner solvers.
/// `s_max` and `target_eps` are only needed by the single-loop dual
/// stepsize rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzBounds {
    pub l_f1: f64,
    pub l_g1: f64,
    pub l_gc0: f64,
    pub l_gc1: f64,
    pub s_max: Option<f64>,
    pub target_eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeDefaults {
    pub eta_y: f64,
    pub eta_mu: f64,
}

/// A lower-level point paired with a multiplier vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPair {
    pub y: Vec<f64>,
    pub mu: Vec<f64>,
}

impl PrimalDualPair {
    pub fn new(y: Vec<f64>, mu: Vec<f64>) -> Self {
        Self { y, mu }
    }

    /// All-zero pair sized for `oracle`.
    pub fn zeros(oracle: &(impl BilevelOracle + ?Sized)) -> Self {
        Self {
            y: vec![0.0; oracle.dim_y()],
            mu: vec![0.0; oracle.num_constraints()],
        }
    }

    /// Pair with `y = Proj_Y(0)` and zero multipliers.
    pub fn projected_origin(oracle: &(impl BilevelOracle + ?Sized)) -> Self {
        Self {
            y: oracle.project_y(&vec![0.0; oracle.dim_y()]),
            mu: vec![0.0; oracle.num_constraints()],
        }
    }

    /// Clamp the inequality block of `mu` into the nonnegative orthant.
    pub fn clamp_multipliers(&mut self, num_ineq: usize) {
        for m in self.mu.iter_mut().take(num_ineq) {
            *m = m.max(0.0);
        }
    }

    pub fn check_dims(&self, oracle: &(impl BilevelOracle + ?Sized)) -> Result<()> {
        check_len("y", oracle.dim_y(), self.y.len())?;
        check_len("mu", oracle.num_constraints(), self.mu.len())
    }
}

fn check_x(oracle: &(impl BilevelOracle + ?Sized), x: &[f64]) -> Result<()> {
    check_len("x", oracle.dim_x(), x.len())
}

/// Gradients of `L_g(μ, y; x) = g(x, y) + ⟨μ, g^c(x, y)⟩`.
///
/// Returns `(∇_y L_g, ∇_μ L_g)`; the latter is the residual `g^c(x, y)`.
pub fn lagrangian_g_grads(
    oracle: &(impl BilevelOracle + ?Sized),
    x: &[f64],
    pd: &PrimalDualPair,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_x(oracle, x)?;
    pd.check_dims(oracle)?;
    let mut grad_y = oracle.grad_g_y(x, &pd.y);
    let vjp = oracle.vjp_gc_y(x, &pd.y, &pd.mu);
    linalg::axpy(1.0, &vjp, &mut grad_y);
    Ok((grad_y, oracle.gc(x, &pd.y)))
}

/// Gradients of `L_F(μ, y; x) = f + γ (g − v(x)) + ⟨μ, g^c⟩`.
///
/// `v(x)` is constant in `(y, μ)` and never evaluated.
pub fn lagrangian_f_grads(
    oracle: &(impl BilevelOracle + ?Sized),
    x: &[f64],
    pd: &PrimalDualPair,
    gamma: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_gamma(gamma)?;
    check_x(oracle, x)?;
    pd.check_dims(oracle)?;
    let mut grad_y = oracle.grad_f_y(x, &pd.y);
    linalg::axpy(gamma, &oracle.grad_g_y(x, &pd.y), &mut grad_y);
    linalg::axpy(1.0, &oracle.vjp_gc_y(x, &pd.y, &pd.mu), &mut grad_y);
    Ok((grad_y, oracle.gc(x, &pd.y)))
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(BloccError::config(format!(
            "penalty constant gamma must be positive and finite, got {gamma}"
        )));
    }
    Ok(())
}

/// Largest positive inequality residual (zero when all are satisfied).
pub fn max_ineq_violation(residuals: &[f64], num_ineq: usize) -> f64 {
    residuals[..num_ineq]
        .iter()
        .fold(0.0_f64, |m, r| m.max(*r))
}

/// Largest absolute equality residual.
pub fn max_eq_violation(residuals: &[f64], num_ineq: usize) -> f64 {
    linalg::max_abs(&residuals[num_ineq..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::pedagogical::{Pedagogical, PedagogicalUpper};

    #[test]
    fn g_grads_at_kkt_point_vanish() {
        let p = Pedagogical::new(PedagogicalUpper::Zero);
        let pd = PrimalDualPair::new(vec![3.0], vec![2.0]);
        let (gy, gm) = lagrangian_g_grads(&p, &[1.0], &pd).unwrap();
        assert_eq!(gy, vec![0.0]);
        assert_eq!(gm, vec![0.0]);
    }

    #[test]
    fn g_grads_zero_multiplier() {
        let p = Pedagogical::new(PedagogicalUpper::Zero);
        let pd = PrimalDualPair::new(vec![2.0], vec![0.0]);
        let (gy, gm) = lagrangian_g_grads(&p, &[1.0], &pd).unwrap();
        assert_eq!(gy, vec![0.0]);
        assert_eq!(gm, vec![1.0]);

        let pd = PrimalDualPair::new(vec![0.7], vec![0.0]);
        let (gy, _) = lagrangian_g_grads(&p, &[1.3], &pd).unwrap();
        assert_eq!(gy, p.grad_g_y(&[1.3], &[0.7]));
    }

    #[test]
    fn f_grads_collapse_and_linearity() {
        let p = Pedagogical::new(PedagogicalUpper::Zero);
        let pd = PrimalDualPair::new(vec![2.5], vec![0.7]);
        let a = lagrangian_f_grads(&p, &[0.9], &pd, 1.0).unwrap();
        let b = lagrangian_g_grads(&p, &[0.9], &pd).unwrap();
        assert_eq!(a, b);

        let pd0 = PrimalDualPair::new(vec![2.5], vec![0.0]);
        let (g1, _) = lagrangian_f_grads(&p, &[0.9], &pd0, 1.5).unwrap();
        let (g2, _) = lagrangian_f_grads(&p, &[0.9], &pd0, 3.0).unwrap();
        assert!((g2[0] - 2.0 * g1[0]).abs() < 1e-14);
    }

    #[test]
    fn f_grads_with_half_square_upper() {
        // f = ½ y², γ = 2, x = 1, y = 3, μ = 4 → 3 + 2·2·(3−2) − 4 = 3
        let p = Pedagogical::new(PedagogicalUpper::HalfSquare);
        let pd = PrimalDualPair::new(vec![3.0], vec![4.0]);
        let (gy, gm) = lagrangian_f_grads(&p, &[1.0], &pd, 2.0).unwrap();
        assert_eq!(gy, vec![3.0]);
        assert_eq!(gm, vec![0.0]);
    }

    #[test]
    fn invalid_gamma_and_dims() {
        let p = Pedagogical::new(PedagogicalUpper::Zero);
        let pd = PrimalDualPair::new(vec![3.0], vec![2.0]);
        assert!(matches!(
            lagrangian_f_grads(&p, &[1.0], &pd, 0.0),
            Err(BloccError::Config(_))
        ));
        let bad = PrimalDualPair::new(vec![3.0, 1.0], vec![2.0]);
        match lagrangian_g_grads(&p, &[1.0], &bad) {
            Err(BloccError::DimensionMismatch { expected, got, .. }) => {
                assert_eq!((expected, got), (1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
