//! One-dimensional affine-constrained quadratic used for solver tests.
//!
//! `g(x, y) = ½ a y² + b y`, constraint `r + x − y ≤ 0`, `f(x, y) = ½ y²`.
//! With `x = 0` the constraint reads `r − y ≤ 0`.

use crate::problem::{BilevelOracle, LipschitzBounds, StepsizeDefaults};

#[derive(Debug, Clone)]
pub struct ScalarQp {
    pub curvature: f64,
    pub linear: f64,
    pub rhs: f64,
    y_lower: f64,
}

impl ScalarQp {
    pub fn new(curvature: f64, linear: f64, rhs: f64) -> Self {
        assert!(curvature > 0.0, "curvature must be positive");
        Self {
            curvature,
            linear,
            rhs,
            y_lower: f64::NEG_INFINITY,
        }
    }

    /// Restrict `Y` to `[lo, ∞)`.
    pub fn with_y_lower_bound(mut self, lo: f64) -> Self {
        self.y_lower = lo;
        self
    }
}

impl BilevelOracle for ScalarQp {
    fn dim_x(&self) -> usize {
        1
    }
    fn dim_y(&self) -> usize {
        1
    }
    fn num_ineq(&self) -> usize {
        1
    }

    fn f(&self, _x: &[f64], y: &[f64]) -> f64 {
        0.5 * y[0] * y[0]
    }
    fn grad_f_x(&self, _x: &[f64], _y: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn grad_f_y(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![y[0]]
    }

    fn g(&self, _x: &[f64], y: &[f64]) -> f64 {
        0.5 * self.curvature * y[0] * y[0] + self.linear * y[0]
    }
    fn grad_g_x(&self, _x: &[f64], _y: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn grad_g_y(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![self.curvature * y[0] + self.linear]
    }

    fn gc(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![self.rhs + x[0] - y[0]]
    }
    fn vjp_gc_x(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        vec![mu[0]]
    }
    fn vjp_gc_y(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        vec![-mu[0]]
    }

    fn project_x(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn project_y(&self, v: &[f64]) -> Vec<f64> {
        vec![v[0].max(self.y_lower)]
    }

    fn alpha_g(&self) -> f64 {
        self.curvature
    }

    fn lipschitz(&self) -> Option<LipschitzBounds> {
        Some(LipschitzBounds {
            l_f1: 1.0,
            l_g1: self.curvature,
            l_gc0: 1.0,
            l_gc1: 0.0,
            s_max: Some(1.0),
            target_eps: None,
        })
    }

    fn default_stepsizes_g(&self) -> Option<StepsizeDefaults> {
        Some(StepsizeDefaults {
            eta_y: 0.5 / self.curvature,
            eta_mu: 0.5 * self.curvature,
        })
    }
}
