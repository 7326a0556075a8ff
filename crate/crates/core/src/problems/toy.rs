//! Nonconvex toy instance with an active coupled constraint.
//!
//! ```text
//! f(x, y) = e^{2−y} / (2 + cos 6x) + ½ ln((4x − 2)² + 1)
//! g(x, y) = (y − 2x)²,   y − x ≤ 0,   X = [0, 3]
//! ```
//!
//! For `x ≥ 0` the constraint is active and `y*(x) = x`, so the bilevel
//! problem reduces to minimizing `φ(x) = f(x, x)` over `[0, 3]`.

use crate::problem::{BilevelOracle, StepsizeDefaults};

#[derive(Debug, Clone, Default)]
pub struct Toy;

pub fn build_toy() -> Toy {
    Toy
}

impl Toy {
    pub const X_MAX: f64 = 3.0;

    /// Reduced objective `φ(x) = f(x, x)`.
    pub fn phi(x: f64) -> f64 {
        Toy.f(&[x], &[x])
    }

    /// `φ'(x)` by the chain rule.
    pub fn phi_prime(x: f64) -> f64 {
        Toy.grad_f_x(&[x], &[x])[0] + Toy.grad_f_y(&[x], &[x])[0]
    }
}

impl BilevelOracle for Toy {
    fn dim_x(&self) -> usize {
        1
    }
    fn dim_y(&self) -> usize {
        1
    }
    fn num_ineq(&self) -> usize {
        1
    }

    fn f(&self, x: &[f64], y: &[f64]) -> f64 {
        let (x, y) = (x[0], y[0]);
        let s = 4.0 * x - 2.0;
        (2.0 - y).exp() / (2.0 + (6.0 * x).cos()) + 0.5 * (s * s + 1.0).ln()
    }
    fn grad_f_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let (x, y) = (x[0], y[0]);
        let den = 2.0 + (6.0 * x).cos();
        let s = 4.0 * x - 2.0;
        vec![(2.0 - y).exp() * 6.0 * (6.0 * x).sin() / (den * den) + 4.0 * s / (s * s + 1.0)]
    }
    fn grad_f_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![-(2.0 - y[0]).exp() / (2.0 + (6.0 * x[0]).cos())]
    }

    fn g(&self, x: &[f64], y: &[f64]) -> f64 {
        (y[0] - 2.0 * x[0]).powi(2)
    }
    fn grad_g_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![-4.0 * (y[0] - 2.0 * x[0])]
    }
    fn grad_g_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![2.0 * (y[0] - 2.0 * x[0])]
    }

    fn gc(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![y[0] - x[0]]
    }
    fn vjp_gc_x(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        vec![-mu[0]]
    }
    fn vjp_gc_y(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        vec![mu[0]]
    }

    fn project_x(&self, v: &[f64]) -> Vec<f64> {
        vec![v[0].clamp(0.0, Self::X_MAX)]
    }
    fn project_y(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    fn alpha_g(&self) -> f64 {
        2.0
    }
    fn x_bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, Self::X_MAX)]
    }

    fn default_stepsizes_g(&self) -> Option<StepsizeDefaults> {
        Some(StepsizeDefaults {
            eta_y: 0.25,
            eta_mu: 1.0,
        })
    }

    // ∂²f/∂y² = e^{2−y}/(2 + cos 6x) ≤ e² near the feasible region y ≈ x ≥ 0.
    fn default_stepsizes_f(&self, gamma: f64) -> Option<StepsizeDefaults> {
        Some(StepsizeDefaults {
            eta_y: 1.0 / (2.0 * gamma + 7.4),
            eta_mu: gamma,
        })
    }
}
