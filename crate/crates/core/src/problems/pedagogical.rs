//! The one-dimensional instance `g = (y − 2x)²`, `g^c = 3x − y`, `X = [0, 3]`.
//!
//! Its lower-level solution is `y*(x) = 3x` with multiplier `μ*(x) = 2x`, and
//! `v(x) = x²`. Dropping the multiplier from the value-function gradient
//! gives `−4x`, pointing the wrong way.

use crate::problem::{BilevelOracle, LipschitzBounds, StepsizeDefaults};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PedagogicalUpper {
    /// `f ≡ 0`
    Zero,
    /// `f = ½ y²`
    HalfSquare,
    /// `f = ½ (y − 3)²`, minimized over `X` at `x = 1`.
    ShiftedSquare,
}

#[derive(Debug, Clone)]
pub struct Pedagogical {
    upper: PedagogicalUpper,
}

pub fn build_pedagogical(upper: PedagogicalUpper) -> Pedagogical {
    Pedagogical::new(upper)
}

impl Pedagogical {
    pub const X_MAX: f64 = 3.0;

    pub fn new(upper: PedagogicalUpper) -> Self {
        Self { upper }
    }

    pub fn y_star(x: f64) -> f64 {
        3.0 * x
    }

    pub fn mu_star(x: f64) -> f64 {
        2.0 * x
    }

    pub fn value(x: f64) -> f64 {
        x * x
    }

    fn upper_shift(&self) -> Option<f64> {
        match self.upper {
            PedagogicalUpper::Zero => None,
            PedagogicalUpper::HalfSquare => Some(0.0),
            PedagogicalUpper::ShiftedSquare => Some(3.0),
        }
    }

    fn l_f1(&self) -> f64 {
        if self.upper_shift().is_some() {
            1.0
        } else {
            0.0
        }
    }
}

impl BilevelOracle for Pedagogical {
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
        match self.upper_shift() {
            Some(s) => 0.5 * (y[0] - s).powi(2),
            None => 0.0,
        }
    }
    fn grad_f_x(&self, _x: &[f64], _y: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn grad_f_y(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![self.upper_shift().map_or(0.0, |s| y[0] - s)]
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
        vec![3.0 * x[0] - y[0]]
    }
    fn vjp_gc_x(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        vec![3.0 * mu[0]]
    }
    fn vjp_gc_y(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        vec![-mu[0]]
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

    fn lipschitz(&self) -> Option<LipschitzBounds> {
        Some(LipschitzBounds {
            l_f1: self.l_f1(),
            l_g1: 2.0,
            l_gc0: 1.0,
            l_gc1: 0.0,
            s_max: Some(1.0),
            target_eps: None,
        })
    }

    fn default_stepsizes_g(&self) -> Option<StepsizeDefaults> {
        Some(StepsizeDefaults {
            eta_y: 0.25,
            eta_mu: 0.5,
        })
    }

    fn default_stepsizes_f(&self, gamma: f64) -> Option<StepsizeDefaults> {
        Some(StepsizeDefaults {
            eta_y: 1.0 / (self.l_f1() + 2.0 * gamma),
            eta_mu: gamma,
        })
    }
}
