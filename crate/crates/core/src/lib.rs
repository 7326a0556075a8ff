//! Penalty-based primal-dual solver for bilevel optimization with coupled
//! lower-level constraints.
//!
//! The problem class is
//!
//! ```text
//! min_{x ∈ X}  f(x, y*(x))   with   y*(x) = argmin_{y ∈ Y, g^c(x, y) ≤ 0} g(x, y)
//! ```
//!
//! and is solved by projected gradient descent on the penalty surrogate
//! `F_γ(x) = min_{y ∈ Y(x)} f(x, y) + γ (g(x, y) − v(x))`, where the value
//! function `v(x)` and `F_γ` are both handled through their Lagrangian
//! max-min forms. Each outer step runs two inner primal-dual solves
//! ([`maxmin`]) and assembles the hypergradient from the resulting
//! multipliers ([`solver`]).
//!
//! Module map:
//!
//! - [`problem`]: the [`BilevelOracle`] trait and Lagrangian gradients.
//! - [`maxmin`]: accelerated and single-loop inner saddle-point solvers.
//! - [`solver`]: the outer loop and gradient estimates.
//! - [`problems`]: concrete instances (pedagogical, toy, SVM, transport).
//! - [`verify`]: finite differences, grid and active-set oracles, KKT audits.

pub mod error;
pub mod linalg;
pub mod maxmin;
pub mod problem;
pub mod problems;
pub mod solver;
pub mod verify;

pub use error::{BloccError, Result};
pub use maxmin::{MaxMinConfig, MaxMinMode, MaxMinResult};
pub use problem::{BilevelOracle, LipschitzBounds, PrimalDualPair, StepsizeDefaults};
pub use solver::{BloccConfig, IterateTrace, SolveResult};
