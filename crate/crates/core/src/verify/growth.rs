use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BloccError, Result};
use crate::linalg;
use crate::problem::BilevelOracle;

const MARGIN_TOL: f64 = -1e-9;
const BUDGET_FACTOR: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCheck {
    pub holds: bool,
    pub worst_margin: f64,
    pub samples: usize,
}

/// `g(x, y) − v − (α_g/2)‖y − y*‖²`
pub fn growth_margin(
    oracle: &(impl BilevelOracle + ?Sized),
    x: &[f64],
    y: &[f64],
    y_star: &[f64],
    v: f64,
) -> f64 {
    let d = linalg::dist(y, y_star);
    oracle.g(x, y) - v - 0.5 * oracle.alpha_g() * d * d
}

/// Sample feasible points of `Y(x)` uniformly from `sample_box` by rejection
/// and check the quadratic-growth margin at each.
///
/// `(y_star, v)` must come from a trusted oracle. The rejection budget is
/// `100 × samples` draws.
pub fn quadratic_growth_check(
    oracle: &(impl BilevelOracle + ?Sized),
    x: &[f64],
    y_star: &[f64],
    v: f64,
    sample_box: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<GrowthCheck> {
    if sample_box.len() != oracle.dim_y() {
        return Err(BloccError::config("sample box must have one interval per y coordinate"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = oracle.num_ineq();
    let mut worst = f64::INFINITY;
    let mut accepted = 0;
    for _ in 0..samples.saturating_mul(BUDGET_FACTOR) {
        if accepted == samples {
            break;
        }
        let y: Vec<f64> = sample_box.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
        if oracle.project_y(&y) != y {
            continue;
        }
        let r = oracle.gc(x, &y);
        if r[..m].iter().any(|v| *v > 0.0) || r[m..].iter().any(|v| *v != 0.0) {
            continue;
        }
        worst = worst.min(growth_margin(oracle, x, &y, y_star, v));
        accepted += 1;
    }
    if accepted < samples {
        return Err(BloccError::Sampling(format!(
            "found {accepted} of {samples} feasible samples within the rejection budget"
        )));
    }
    Ok(GrowthCheck {
        holds: worst >= MARGIN_TOL,
        worst_margin: worst,
        samples: accepted,
    })
}
