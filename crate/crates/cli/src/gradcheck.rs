//! Derivative audits and value-function gradient checks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use blocc::maxmin::{solve_maxmin, LowerLagrangian, MaxMinMode};
use blocc::problems::{Pedagogical, Toy};
use blocc::solver::{default_inner_configs, estimate_grad_v};
use blocc::verify::{finite_diff_grad_auto, gradient_audit, grid_oracle_lower, GradientAudit};
use blocc::{BilevelOracle, PrimalDualPair};

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;
use crate::experiments::{initial_point, Instance, ProblemSource};

/// Worst allowed relative error between analytic derivatives and central differences.
pub const AUDIT_TOL: f64 = 1e-4;
/// Allowed absolute error of the value-function gradient estimate.
pub const GRAD_V_TOL: f64 = 1e-4;
pub const AUDIT_POINTS: usize = 5;

const TIGHT_ITERS: usize = 200_000;
const TIGHT_TOL: f64 = 1e-12;
/// Grid-oracle search interval for the toy lower level (`y* = x ∈ [0, 3]`).
const TOY_SEARCH: (f64, f64) = (-2.0, 8.0);
const GRID_RESOLUTION: usize = 2001;

#[derive(Debug, Clone, Serialize)]
pub struct GradVCheck {
    pub x: f64,
    pub estimate: f64,
    pub reference: f64,
    /// Estimate with the multiplier term dropped.
    pub without_multiplier: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub target: &'static str,
    pub audit: BTreeMap<&'static str, f64>,
    pub audit_worst: f64,
    pub grad_v: Vec<GradVCheck>,
    pub passed: bool,
}

/// Lower-level primal-dual solution at `x` solved to `1e-12`.
pub fn tight_lower_solve(oracle: &dyn BilevelOracle, x: &[f64], ty: usize) -> Result<PrimalDualPair, CliError> {
    let (cfg, _) = default_inner_configs(oracle, 1.0, MaxMinMode::Accelerated, TIGHT_ITERS, ty, TIGHT_TOL)?;
    let lag = LowerLagrangian::new(oracle, x).with_step_scale(oracle.y_step_scale_g());
    Ok(solve_maxmin(&lag, &cfg, &PrimalDualPair::projected_origin(oracle))?.pd)
}

fn random_audit_points(oracle: &dyn BilevelOracle, rng: &mut ChaCha8Rng) -> Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let m = oracle.num_ineq();
    (0..AUDIT_POINTS)
        .map(|_| {
            let x = initial_point(oracle, rng);
            let y: Vec<f64> = (0..oracle.dim_y()).map(|_| rng.gen_range(0.1..0.9)).collect();
            let y = oracle.project_y(&y);
            let mu: Vec<f64> = (0..m + oracle.num_eq())
                .map(|i| if i < m { rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) })
                .collect();
            (x, y, mu)
        })
        .collect()
}

fn grad_v_check(oracle: &dyn BilevelOracle, x: f64, reference: f64, ty: usize) -> Result<GradVCheck, CliError> {
    let pd = tight_lower_solve(oracle, &[x], ty)?;
    let estimate = estimate_grad_v(oracle, &[x], &pd)?[0];
    let without_multiplier = oracle.grad_g_x(&[x], &pd.y)[0];
    Ok(GradVCheck {
        x,
        estimate,
        reference,
        without_multiplier,
        error: (estimate - reference).abs(),
    })
}

/// `∇v(x)` against `2x` (from `v(x) = x²`) on the pedagogical instance.
pub fn pedagogical_grad_v(p: &Pedagogical, xs: &[f64], ty: usize) -> Result<Vec<GradVCheck>, CliError> {
    xs.iter()
        .map(|&x| grad_v_check(p, x, 2.0 * x, ty))
        .collect()
}

/// `∇v(x)` against central differences of the grid-oracle value function.
pub fn toy_grad_v(xs: &[f64], ty: usize) -> Result<Vec<GradVCheck>, CliError> {
    xs.iter()
        .map(|&x| {
            let v = |p: &[f64]| {
                grid_oracle_lower(&Toy, p, GRID_RESOLUTION, &[TOY_SEARCH]).map_or(f64::NAN, |(_, v)| v)
            };
            let reference = finite_diff_grad_auto(v, &[x])?[0];
            grad_v_check(&Toy, x, reference, ty)
        })
        .collect()
}

fn audit_map(a: &GradientAudit) -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("grad_f_x", a.grad_f_x),
        ("grad_f_y", a.grad_f_y),
        ("grad_g_x", a.grad_g_x),
        ("grad_g_y", a.grad_g_y),
        ("vjp_gc_x", a.vjp_gc_x),
        ("vjp_gc_y", a.vjp_gc_y),
    ])
}

pub fn run_gradcheck(run: &RunConfig) -> Result<GradcheckReport, CliError> {
    let target = run.target_or(Experiment::Pedagogical);
    let source = ProblemSource::load(target, run)?;
    let instance = source.instance(run.seed)?;
    let oracle = instance.oracle();
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let audit = gradient_audit(oracle, &random_audit_points(oracle, &mut rng))?;
    let grad_v = match &instance {
        Instance::Pedagogical(p) => pedagogical_grad_v(p, &[0.5, 1.0, 2.0], run.ty)?,
        Instance::Toy(_) => {
            let xs: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..2.9)).collect();
            toy_grad_v(&xs, run.ty)?
        }
        _ => Vec::new(),
    };
    let passed = audit.worst() <= AUDIT_TOL && grad_v.iter().all(|c| c.error <= GRAD_V_TOL);
    Ok(GradcheckReport {
        target: target.name(),
        audit_worst: audit.worst(),
        audit: audit_map(&audit),
        grad_v,
        passed,
    })
}

pub fn render(report: &GradcheckReport) -> String {
    let mut s = format!(
        "gradcheck {}: derivative audit worst relative error {:.3e} (tol {:.0e})\n",
        report.target, report.audit_worst, AUDIT_TOL
    );
    for c in &report.grad_v {
        s.push_str(&format!(
            "  x = {:<8} grad_v = {:+.9} reference = {:+.9} |err| = {:.2e}  without multiplier = {:+.6}\n",
            c.x, c.estimate, c.reference, c.error, c.without_multiplier
        ));
    }
    s.push_str(if report.passed { "PASS\n" } else { "FAIL\n" });
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use blocc::problems::{build_pedagogical, PedagogicalUpper};

    #[test]
    fn pedagogical_grad_v_is_two_x() {
        let p = build_pedagogical(PedagogicalUpper::Zero);
        for c in pedagogical_grad_v(&p, &[0.5, 1.0, 2.0], 20).unwrap() {
            assert!(c.error <= GRAD_V_TOL, "{c:?}");
            assert!((c.without_multiplier + 4.0 * c.x).abs() <= 1e-4, "{c:?}");
        }
    }
}
