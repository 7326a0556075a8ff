//! Value-function and penalty-gradient estimates against independent
//! references, and sampled quadratic growth of the lower level.

use blocc::maxmin::{solve_maxmin, LowerLagrangian, PenaltyLagrangian};
use blocc::problems::{Pedagogical, PedagogicalUpper, Toy};
use blocc::solver::{default_inner_configs, estimate_grad_f, estimate_grad_v};
use blocc::verify::{finite_diff_grad_auto, grid_oracle_lower, quadratic_growth_check, relative_error};
use blocc::{BilevelOracle, MaxMinMode, PrimalDualPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIGHT_ITERS: usize = 200_000;
const TIGHT_TOL: f64 = 1e-12;
const GRID: usize = 2001;

fn tight_pairs(o: &dyn BilevelOracle, x: &[f64], gamma: f64) -> (PrimalDualPair, PrimalDualPair) {
    let (cg, cf) = default_inner_configs(o, gamma, MaxMinMode::Accelerated, TIGHT_ITERS, 10, TIGHT_TOL).unwrap();
    let init = PrimalDualPair::projected_origin(o);
    let g = solve_maxmin(&LowerLagrangian::new(o, x), &cg, &init).unwrap().pd;
    let f = solve_maxmin(&PenaltyLagrangian::new(o, x, gamma), &cf, &init).unwrap().pd;
    (g, f)
}

/// `F_γ(x) = f(x, y_F) + γ (g(x, y_F) − v(x))` with `y_F` from a tight
/// penalized solve and `v` from the grid oracle.
fn penalty_value(o: &dyn BilevelOracle, x: &[f64], gamma: f64, search: (f64, f64)) -> f64 {
    let (_, pd_f) = tight_pairs(o, x, gamma);
    let (_, v) = grid_oracle_lower(o, x, GRID, &[search]).unwrap();
    o.f(x, &pd_f.y) + gamma * (o.g(x, &pd_f.y) - v)
}

#[test]
fn pedagogical_grad_v_and_suppressed_variant() {
    let p = Pedagogical::new(PedagogicalUpper::Zero);
    for x in [0.5, 1.0, 2.0] {
        let (pd_g, _) = tight_pairs(&p, &[x], 10.0);
        let g = estimate_grad_v(&p, &[x], &pd_g).unwrap()[0];
        assert!((g - 2.0 * x).abs() <= 1e-4, "x = {x}: {g}");
        let suppressed = estimate_grad_v(&p, &[x], &PrimalDualPair::new(pd_g.y.clone(), vec![0.0])).unwrap()[0];
        assert!((suppressed + 4.0 * x).abs() <= 1e-4, "x = {x}: {suppressed}");
    }
}

fn check_grad_f(o: &dyn BilevelOracle, gamma: f64, search: (f64, f64), seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10 {
        let x = rng.gen_range(0.1..2.9);
        let (pd_g, pd_f) = tight_pairs(o, &[x], gamma);
        let gv = estimate_grad_v(o, &[x], &pd_g).unwrap();
        let gf = estimate_grad_f(o, &[x], &pd_f, &gv, gamma).unwrap();
        let fd = finite_diff_grad_auto(|p| penalty_value(o, p, gamma, search), &[x]).unwrap();
        let err = relative_error(&gf, &fd);
        assert!(err <= 1e-3, "x = {x}: estimate {gf:?}, fd {fd:?}");
    }
}

#[test]
fn penalty_gradient_matches_differences_on_pedagogical() {
    check_grad_f(&Pedagogical::new(PedagogicalUpper::ShiftedSquare), 10.0, (-5.0, 20.0), 1);
}

#[test]
fn penalty_gradient_matches_differences_on_toy() {
    check_grad_f(&Toy, 5.0, (-2.0, 8.0), 2);
}

#[test]
fn quadratic_growth_holds_on_samples() {
    let p = Pedagogical::new(PedagogicalUpper::Zero);
    let r = quadratic_growth_check(&p, &[1.0], &[3.0], 1.0, &[(-5.0, 15.0)], 10_000, 0).unwrap();
    assert!(r.holds && r.worst_margin >= -1e-9, "{r:?}");
    for x in [0.5, 1.5] {
        let r = quadratic_growth_check(&Toy, &[x], &[x], x * x, &[(x - 10.0, x + 10.0)], 10_000, 1).unwrap();
        assert!(r.holds && r.worst_margin >= -1e-9, "x = {x}: {r:?}");
    }
}
