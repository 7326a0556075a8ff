use crate::error::{BloccError, Result};
use crate::problem::BilevelOracle;

const ZOOM_POINTS: usize = 21;
const ZOOM_TOL: f64 = 1e-12;

/// Brute-force `v(x) = min_{y ∈ Y, g^c(x, y) ≤ 0} g(x, y)` for `d_y ≤ 2`.
///
/// Evaluates `g` on a `resolution`-point-per-axis grid over `search`
/// (clipped to points that `project_y` leaves fixed), keeps the best
/// feasible point, then repeatedly re-grids a shrinking box around it until
/// the cell width drops below `1e-12`. Returns `(y*, v(x))`.
pub fn grid_oracle_lower(
    oracle: &(impl BilevelOracle + ?Sized),
    x: &[f64],
    resolution: usize,
    search: &[(f64, f64)],
) -> Result<(Vec<f64>, f64)> {
    let d = oracle.dim_y();
    if d == 0 || d > 2 {
        return Err(BloccError::config(format!("grid oracle supports d_y ≤ 2, got {d}")));
    }
    if oracle.num_eq() > 0 {
        return Err(BloccError::config("grid oracle cannot enforce equality constraints"));
    }
    if search.len() != d || resolution < 2 {
        return Err(BloccError::config("grid oracle needs one search interval per axis and ≥ 2 points"));
    }

    let feasible = |y: &[f64]| {
        oracle.project_y(y) == y && oracle.gc(x, y).iter().take(oracle.num_ineq()).all(|r| *r <= 0.0)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let consider = |y: Vec<f64>, best: &mut Option<(Vec<f64>, f64)>| {
        if feasible(&y) {
            let v = oracle.g(x, &y);
            if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                *best = Some((y, v));
            }
        }
    };

    let mut boxes: Vec<(f64, f64)> = search.to_vec();
    let mut n = resolution;
    loop {
        let axes: Vec<Vec<f64>> = boxes
            .iter()
            .map(|&(lo, hi)| (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
            .collect();
        if d == 1 {
            for &a in &axes[0] {
                consider(vec![a], &mut best);
            }
        } else {
            for &a in &axes[0] {
                for &b in &axes[1] {
                    consider(vec![a, b], &mut best);
                }
            }
        }
        let Some((center, _)) = &best else {
            return Err(BloccError::Infeasible(format!(
                "no feasible grid point for x = {x:?} in {search:?}"
            )));
        };
        let cells: Vec<f64> = boxes.iter().map(|&(lo, hi)| (hi - lo) / (n - 1) as f64).collect();
        if cells.iter().all(|c| *c < ZOOM_TOL) {
            break;
        }
        boxes = center
            .iter()
            .zip(&cells)
            .map(|(c, w)| (c - w, c + w))
            .collect();
        n = ZOOM_POINTS;
    }
    Ok(best.expect("loop exits only with a feasible point"))
}
