use crate::error::{BloccError, Result};

/// `1e-6 · max(1, |p|)`
pub fn default_step(p: f64) -> f64 {
    1e-6 * p.abs().max(1.0)
}

/// Central differences with a fixed step `h`.
pub fn finite_diff_grad(f: impl Fn(&[f64]) -> f64, point: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(BloccError::config(format!("finite-difference step must be positive, got {h}")));
    }
    central(f, point, |_| h)
}

/// Central differences with the per-coordinate step [`default_step`].
pub fn finite_diff_grad_auto(f: impl Fn(&[f64]) -> f64, point: &[f64]) -> Result<Vec<f64>> {
    central(f, point, default_step)
}

fn central(f: impl Fn(&[f64]) -> f64, point: &[f64], step: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let mut p = point.to_vec();
    let mut out = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let base = p[i];
        let h = step(base);
        p[i] = base + h;
        let up = f(&p);
        p[i] = base - h;
        let down = f(&p);
        p[i] = base;
        let d = (up - down) / (2.0 * h);
        if !d.is_finite() {
            return Err(BloccError::NonFiniteStencil { coordinate: i });
        }
        out.push(d);
    }
    Ok(out)
}
