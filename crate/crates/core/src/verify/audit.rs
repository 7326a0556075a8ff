use crate::error::Result;
use crate::linalg;
use crate::problem::BilevelOracle;
use crate::verify::fd::finite_diff_grad_auto;

/// `‖a − b‖ / max(‖a‖, ‖b‖, 1)`
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    linalg::dist(a, b) / linalg::norm(a).max(linalg::norm(b)).max(1.0)
}

/// Worst relative errors between analytic derivatives and central
/// differences over a set of audit points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GradientAudit {
    pub grad_f_x: f64,
    pub grad_f_y: f64,
    pub grad_g_x: f64,
    pub grad_g_y: f64,
    pub vjp_gc_x: f64,
    pub vjp_gc_y: f64,
}

impl GradientAudit {
    pub fn worst(&self) -> f64 {
        [self.grad_f_x, self.grad_f_y, self.grad_g_x, self.grad_g_y, self.vjp_gc_x, self.vjp_gc_y]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Audit every analytic derivative at each `(x, y, μ)` triple. Points must
/// be interior enough that the finite-difference stencil stays in the
/// domain of the oracle.
pub fn gradient_audit(
    oracle: &(impl BilevelOracle + ?Sized),
    points: &[(Vec<f64>, Vec<f64>, Vec<f64>)],
) -> Result<GradientAudit> {
    let mut a = GradientAudit::default();
    for (x, y, mu) in points {
        let pair = |fd: Vec<f64>, an: Vec<f64>| relative_error(&fd, &an);
        a.grad_f_x = a.grad_f_x.max(pair(finite_diff_grad_auto(|p| oracle.f(p, y), x)?, oracle.grad_f_x(x, y)));
        a.grad_f_y = a.grad_f_y.max(pair(finite_diff_grad_auto(|p| oracle.f(x, p), y)?, oracle.grad_f_y(x, y)));
        a.grad_g_x = a.grad_g_x.max(pair(finite_diff_grad_auto(|p| oracle.g(p, y), x)?, oracle.grad_g_x(x, y)));
        a.grad_g_y = a.grad_g_y.max(pair(finite_diff_grad_auto(|p| oracle.g(x, p), y)?, oracle.grad_g_y(x, y)));
        a.vjp_gc_x = a.vjp_gc_x.max(pair(
            finite_diff_grad_auto(|p| linalg::dot(mu, &oracle.gc(p, y)), x)?,
            oracle.vjp_gc_x(x, y, mu),
        ));
        a.vjp_gc_y = a.vjp_gc_y.max(pair(
            finite_diff_grad_auto(|p| linalg::dot(mu, &oracle.gc(x, p)), y)?,
            oracle.vjp_gc_y(x, y, mu),
        ));
    }
    Ok(a)
}
