//! Hyperparameter selection for a soft-margin linear SVM.
//!
//! The upper level tunes per-sample slack caps `c` against an exponential
//! validation loss plus `½‖c‖²`. The lower level trains `(w, b, ξ)` on the
//! training block:
//!
//! ```text
//! min ½‖w‖² + ridge (b² + ‖ξ‖²)
//! s.t. 1 − ξ_i − l_i (z_iᵀ w + b) ≤ 0,   ξ_i − c_i ≤ 0
//! ```
//!
//! The ridge term makes the lower objective strongly convex in `(b, ξ)`.
//! Constraints are affine in `y` and `Y` is unconstrained, so both inner
//! solver variants apply.
//!
//! Layout: `y = (w, b, ξ)`, constraints `[margin rows; cap rows]`.

use crate::error::{BloccError, Result};
use crate::linalg;
use crate::problem::{BilevelOracle, LipschitzBounds, StepsizeDefaults};
use crate::problems::libsvm::SvmDataset;

/// Upper-level domain for the caps `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvmDomain {
    Free,
    #[default]
    Nonnegative,
}

#[derive(Debug, Clone)]
pub struct Svm {
    train_z: Vec<Vec<f64>>,
    train_l: Vec<f64>,
    val_z: Vec<Vec<f64>>,
    val_l: Vec<f64>,
    test_z: Vec<Vec<f64>>,
    test_l: Vec<f64>,
    ridge: f64,
    domain: SvmDomain,
    jac_norm: f64,
    val_norm: f64,
    dual_smoothness: f64,
}

pub fn build_svm(dataset: &SvmDataset, ridge: f64) -> Result<Svm> {
    Svm::new(dataset, ridge, SvmDomain::default())
}

impl Svm {
    pub fn new(dataset: &SvmDataset, ridge: f64, domain: SvmDomain) -> Result<Self> {
        if dataset.n_train == 0 || dataset.n_val == 0 || dataset.n_test == 0 {
            return Err(BloccError::config(format!(
                "SVM needs nonempty train/val/test blocks, got {}/{}/{}",
                dataset.n_train, dataset.n_val, dataset.n_test
            )));
        }
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(BloccError::config(format!("ridge must be nonnegative, got {ridge}")));
        }
        if ridge == 0.0 {
            log::warn!("ridge = 0: lower objective is not strongly convex in (b, xi)");
        }
        let (tz, tl) = dataset.train();
        let (vz, vl) = dataset.val();
        let (sz, sl) = dataset.test();
        let mut svm = Self {
            train_z: tz.to_vec(),
            train_l: tl.to_vec(),
            val_z: vz.to_vec(),
            val_l: vl.to_vec(),
            test_z: sz.to_vec(),
            test_l: sl.to_vec(),
            ridge,
            domain,
            jac_norm: 0.0,
            val_norm: 0.0,
            dual_smoothness: 0.0,
        };
        svm.jac_norm = svm.estimate_jacobian_norm();
        svm.val_norm = augmented_norm(&svm.val_z);
        svm.dual_smoothness = if ridge > 0.0 {
            svm.estimate_dual_smoothness()
        } else {
            svm.jac_norm.powi(2) / svm.alpha_g().max(f64::MIN_POSITIVE)
        };
        Ok(svm)
    }

    pub fn n_train(&self) -> usize {
        self.train_l.len()
    }

    pub fn n_features(&self) -> usize {
        self.train_z.first().map_or(0, Vec::len)
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Spectral norm of the constraint Jacobian in `y`.
    pub fn jacobian_norm(&self) -> f64 {
        self.jac_norm
    }

    /// Smoothness of the lower-level dual function, `λ_max(J H⁻¹ Jᵀ)` with
    /// `H` the (diagonal) Hessian of `g` in `y`.
    pub fn dual_smoothness(&self) -> f64 {
        self.dual_smoothness
    }

    fn lower_hessian_diag(&self) -> Vec<f64> {
        let p = self.n_features();
        let mut h = vec![1.0; self.dim_y()];
        for v in &mut h[p..] {
            *v = 2.0 * self.ridge;
        }
        h
    }

    /// Curvature of the validation loss in `(w, b)` at `w = 0, b = 0`:
    /// `e · ‖[Z_val, 1]‖²`.
    pub fn upper_curvature(&self) -> f64 {
        std::f64::consts::E * self.val_norm * self.val_norm
    }

    fn split_y<'a>(&self, y: &'a [f64]) -> (&'a [f64], f64, &'a [f64]) {
        let p = self.n_features();
        (&y[..p], y[p], &y[p + 1..])
    }

    fn score(w: &[f64], b: f64, z: &[f64]) -> f64 {
        linalg::dot(w, z) + b
    }

    /// Fraction of `(z, l)` pairs with `sign(zᵀw + b) = l` (ties count as +1).
    fn accuracy_on(&self, y: &[f64], z: &[Vec<f64>], l: &[f64]) -> f64 {
        let (w, b, _) = self.split_y(y);
        let hits = z
            .iter()
            .zip(l)
            .filter(|(zi, li)| {
                let pred = if Self::score(w, b, zi) >= 0.0 { 1.0 } else { -1.0 };
                pred == **li
            })
            .count();
        hits as f64 / l.len() as f64
    }

    pub fn test_accuracy(&self, y: &[f64]) -> f64 {
        self.accuracy_on(y, &self.test_z, &self.test_l)
    }

    pub fn val_accuracy(&self, y: &[f64]) -> f64 {
        self.accuracy_on(y, &self.val_z, &self.val_l)
    }

    /// Exponential loss on `(z, l)` pairs.
    fn exp_loss(w: &[f64], b: f64, z: &[Vec<f64>], l: &[f64]) -> f64 {
        z.iter()
            .zip(l)
            .map(|(zi, li)| (1.0 - li * Self::score(w, b, zi)).exp())
            .sum()
    }

    pub fn val_loss(&self, y: &[f64]) -> f64 {
        let (w, b, _) = self.split_y(y);
        Self::exp_loss(w, b, &self.val_z, &self.val_l)
    }

    pub fn test_loss(&self, y: &[f64]) -> f64 {
        let (w, b, _) = self.split_y(y);
        Self::exp_loss(w, b, &self.test_z, &self.test_l)
    }

    /// `J d` for the constraint Jacobian `J = ∂g^c/∂y`.
    fn jvp_y(&self, d: &[f64]) -> Vec<f64> {
        let (dw, db, dxi) = self.split_y(d);
        let n = self.n_train();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            out.push(-dxi[i] - self.train_l[i] * Self::score(dw, db, &self.train_z[i]));
        }
        out.extend_from_slice(dxi);
        out
    }

    fn vjp_y(&self, mu: &[f64]) -> Vec<f64> {
        let p = self.n_features();
        let n = self.n_train();
        let (mu_m, mu_c) = mu.split_at(n);
        let mut out = vec![0.0; p + 1 + n];
        for i in 0..n {
            let s = mu_m[i] * self.train_l[i];
            if s != 0.0 {
                linalg::axpy(-s, &self.train_z[i], &mut out[..p]);
                out[p] -= s;
            }
            out[p + 1 + i] = mu_c[i] - mu_m[i];
        }
        out
    }

    fn estimate_dual_smoothness(&self) -> f64 {
        let h = self.lower_hessian_diag();
        let m = self.num_constraints();
        let mut v = linalg::power_start(m);
        let mut lam = 0.0;
        for _ in 0..2000 {
            let u: Vec<f64> = self.vjp_y(&v).iter().zip(&h).map(|(a, b)| a / b).collect();
            let w = self.jvp_y(&u);
            let nw = linalg::norm(&w);
            if nw == 0.0 {
                return 0.0;
            }
            let converged = (nw - lam).abs() <= 1e-10 * nw;
            lam = nw;
            v = linalg::scale(1.0 / nw, &w);
            if converged {
                break;
            }
        }
        lam
    }

    fn estimate_jacobian_norm(&self) -> f64 {
        let d = self.dim_y();
        let mut v = linalg::power_start(d);
        let mut sigma2 = 0.0;
        for _ in 0..500 {
            let w = self.vjp_y(&self.jvp_y(&v));
            let nw = linalg::norm(&w);
            if nw == 0.0 {
                return 0.0;
            }
            let converged = (nw - sigma2).abs() <= 1e-12 * nw;
            sigma2 = nw;
            v = linalg::scale(1.0 / nw, &w);
            if converged {
                break;
            }
        }
        sigma2.sqrt()
    }
}

/// Spectral norm of the rows `[z_i, 1]`.
fn augmented_norm(z: &[Vec<f64>]) -> f64 {
    let p = z.first().map_or(0, Vec::len);
    let mut v = linalg::power_start(p + 1);
    let mut sigma2 = 0.0;
    for _ in 0..500 {
        let mut w = vec![0.0; p + 1];
        for zi in z {
            let s = linalg::dot(&v[..p], zi) + v[p];
            linalg::axpy(s, zi, &mut w[..p]);
            w[p] += s;
        }
        let nw = linalg::norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let converged = (nw - sigma2).abs() <= 1e-12 * nw;
        sigma2 = nw;
        v = linalg::scale(1.0 / nw, &w);
        if converged {
            break;
        }
    }
    sigma2.sqrt()
}

impl BilevelOracle for Svm {
    fn dim_x(&self) -> usize {
        self.n_train()
    }
    fn dim_y(&self) -> usize {
        self.n_features() + 1 + self.n_train()
    }
    fn num_ineq(&self) -> usize {
        2 * self.n_train()
    }

    fn f(&self, x: &[f64], y: &[f64]) -> f64 {
        self.val_loss(y) + 0.5 * linalg::dot(x, x)
    }
    fn grad_f_x(&self, x: &[f64], _y: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
    fn grad_f_y(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
        let p = self.n_features();
        let (w, b, _) = self.split_y(y);
        let mut out = vec![0.0; self.dim_y()];
        for (zi, li) in self.val_z.iter().zip(&self.val_l) {
            let e = (1.0 - li * Self::score(w, b, zi)).exp();
            linalg::axpy(-li * e, zi, &mut out[..p]);
            out[p] -= li * e;
        }
        out
    }

    fn g(&self, _x: &[f64], y: &[f64]) -> f64 {
        let (w, b, xi) = self.split_y(y);
        0.5 * linalg::dot(w, w) + self.ridge * (b * b + linalg::dot(xi, xi))
    }
    fn grad_g_x(&self, x: &[f64], _y: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }
    fn grad_g_y(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
        let p = self.n_features();
        let mut out = y.to_vec();
        for v in &mut out[p..] {
            *v *= 2.0 * self.ridge;
        }
        out
    }

    fn gc(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let (w, b, xi) = self.split_y(y);
        let n = self.n_train();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            out.push(1.0 - xi[i] - self.train_l[i] * Self::score(w, b, &self.train_z[i]));
        }
        out.extend(xi.iter().zip(x).map(|(s, c)| s - c));
        out
    }
    fn vjp_gc_x(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        mu[self.n_train()..].iter().map(|m| -m).collect()
    }
    fn vjp_gc_y(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        self.vjp_y(mu)
    }

    fn project_x(&self, v: &[f64]) -> Vec<f64> {
        match self.domain {
            SvmDomain::Free => v.to_vec(),
            SvmDomain::Nonnegative => linalg::positive_part(v),
        }
    }
    fn project_y(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    fn alpha_g(&self) -> f64 {
        1.0_f64.min(2.0 * self.ridge)
    }

    fn x_bounds(&self) -> Vec<(f64, f64)> {
        let lo = match self.domain {
            SvmDomain::Free => f64::NEG_INFINITY,
            SvmDomain::Nonnegative => 0.0,
        };
        vec![(lo, f64::INFINITY); self.dim_x()]
    }

    /// Caps of at least one keep the lower level feasible (`w = 0`, `ξ = 1`).
    fn init_box(&self) -> Vec<(f64, f64)> {
        vec![(1.0, 2.0); self.dim_x()]
    }

    fn lipschitz(&self) -> Option<LipschitzBounds> {
        None
    }

    // Dual steps are the inverse dual smoothness; adding f only increases the
    // penalized Hessian, so γ/L_D is safe on the F side.
    fn default_stepsizes_g(&self) -> Option<StepsizeDefaults> {
        let l_g1 = 1.0_f64.max(2.0 * self.ridge);
        Some(StepsizeDefaults {
            eta_y: 1.0 / l_g1,
            eta_mu: 1.0 / self.dual_smoothness.max(f64::MIN_POSITIVE),
        })
    }

    fn default_stepsizes_f(&self, gamma: f64) -> Option<StepsizeDefaults> {
        let l_g1 = 1.0_f64.max(2.0 * self.ridge);
        Some(StepsizeDefaults {
            eta_y: 1.0 / (gamma * l_g1 + self.upper_curvature()),
            eta_mu: gamma / self.dual_smoothness.max(f64::MIN_POSITIVE),
        })
    }

    /// Scales that turn the default `η_y` into the inverse diagonal Hessian.
    fn y_step_scale_g(&self) -> Option<Vec<f64>> {
        if self.ridge == 0.0 {
            return None;
        }
        let l_g1 = 1.0_f64.max(2.0 * self.ridge);
        Some(self.lower_hessian_diag().iter().map(|h| l_g1 / h).collect())
    }

    /// The loss couples `(w, b)`, so that block keeps the spectral bound and
    /// only the slack block `ξ` is rescaled to its exact curvature `2γ ridge`.
    fn y_step_scale_f(&self, gamma: f64) -> Option<Vec<f64>> {
        if self.ridge == 0.0 {
            return None;
        }
        let base = gamma * 1.0_f64.max(2.0 * self.ridge) + self.upper_curvature();
        let p = self.n_features();
        let mut s = vec![1.0; self.dim_y()];
        for v in &mut s[p + 1..] {
            *v = base / (2.0 * gamma * self.ridge);
        }
        Some(s)
    }
}
