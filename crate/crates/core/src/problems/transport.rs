//! Network design with logit passenger choice.
//!
//! The operator picks link capacities `x ≥ 0`. Passengers split between the
//! new network and an outside option through an entropy-regularized
//! utility, routing their share over links subject to flow conservation.
//!
//! ```text
//! f(x, y) = −Σ_k m_k y^k + Σ_a c_a x_a
//! g(x, y) = Σ_k w_k [ −ω t_ext,k (1 − y^k) + y^k (ln y^k − 1) + (1 − y^k)(ln(1 − y^k) − 1) ]
//!         + Σ_{k,a} ( −w_k ω t_a y_a^k + ridge (y_a^k)² )
//! ```
//!
//! Layout: `y = [y^k for k in markets] ++ [y_a^k for k, for a]`, so link flow
//! `(k, a)` sits at `K + k·A + a`. Constraint rows are the capacity
//! inequalities `Σ_k w_k y_a^k − x_a ≤ 0` followed by one conservation
//! equality per `(market, station)`:
//! `Σ_out y_a^k − Σ_in y_a^k − [s = o] y^k + [s = d] y^k = 0`.
//!
//! The conservation rows of one market always sum to zero, so they are
//! linearly dependent and their multipliers are only defined up to a shift
//! that does not affect any gradient.

use crate::error::Result;
use crate::linalg;
use crate::problem::{BilevelOracle, StepsizeDefaults};
use crate::problems::network::NetworkSpec;

/// Share curvature `w/(y(1−y))` assumed by the scaled share steps; exact at
/// `y ≈ 0.053` and an overestimate on the middle of the box.
const SHARE_STEP_CURVATURE: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct Transport {
    spec: NetworkSpec,
    dual_smoothness: f64,
}

pub fn build_transport(spec: NetworkSpec) -> Result<Transport> {
    Transport::new(spec)
}

impl Transport {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        spec.validate()?;
        if spec.ridge == 0.0 {
            log::warn!("ridge = 0: lower objective is not strongly convex in link flows");
        }
        let mut t = Self {
            spec,
            dual_smoothness: 0.0,
        };
        t.dual_smoothness = t.estimate_dual_smoothness();
        Ok(t)
    }

    /// Upper bound on the lower-level dual smoothness `λ_max(J H⁻¹ Jᵀ)`, with
    /// `H` the smallest curvature of `g` on the box (`4w` for shares,
    /// `2 ridge` for link flows).
    pub fn dual_smoothness(&self) -> f64 {
        self.dual_smoothness
    }

    fn min_curvature(&self) -> Vec<f64> {
        let mut h = vec![2.0 * self.spec.ridge; self.dim_y()];
        for (hk, m) in h.iter_mut().zip(&self.spec.markets) {
            *hk = 4.0 * m.demand;
        }
        h
    }

    fn max_curvature(&self) -> f64 {
        let eps = self.spec.eps_box;
        let max_w = self.spec.markets.iter().map(|m| m.demand).fold(0.0, f64::max);
        (max_w / (eps * (1.0 - eps))).max(2.0 * self.spec.ridge)
    }

    fn estimate_dual_smoothness(&self) -> f64 {
        let h = self.min_curvature();
        if h.iter().any(|v| *v <= 0.0) {
            return f64::INFINITY;
        }
        let zero_x = vec![0.0; self.dim_x()];
        let m = self.num_constraints();
        let mut v = linalg::power_start(m);
        let mut lam = 0.0;
        for _ in 0..2000 {
            let u: Vec<f64> = self
                .vjp_gc_y(&zero_x, &[], &v)
                .iter()
                .zip(&h)
                .map(|(a, b)| a / b)
                .collect();
            // gc is linear in y when x = 0
            let w = self.gc(&zero_x, &u);
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

    fn step_scale(&self) -> Vec<f64> {
        let base = self.max_curvature();
        let mut s = vec![base / (2.0 * self.spec.ridge); self.dim_y()];
        for (sk, m) in s.iter_mut().zip(&self.spec.markets) {
            *sk = base / (SHARE_STEP_CURVATURE * m.demand);
        }
        s
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    fn n_markets(&self) -> usize {
        self.spec.markets.len()
    }

    fn n_links(&self) -> usize {
        self.spec.links.len()
    }

    fn n_stations(&self) -> usize {
        self.spec.num_stations()
    }

    pub fn link_index(&self, market: usize, link: usize) -> usize {
        self.n_markets() + market * self.n_links() + link
    }

    /// Largest absolute flow-conservation residual.
    pub fn conservation_residual(&self, x: &[f64], y: &[f64]) -> f64 {
        linalg::max_abs(&self.gc(x, y)[self.n_links()..])
    }

    /// Largest positive capacity residual.
    pub fn capacity_violation(&self, x: &[f64], y: &[f64]) -> f64 {
        self.gc(x, y)[..self.n_links()]
            .iter()
            .fold(0.0_f64, |m, r| m.max(*r))
    }

    /// Operator utility `−f(x, y)`.
    pub fn utility(&self, x: &[f64], y: &[f64]) -> f64 {
        -self.f(x, y)
    }
}

impl BilevelOracle for Transport {
    fn dim_x(&self) -> usize {
        self.n_links()
    }
    fn dim_y(&self) -> usize {
        self.n_markets() * (1 + self.n_links())
    }
    fn num_ineq(&self) -> usize {
        self.n_links()
    }
    fn num_eq(&self) -> usize {
        self.n_markets() * self.n_stations()
    }

    fn f(&self, x: &[f64], y: &[f64]) -> f64 {
        let revenue: f64 = self.spec.markets.iter().zip(y).map(|(m, yk)| m.revenue * yk).sum();
        let cost: f64 = self.spec.links.iter().zip(x).map(|(l, xa)| l.cost * xa).sum();
        cost - revenue
    }
    fn grad_f_x(&self, _x: &[f64], _y: &[f64]) -> Vec<f64> {
        self.spec.links.iter().map(|l| l.cost).collect()
    }
    fn grad_f_y(&self, _x: &[f64], _y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_y()];
        for (o, m) in out.iter_mut().zip(&self.spec.markets) {
            *o = -m.revenue;
        }
        out
    }

    fn g(&self, _x: &[f64], y: &[f64]) -> f64 {
        let omega = self.spec.omega_t;
        let mut total = 0.0;
        for (k, m) in self.spec.markets.iter().enumerate() {
            let yk = y[k];
            let entropy = yk * (yk.ln() - 1.0) + (1.0 - yk) * ((1.0 - yk).ln() - 1.0);
            total += m.demand * (-omega * m.outside_time * (1.0 - yk) + entropy);
            for (a, l) in self.spec.links.iter().enumerate() {
                let v = y[self.link_index(k, a)];
                total += -m.demand * omega * l.time * v + self.spec.ridge * v * v;
            }
        }
        total
    }
    fn grad_g_x(&self, x: &[f64], _y: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }
    fn grad_g_y(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
        let omega = self.spec.omega_t;
        let mut out = vec![0.0; self.dim_y()];
        for (k, m) in self.spec.markets.iter().enumerate() {
            let yk = y[k];
            out[k] = m.demand * (omega * m.outside_time + yk.ln() - (1.0 - yk).ln());
            for (a, l) in self.spec.links.iter().enumerate() {
                let i = self.link_index(k, a);
                out[i] = -m.demand * omega * l.time + 2.0 * self.spec.ridge * y[i];
            }
        }
        out
    }

    fn gc(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let (na, ns) = (self.n_links(), self.n_stations());
        let mut out = vec![0.0; self.num_constraints()];
        for (a, xa) in x.iter().enumerate() {
            out[a] = -xa;
        }
        for (k, m) in self.spec.markets.iter().enumerate() {
            let row0 = na + k * ns;
            for (a, l) in self.spec.links.iter().enumerate() {
                let v = y[self.link_index(k, a)];
                out[a] += m.demand * v;
                out[row0 + l.from] += v;
                out[row0 + l.to] -= v;
            }
            out[row0 + m.origin] -= y[k];
            out[row0 + m.destination] += y[k];
        }
        out
    }
    fn vjp_gc_x(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        mu[..self.n_links()].iter().map(|m| -m).collect()
    }
    fn vjp_gc_y(&self, _x: &[f64], _y: &[f64], mu: &[f64]) -> Vec<f64> {
        let (na, ns) = (self.n_links(), self.n_stations());
        let mut out = vec![0.0; self.dim_y()];
        for (k, m) in self.spec.markets.iter().enumerate() {
            let lam = &mu[na + k * ns..na + (k + 1) * ns];
            out[k] = lam[m.destination] - lam[m.origin];
            for (a, l) in self.spec.links.iter().enumerate() {
                out[self.link_index(k, a)] = m.demand * mu[a] + lam[l.from] - lam[l.to];
            }
        }
        out
    }

    fn project_x(&self, v: &[f64]) -> Vec<f64> {
        linalg::positive_part(v)
    }
    fn project_y(&self, v: &[f64]) -> Vec<f64> {
        linalg::clamp_box(v, self.spec.eps_box, 1.0 - self.spec.eps_box)
    }

    fn alpha_g(&self) -> f64 {
        let min_w = self
            .spec
            .markets
            .iter()
            .map(|m| m.demand)
            .fold(f64::INFINITY, f64::min);
        (4.0 * min_w).min(2.0 * self.spec.ridge)
    }

    fn x_bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, f64::INFINITY); self.dim_x()]
    }

    // f is linear in y, so the penalized Hessian is γ times the lower one.
    fn default_stepsizes_g(&self) -> Option<StepsizeDefaults> {
        Some(StepsizeDefaults {
            eta_y: 1.0 / self.max_curvature(),
            eta_mu: 1.0 / self.dual_smoothness,
        })
    }

    fn default_stepsizes_f(&self, gamma: f64) -> Option<StepsizeDefaults> {
        Some(StepsizeDefaults {
            eta_y: 1.0 / (gamma * self.max_curvature()),
            eta_mu: gamma / self.dual_smoothness,
        })
    }

    fn y_step_scale_g(&self) -> Option<Vec<f64>> {
        (self.spec.ridge > 0.0).then(|| self.step_scale())
    }

    fn y_step_scale_f(&self, _gamma: f64) -> Option<Vec<f64>> {
        self.y_step_scale_g()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::network::{nine_node_spec, three_node_spec};

    #[test]
    fn three_node_dimensions() {
        let t = Transport::new(three_node_spec()).unwrap();
        assert_eq!((t.dim_x(), t.dim_y(), t.num_constraints()), (6, 42, 24));
        assert_eq!((t.num_ineq(), t.num_eq()), (6, 18));
    }

    #[test]
    fn nine_node_dimensions() {
        let t = Transport::new(nine_node_spec()).unwrap();
        assert_eq!(t.dim_x() + t.dim_y(), 2262);
        assert_eq!(t.num_constraints(), 678);
    }

    #[test]
    fn residuals_at_all_eps_point() {
        let t = Transport::new(three_node_spec()).unwrap();
        let eps = 1e-3;
        let y = vec![eps; t.dim_y()];
        let r = t.gc(&[0.0; 6], &y);
        // capacity row of link (1,2): six markets at ε each, zero capacity
        assert!((r[0] - 6.0 * eps).abs() < 1e-15);
        // station 1, market (1,2): out 2ε, in 2ε, source −ε
        assert!((r[6] + eps).abs() < 1e-15);
        // station 2 of the same market is its destination: +ε
        assert!((r[7] - eps).abs() < 1e-15);
        assert!(r[8].abs() < 1e-15);
    }

    #[test]
    fn entropy_gradient_identity() {
        // d/dy [y(ln y − 1)] = ln y, equal to −1 at y = 1/e
        let y = (-1.0_f64).exp();
        assert!((y.ln() + 1.0).abs() < 1e-15);
    }
}
