use nalgebra::{DMatrix, DVector};

use crate::error::{BloccError, Result};
use crate::linalg;
use crate::problem::{BilevelOracle, PrimalDualPair};

/// Largest inequality count the active-set oracle will enumerate.
pub const MAX_ACTIVE_SET_INEQ: usize = 16;

const ACCEPT_TOL: f64 = 1e-10;

/// `min ½ yᵀQy + cᵀy  s.t.  A_ineq y ≤ b_ineq,  A_eq y = b_eq`
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub a_ineq: DMatrix<f64>,
    pub b_ineq: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
}

impl QpProblem {
    /// Build from row-major slices; constraint blocks may be empty.
    pub fn from_rows(
        q: &[Vec<f64>],
        c: &[f64],
        a_ineq: &[Vec<f64>],
        b_ineq: &[f64],
        a_eq: &[Vec<f64>],
        b_eq: &[f64],
    ) -> Self {
        let n = c.len();
        let mat = |rows: &[Vec<f64>]| DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        Self {
            q: mat(q),
            c: DVector::from_column_slice(c),
            a_ineq: mat(a_ineq),
            b_ineq: DVector::from_column_slice(b_ineq),
            a_eq: mat(a_eq),
            b_eq: DVector::from_column_slice(b_eq),
        }
    }
}

/// Exact KKT pair of a strictly convex QP by active-set enumeration.
///
/// Every subset of the inequalities is tried as the active set (smallest
/// first). A candidate is accepted when it is primal feasible and its active
/// multipliers are `≥ −1e-10`; those are then clamped to zero. Multipliers
/// are laid out inequality block first.
pub fn active_set_qp(qp: &QpProblem) -> Result<PrimalDualPair> {
    let n = qp.c.len();
    let m = qp.b_ineq.len();
    let p = qp.b_eq.len();
    if qp.q.shape() != (n, n) || qp.a_ineq.shape() != (m, n) || qp.a_eq.shape() != (p, n) {
        return Err(BloccError::config("QP blocks have inconsistent shapes"));
    }
    if m > MAX_ACTIVE_SET_INEQ {
        return Err(BloccError::config(format!(
            "active-set enumeration is capped at {MAX_ACTIVE_SET_INEQ} inequalities, got {m}"
        )));
    }

    let mut masks: Vec<u32> = (0..(1u32 << m)).collect();
    masks.sort_by_key(|s| s.count_ones());
    for mask in masks {
        let active: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let k = active.len() + p;
        let mut kkt = DMatrix::zeros(n + k, n + k);
        let mut rhs = DVector::zeros(n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(&qp.q);
        for i in 0..n {
            rhs[i] = -qp.c[i];
        }
        let rows = active
            .iter()
            .map(|&i| (qp.a_ineq.row(i), qp.b_ineq[i]))
            .chain((0..p).map(|j| (qp.a_eq.row(j), qp.b_eq[j])));
        for (r, (row, b)) in rows.enumerate() {
            for j in 0..n {
                kkt[(n + r, j)] = row[j];
                kkt[(j, n + r)] = row[j];
            }
            rhs[n + r] = b;
        }
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        if !sol.iter().all(|v| v.is_finite()) {
            continue;
        }
        let y = sol.rows(0, n).into_owned();
        let slack = &qp.a_ineq * &y - &qp.b_ineq;
        let scale = 1.0 + linalg::max_abs(qp.b_ineq.as_slice());
        if slack.iter().any(|s| *s > ACCEPT_TOL * scale) {
            continue;
        }
        if active.iter().enumerate().any(|(r, _)| sol[n + r] < -ACCEPT_TOL) {
            continue;
        }
        let mut mu = vec![0.0; m + p];
        for (r, &i) in active.iter().enumerate() {
            mu[i] = sol[n + r].max(0.0);
        }
        for j in 0..p {
            mu[m + j] = sol[n + active.len() + j];
        }
        return Ok(PrimalDualPair::new(y.as_slice().to_vec(), mu));
    }
    Err(BloccError::Degenerate(
        "no active set satisfies the KKT conditions".into(),
    ))
}

/// Which Lagrangian's quadratic model to extract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QpSide {
    /// `g(x, ·)`
    Lower,
    /// `f(x, ·) + γ g(x, ·)`
    Penalty { gamma: f64 },
}

/// Read the QP data of an oracle whose objective is quadratic and whose
/// constraints are affine in `y`, with `Y = ℝ^{d_y}`.
///
/// The Hessian and constraint rows are recovered by differencing the
/// analytic gradients and residuals between `y = 0` and unit vectors, which is
/// exact for quadratic/affine maps up to rounding.
pub fn qp_from_oracle(oracle: &(impl BilevelOracle + ?Sized), x: &[f64], side: QpSide) -> Result<QpProblem> {
    let n = oracle.dim_y();
    let probe: Vec<f64> = (0..n).map(|i| 1e6 * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    if oracle.project_y(&probe) != probe {
        return Err(BloccError::config("qp_from_oracle requires an unconstrained Y"));
    }
    let grad = |y: &[f64]| -> Vec<f64> {
        let mut g = oracle.grad_g_y(x, y);
        if let QpSide::Penalty { gamma } = side {
            g = linalg::scale(gamma, &g);
            linalg::axpy(1.0, &oracle.grad_f_y(x, y), &mut g);
        }
        g
    };
    let zero = vec![0.0; n];
    let c = grad(&zero);
    let r0 = oracle.gc(x, &zero);
    let m = oracle.num_ineq();
    let total = oracle.num_constraints();
    let mut q = DMatrix::zeros(n, n);
    let mut a = DMatrix::zeros(total, n);
    let mut e = zero.clone();
    for j in 0..n {
        e[j] = 1.0;
        let gj = grad(&e);
        let rj = oracle.gc(x, &e);
        e[j] = 0.0;
        for i in 0..n {
            q[(i, j)] = gj[i] - c[i];
        }
        for i in 0..total {
            a[(i, j)] = rj[i] - r0[i];
        }
    }
    q = (&q + q.transpose()) * 0.5;
    let b = DVector::from_iterator(total, r0.iter().map(|r| -r));
    Ok(QpProblem {
        q,
        c: DVector::from_vec(c),
        a_ineq: a.rows(0, m).into_owned(),
        b_ineq: b.rows(0, m).into_owned(),
        a_eq: a.rows(m, total - m).into_owned(),
        b_eq: b.rows(m, total - m).into_owned(),
    })
}
