//! Small dense max-min feasibility solver.
//!
//! Maximizes `s = min_k M_k(x)` over a polytope `{A x + b > 0}` where the
//! `M_k` are smooth concave margins, by a damped-Newton log-barrier on
//!
//! ```text
//! phi_mu(x, s) = -s - mu * [ sum_j ln(a_j·x + b_j) + sum_k ln(M_k(x) - s) ]
//! ```
//!
//! The schedule stops at a moderate final `mu` on purpose: the returned
//! witness then keeps all barrier terms a healthy distance from their walls,
//! which keeps the Hessian solvable when the witness seeds the next solve.
//! Verdict accuracy is bounded by (#terms)·mu_final in scaled-margin units,
//! far below the blocklength bisection resolution this feeds.

use nalgebra::{Cholesky, DMatrix, DVector};

/// An affine barrier constraint `coef·x + cst > 0`.
#[derive(Debug, Clone)]
pub(crate) struct AffineCon {
    pub coef: Vec<f64>,
    pub cst: f64,
}

impl AffineCon {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.cst + self.coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

/// One evaluated concave margin: value, gradient, and the (diagonal)
/// curvature entries of its Hessian.
pub(crate) struct SoftEval {
    pub value: f64,
    pub grad: Vec<f64>,
    pub curv: Vec<(usize, f64)>,
}

pub(crate) struct MaxMinResult {
    /// The achieved minimum scaled margin; feasible iff > 0.
    pub s: f64,
    pub x: Vec<f64>,
}

const MU_STAGES: usize = 9;
const MU_FACTOR: f64 = 0.2;
const NEWTON_PER_STAGE: usize = 80;
const RIDGE: f64 = 1e-10;

/// Runs the barrier from `x0`, which must satisfy every hard constraint
/// strictly and lie in the margins' domain. Returns `None` only if `x0` is
/// invalid.
pub(crate) fn solve_maxmin<F>(
    hard: &[AffineCon],
    soft: &F,
    x0: &[f64],
) -> Option<MaxMinResult>
where
    F: Fn(&[f64]) -> Option<Vec<SoftEval>>,
{
    let dim = x0.len();
    let nz = dim + 1; // variables plus the min-margin level s

    let evaluate = |z: &[f64]| -> Option<(Vec<f64>, Vec<SoftEval>)> {
        let x = &z[..dim];
        let hv: Vec<f64> = hard.iter().map(|c| c.value(x)).collect();
        if hv.iter().any(|&v| !(v > 0.0)) {
            return None;
        }
        let sv = soft(x)?;
        let s = z[dim];
        if sv.iter().any(|m| !(m.value - s > 0.0)) {
            return None;
        }
        Some((hv, sv))
    };

    let phi = |z: &[f64], mu: f64| -> Option<f64> {
        let (hv, sv) = evaluate(z)?;
        let s = z[dim];
        let mut val = -s;
        for v in &hv {
            val -= mu * v.ln();
        }
        for m in &sv {
            val -= mu * (m.value - s).ln();
        }
        Some(val)
    };

    // start below every margin so the barrier domain holds at z0
    let mut z = x0.to_vec();
    let s0 = {
        let sv = soft(x0)?;
        sv.iter().map(|m| m.value).fold(f64::INFINITY, f64::min) - 1.0
    };
    if hard.iter().any(|c| !(c.value(x0) > 0.0)) {
        return None;
    }
    z.push(s0);

    let mut mu = 1.0;
    for _ in 0..MU_STAGES {
        for _ in 0..NEWTON_PER_STAGE {
            let (hv, sv) = evaluate(&z)?;
            let s = z[dim];
            let mut grad = DVector::zeros(nz);
            grad[dim] = -1.0;
            let mut hess = DMatrix::zeros(nz, nz);
            for (con, &v) in hard.iter().zip(&hv) {
                let w = mu / v;
                let w2 = mu / (v * v);
                for (i, &ci) in con.coef.iter().enumerate() {
                    if ci == 0.0 {
                        continue;
                    }
                    grad[i] -= w * ci;
                    for (j, &cj) in con.coef.iter().enumerate() {
                        if cj != 0.0 {
                            hess[(i, j)] += w2 * ci * cj;
                        }
                    }
                }
            }
            for m in &sv {
                let d = m.value - s;
                let w = mu / d;
                let w2 = mu / (d * d);
                // gradient of (M - s): (grad_x M, -1)
                for (i, &gi) in m.grad.iter().enumerate() {
                    grad[i] -= w * gi;
                }
                grad[dim] += w;
                for (i, &gi) in m.grad.iter().enumerate() {
                    for (j, &gj) in m.grad.iter().enumerate() {
                        hess[(i, j)] += w2 * gi * gj;
                    }
                    hess[(i, dim)] -= w2 * gi;
                    hess[(dim, i)] -= w2 * gi;
                }
                hess[(dim, dim)] += w2;
                // -mu/d * Hess(M); M concave so this adds PSD mass
                for &(i, c) in &m.curv {
                    hess[(i, i)] -= w * c;
                }
            }
            for i in 0..nz {
                hess[(i, i)] += RIDGE;
            }

            let step = match Cholesky::new(hess) {
                Some(ch) => ch.solve(&(-&grad)),
                None => break,
            };
            let dec = -grad.dot(&step);
            if dec < 1e-11 {
                break;
            }
            let f0 = phi(&z, mu)?;
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-13 {
                let cand: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
                if let Some(f1) = phi(&cand, mu) {
                    if f1 <= f0 - 1e-4 * t * dec {
                        z = cand;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        mu *= MU_FACTOR;
    }

    let s = z[dim];
    z.truncate(dim);
    Some(MaxMinResult { s, x: z })
}
