//! Blocklength minimization.
//!
//! The RSMA problem minimizes the shared blocklength `n` over the stream
//! powers subject to per-user effective-throughput thresholds. The throughput
//! constraints couple `n`, the powers, and the SINRs nonconvexly, so the
//! solve runs as successive convex approximation: SINR lower-bound slacks `δ`
//! and throughput slacks `τ` are introduced, the dispersion square root
//! `ν(δ) = sqrt(1 − (1+δ)⁻²)` is replaced by its tangent at the current
//! reference, and the fractional SINR constraints by their first-order
//! expansions. For a *fixed* `n` the surrogate constraint set is convex in
//! `(P, δ, τ)`; since enlarging `n` only relaxes the throughput constraints,
//! the surrogate minimum over `n` is found by bisection, with an interior
//! max-min feasibility solve at each probe. An outer loop re-linearizes at
//! the returned witness until the blocklength settles.
//!
//! Two safeguards keep the surrogates honest. The tangent to the concave `ν`
//! over-estimates it away from the reference, and the expanded SINR
//! constraints can over-promise when powers move far from the reference, so
//! a trust region `|δ − δ̄| ≤ ρ·δ̄` bounds the step; `ρ` doubles after an
//! accepted iterate and halves when the witness violates the exact SINR
//! bounds by more than a relative threshold. Second, the final report never
//! relies on the surrogate: the returned blocklength is re-derived from the
//! exact throughput expressions at the returned powers.

mod barrier;
mod oma;

pub use oma::{minimize_blocklength_oma, oma_constraints_satisfied};

use serde::{Deserialize, Serialize};

use crate::channel::{rsma_sinrs, NomaOrder, PowerAllocation, SystemParams};
use crate::fbl::{inverse_q, shannon_capacity, LOG2_E};
use crate::reliability::{
    noma_effective_throughput, noma_message_errors, rsma_effective_throughput,
    rsma_message_errors, StreamReliability, ThroughputTargets,
};
use crate::{Error, Result};
use barrier::{solve_maxmin, AffineCon, SoftEval};

// ---------------------------------------------------------------------------
// Configuration and report types
// ---------------------------------------------------------------------------

/// Which error probability feeds the `Q⁻¹` constants of the surrogate rate
/// constraints. The transformed problem uses the message-level errors; the
/// per-stream variant matches the exact throughput expressions instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpsilonConvention {
    MessageLevel,
    PerStream,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Convergence threshold on the outer blocklength change.
    pub xi: f64,
    pub max_outer_iters: usize,
    /// Initial "previous" blocklength for the convergence test.
    pub n_init: f64,
    /// Bisection resolution on n, channel uses.
    pub bisect_res: f64,
    /// Initial trust radius (relative to the reference δ).
    pub trust_rho0: f64,
    pub trust_rho_max: f64,
    /// Relative exact-SINR violation above which an iterate is rejected.
    pub violation_tol: f64,
    /// Lower bound keeping linearization points away from the ν' singularity.
    pub delta_floor: f64,
    pub convention: EpsilonConvention,
    /// Force `p12 = 0` and drop the `δ12`/`τ12` machinery (the NOMA
    /// degeneration of the RSMA solver).
    pub force_p12_zero: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            xi: 0.5,
            max_outer_iters: 40,
            n_init: 1e6,
            bisect_res: 1.0 / 16.0,
            trust_rho0: 0.5,
            trust_rho_max: 16.0,
            violation_tol: 0.02,
            delta_floor: 1e-6,
            convention: EpsilonConvention::MessageLevel,
            force_p12_zero: false,
        }
    }
}

/// One SCA iterate: the linearization point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlackState {
    pub delta11: f64,
    pub delta22: f64,
    pub delta12: f64,
    pub tau11: f64,
    pub tau12: f64,
    pub powers: PowerAllocation,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Infeasible,
}

/// Outcome of a blocklength minimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub scheme: String,
    /// Minimized blocklength (continuous; `None` when infeasible). For OMA
    /// this is the total `n1 + n2`.
    pub n_star: Option<f64>,
    /// `ceil(n_star)`: the integer blocklength to transmit with.
    pub n_star_int: Option<u64>,
    /// Final powers; NOMA and OMA map `(p1, p2)` onto `(p11, 0, p2)`.
    pub powers: Option<PowerAllocation>,
    pub slacks: Option<SlackState>,
    /// OMA resource fraction, when applicable.
    pub alpha: Option<f64>,
    /// OMA per-user blocklengths `(n1, n2)`.
    pub n_split: Option<(f64, f64)>,
    pub iterations: usize,
    /// Accepted surrogate blocklengths, one per outer iteration.
    pub trace: Vec<f64>,
    /// Trust-region rejections.
    pub recoveries: usize,
    pub status: SolveStatus,
}

impl SolveReport {
    pub(crate) fn infeasible(scheme: &str) -> Self {
        Self {
            scheme: scheme.into(),
            n_star: None,
            n_star_int: None,
            powers: None,
            slacks: None,
            alpha: None,
            n_split: None,
            iterations: 0,
            trace: Vec::new(),
            recoveries: 0,
            status: SolveStatus::Infeasible,
        }
    }
}

// ---------------------------------------------------------------------------
// Linearization primitives
// ---------------------------------------------------------------------------

/// `ν(δ) = sqrt(1 − (1+δ)⁻²)`, the square root of the channel dispersion.
pub fn nu(delta: f64) -> f64 {
    let t = 1.0 + delta;
    (1.0 - 1.0 / (t * t)).sqrt()
}

/// `ν'(δ) = (1+δ)⁻³ / ν(δ)`; singular at δ = 0.
pub fn nu_prime(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidSinr(delta));
    }
    let t = 1.0 + delta;
    Ok(1.0 / (t * t * t * nu(delta)))
}

/// Tangent surrogate of the throughput expression
/// `(1−ε)·n·[log2(1+δ) − E·ν(δ)]` around `delta_ref`, with
/// `E = Q⁻¹(ε)·log2(e)/√n`. Exact at the reference; elsewhere it
/// under-estimates the true expression because the tangent over-estimates
/// the concave ν.
pub fn linearize_throughput(
    delta_ref: f64,
    eps_msg: f64,
    n: f64,
) -> Result<impl Fn(f64) -> f64> {
    if !(n > 0.0) {
        return Err(Error::InvalidBlocklength(n));
    }
    let e = inverse_q(eps_msg)? * LOG2_E / n.sqrt();
    let nb = nu(delta_ref);
    let npb = nu_prime(delta_ref)?;
    let factor = (1.0 - eps_msg) * n;
    Ok(move |delta: f64| {
        factor * ((1.0 + delta).log2() - e * (nb + npb * (delta - delta_ref)))
    })
}

/// Which fractional SINR constraint to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinrConstraint {
    Gamma11GeDelta11,
    Gamma22GeDelta22,
}

/// The expanded SINR constraint as an affine form `LHS ≤ 0` in
/// `(p11, p12, p2, δ)`.
#[derive(Debug, Clone, Copy)]
pub struct LinearSinrConstraint {
    pub coef_p11: f64,
    pub coef_p12: f64,
    pub coef_p2: f64,
    pub coef_delta: f64,
    pub constant: f64,
}

impl LinearSinrConstraint {
    pub fn eval(&self, p: &PowerAllocation, delta: f64) -> f64 {
        self.coef_p11 * p.p11 + self.coef_p12 * p.p12 + self.coef_p2 * p.p2
            + self.coef_delta * delta
            + self.constant
    }
}

/// First-order expansion of `γ ≥ δ` around the reference state: the cross
/// term `P/δ` is replaced by its tangent at `(P̄, δ̄)`.
pub fn linearize_sinr(
    which: SinrConstraint,
    reference: &SlackState,
    sys: &SystemParams,
) -> Result<LinearSinrConstraint> {
    match which {
        SinrConstraint::Gamma11GeDelta11 => {
            let db = reference.delta11;
            if !(db > 0.0) {
                return Err(Error::InvalidSinr(db));
            }
            let b = reference.powers.p11 * sys.g1 / (db * db);
            Ok(LinearSinrConstraint {
                coef_p11: -sys.g1 / db,
                coef_p12: sys.g1,
                coef_p2: sys.g2,
                coef_delta: b,
                constant: sys.noise_var - db * b,
            })
        }
        SinrConstraint::Gamma22GeDelta22 => {
            let db = reference.delta22;
            if !(db > 0.0) {
                return Err(Error::InvalidSinr(db));
            }
            let b = reference.powers.p2 * sys.g2 / (db * db);
            Ok(LinearSinrConstraint {
                coef_p11: 0.0,
                coef_p12: sys.g1,
                coef_p2: -sys.g2 / db,
                coef_delta: b,
                constant: sys.noise_var - db * b,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Exact feasibility
// ---------------------------------------------------------------------------

/// Evaluates the original nonlinear constraints (throughput thresholds plus
/// the power and blocklength boxes) at a candidate point.
pub fn exact_constraints_satisfied(
    n: f64,
    p: &PowerAllocation,
    sys: &SystemParams,
    s: &StreamReliability,
    targets: &ThroughputTargets,
    tol: f64,
) -> Result<bool> {
    if n < sys.n_min - 1e-9 || n > sys.n_max + 1e-9 {
        return Ok(false);
    }
    if !p.within_budget(sys, 1e-9 * sys.p_max) {
        return Ok(false);
    }
    let (t1, t2) = rsma_effective_throughput(n, p, sys, s)?;
    Ok(t1 >= targets.t1 - tol && t2 >= targets.t2 - tol)
}

/// NOMA analogue of [`exact_constraints_satisfied`].
#[allow(clippy::too_many_arguments)]
pub fn noma_constraints_satisfied(
    n: f64,
    p1: f64,
    p2: f64,
    sys: &SystemParams,
    s: &StreamReliability,
    targets: &ThroughputTargets,
    order: NomaOrder,
    tol: f64,
) -> Result<bool> {
    if n < sys.n_min - 1e-9 || n > sys.n_max + 1e-9 {
        return Ok(false);
    }
    if p1 > sys.p_max * (1.0 + 1e-9) || p2 > sys.p_max * (1.0 + 1e-9) || p1 < 0.0 || p2 < 0.0 {
        return Ok(false);
    }
    let (t1, t2) = noma_effective_throughput(n, p1, p2, sys, s.eps11, s.eps22, order)?;
    Ok(t1 >= targets.t1 - tol && t2 >= targets.t2 - tol)
}

pub(crate) const EXACT_TOL: f64 = 1e-6;

/// Smallest blocklength in `[n_min, n_max]` satisfying a monotone
/// feasibility predicate, by scalar bisection.
pub(crate) fn exact_min_n(
    feasible: &dyn Fn(f64) -> bool,
    n_min: f64,
    n_max: f64,
    res: f64,
) -> Option<f64> {
    if !feasible(n_max) {
        return None;
    }
    if feasible(n_min) {
        return Some(n_min);
    }
    let (mut lo, mut hi) = (n_min, n_max);
    while hi - lo > res {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

// ---------------------------------------------------------------------------
// RSMA successive convex approximation
// ---------------------------------------------------------------------------

struct RsmaProblem<'a> {
    sys: &'a SystemParams,
    targets: &'a ThroughputTargets,
    cfg: &'a SolverConfig,
    /// Q⁻¹ constants feeding E for streams (s11, s12, s2).
    q_e: (f64, f64, f64),
    /// (1−ε1), (1−ε2) with the linearized message sums.
    factors: (f64, f64),
    w1: f64,
    w2: f64,
}

impl<'a> RsmaProblem<'a> {
    fn new(
        sys: &'a SystemParams,
        eps: &StreamReliability,
        targets: &'a ThroughputTargets,
        cfg: &'a SolverConfig,
    ) -> Result<Self> {
        let (e1, e2) = rsma_message_errors(eps, false);
        let q_e = match cfg.convention {
            EpsilonConvention::MessageLevel => {
                let q1 = inverse_q(e1)?;
                (q1, q1, inverse_q(e2)?)
            }
            EpsilonConvention::PerStream => (
                inverse_q(eps.eps11)?,
                inverse_q(eps.eps12)?,
                inverse_q(eps.eps22)?,
            ),
        };
        Ok(Self {
            sys,
            targets,
            cfg,
            q_e,
            factors: (1.0 - e1, 1.0 - e2),
            w1: targets.t1.max(10.0),
            w2: targets.t2.max(10.0),
        })
    }

    fn single(&self) -> bool {
        self.cfg.force_p12_zero
    }

    fn power_of(&self, x: &[f64]) -> PowerAllocation {
        if self.single() {
            PowerAllocation { p11: x[0], p12: 0.0, p2: x[1] }
        } else {
            PowerAllocation { p11: x[0], p12: x[1], p2: x[2] }
        }
    }

    fn deltas_of<'x>(&self, x: &'x [f64]) -> &'x [f64] {
        // layout: [powers..., d11, d22[, d12]]
        if self.single() {
            &x[2..4]
        } else {
            &x[3..6]
        }
    }

    fn hard_rows(&self, reference: &SlackState, rho: f64) -> Vec<AffineCon> {
        let sys = self.sys;
        let pt = sys.p_max;
        let mut rows = Vec::new();
        let mut row = |coef: Vec<f64>, cst: f64| rows.push(AffineCon { coef, cst });
        let dbar = [reference.delta11, reference.delta22, reference.delta12];
        let a = linearize_sinr(SinrConstraint::Gamma11GeDelta11, reference, sys).unwrap();
        let b = linearize_sinr(SinrConstraint::Gamma22GeDelta22, reference, sys).unwrap();

        if self.single() {
            // x = [p11, p2, d11, d22]
            row(vec![-1.0, 0.0, 0.0, 0.0], pt);
            row(vec![0.0, -1.0, 0.0, 0.0], pt);
            row(vec![1.0, 0.0, 0.0, 0.0], 0.0);
            row(vec![0.0, 1.0, 0.0, 0.0], 0.0);
            row(vec![-a.coef_p11, -a.coef_p2, -a.coef_delta, 0.0], -a.constant);
            row(vec![-b.coef_p11, -b.coef_p2, 0.0, -b.coef_delta], -b.constant);
            for (k, idx) in [(0usize, 2usize), (1, 3)] {
                let up = dbar[k] * (1.0 + rho);
                let lo = (dbar[k] * (1.0 - rho)).max(self.cfg.delta_floor);
                let mut c = vec![0.0; 4];
                c[idx] = -1.0;
                row(c, up);
                let mut c = vec![0.0; 4];
                c[idx] = 1.0;
                row(c, -lo);
            }
        } else {
            // x = [p11, p12, p2, d11, d22, d12]
            row(vec![-1.0, -1.0, 0.0, 0.0, 0.0, 0.0], pt);
            row(vec![0.0, 0.0, -1.0, 0.0, 0.0, 0.0], pt);
            row(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 0.0);
            row(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 0.0);
            row(vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 0.0);
            // γ12 ≥ δ12 is already affine in the powers
            row(vec![0.0, sys.g1, 0.0, 0.0, 0.0, -sys.noise_var], 0.0);
            row(
                vec![-a.coef_p11, -a.coef_p12, -a.coef_p2, -a.coef_delta, 0.0, 0.0],
                -a.constant,
            );
            row(
                vec![-b.coef_p11, -b.coef_p12, -b.coef_p2, 0.0, -b.coef_delta, 0.0],
                -b.constant,
            );
            for (k, idx) in [(0usize, 3usize), (1, 4), (2, 5)] {
                let up = dbar[k] * (1.0 + rho);
                let lo = (dbar[k] * (1.0 - rho)).max(self.cfg.delta_floor);
                let mut c = vec![0.0; 6];
                c[idx] = -1.0;
                row(c, up);
                let mut c = vec![0.0; 6];
                c[idx] = 1.0;
                row(c, -lo);
            }
        }
        rows
    }

    /// Inner feasibility at fixed n: maximize the minimum of the two users'
    /// throughput headrooms over the trust box.
    fn inner_solve(&self, n: f64, reference: &SlackState, rho: f64) -> Option<(f64, Vec<f64>)> {
        let hard = self.hard_rows(reference, rho);
        let sq = n.sqrt();
        let (e11, e12, e22) = (
            self.q_e.0 * LOG2_E / sq,
            self.q_e.1 * LOG2_E / sq,
            self.q_e.2 * LOG2_E / sq,
        );
        let (c1, c2) = (self.factors.0 * n, self.factors.1 * n);
        let floor = self.cfg.delta_floor;
        let dbar = [
            reference.delta11,
            reference.delta22,
            reference.delta12.max(floor),
        ];
        let nb = [nu(dbar[0]), nu(dbar[1]), nu(dbar[2])];
        let npb = [
            nu_prime(dbar[0]).ok()?,
            nu_prime(dbar[1]).ok()?,
            nu_prime(dbar[2]).ok()?,
        ];
        let single = self.single();
        let (t1, t2, w1, w2) = (self.targets.t1, self.targets.t2, self.w1, self.w2);

        let soft = move |x: &[f64]| -> Option<Vec<SoftEval>> {
            let (i11, i22) = if single { (2, 3) } else { (3, 4) };
            let d11 = x[i11];
            let d22 = x[i22];
            if d11 <= -0.999 || d22 <= -0.999 {
                return None;
            }
            let dim = x.len();
            let f11 = c1 * ((1.0 + d11).log2() - e11 * (nb[0] + npb[0] * (d11 - dbar[0])));
            let mut m1v = f11 - t1;
            let mut g1 = vec![0.0; dim];
            g1[i11] = c1 * (LOG2_E / (1.0 + d11) - e11 * npb[0]) / w1;
            let mut curv1 = vec![(i11, -c1 * LOG2_E / ((1.0 + d11) * (1.0 + d11)) / w1)];
            if !single {
                let d12 = x[5];
                if d12 <= -0.999 {
                    return None;
                }
                let f12 = c1 * ((1.0 + d12).log2() - e12 * (nb[2] + npb[2] * (d12 - dbar[2])));
                m1v += f12;
                g1[5] = c1 * (LOG2_E / (1.0 + d12) - e12 * npb[2]) / w1;
                curv1.push((5, -c1 * LOG2_E / ((1.0 + d12) * (1.0 + d12)) / w1));
            }
            let f22 = c2 * ((1.0 + d22).log2() - e22 * (nb[1] + npb[1] * (d22 - dbar[1])));
            let mut g2 = vec![0.0; dim];
            g2[i22] = c2 * (LOG2_E / (1.0 + d22) - e22 * npb[1]) / w2;
            let curv2 = vec![(i22, -c2 * LOG2_E / ((1.0 + d22) * (1.0 + d22)) / w2)];
            Some(vec![
                SoftEval { value: m1v / w1, grad: g1, curv: curv1 },
                SoftEval { value: (f22 - t2) / w2, grad: g2, curv: curv2 },
            ])
        };

        let x0 = self.interior_init(reference, rho);
        let r = solve_maxmin(&hard, &soft, &x0)?;
        Some((r.s, r.x))
    }

    /// A copy of the reference pulled strictly inside the hard set: powers
    /// off the budget walls, δ slightly below the reference (which relaxes
    /// the expanded SINR rows) and inside the trust box.
    fn interior_init(&self, reference: &SlackState, rho: f64) -> Vec<f64> {
        let pt = self.sys.p_max;
        let p = reference.powers;
        let (mut p11, mut p12, mut p2) = (p.p11, p.p12, p.p2);
        let tot = p11 + p12;
        if tot > 0.9995 * pt {
            let sc = 0.9995 * pt / tot;
            p11 *= sc;
            p12 *= sc;
        }
        p11 = p11.max(1e-7 * pt);
        p12 = p12.max(1e-7 * pt);
        p2 = p2.clamp(1e-7 * pt, 0.9995 * pt);
        let floor = self.cfg.delta_floor;
        let pull = |db: f64| -> f64 {
            let db = db.max(floor);
            let up = db * (1.0 + rho);
            let lo = (db * (1.0 - rho)).max(floor);
            let d = db * (1.0 - 0.05 * rho.min(1.0));
            d.clamp(lo + 0.02 * (up - lo), up - 0.02 * (up - lo))
        };
        if self.single() {
            vec![p11, p2, pull(reference.delta11), pull(reference.delta22)]
        } else {
            vec![
                p11,
                p12,
                p2,
                pull(reference.delta11),
                pull(reference.delta22),
                pull(reference.delta12),
            ]
        }
    }

    /// Surrogate minimum blocklength around `reference`: bisection on n over
    /// the box, feasibility from the inner max-min solve.
    fn surrogate_min_n(&self, reference: &SlackState, rho: f64) -> Option<(f64, Vec<f64>)> {
        let feas = |n: f64| -> Option<(bool, Vec<f64>)> {
            let (s, x) = self.inner_solve(n, reference, rho)?;
            Some((s > 0.0, x))
        };
        let (ok, xhi) = feas(self.sys.n_max)?;
        if !ok {
            return None;
        }
        if let Some((true, xlo)) = feas(self.sys.n_min) {
            return Some((self.sys.n_min, xlo));
        }
        let (mut lo, mut hi) = (self.sys.n_min, self.sys.n_max);
        let mut witness = xhi;
        while hi - lo > self.cfg.bisect_res {
            let mid = 0.5 * (lo + hi);
            match feas(mid) {
                Some((true, x)) => {
                    hi = mid;
                    witness = x;
                }
                _ => lo = mid,
            }
        }
        Some((hi, witness))
    }

    fn state_from(&self, n: f64, x: &[f64]) -> SlackState {
        let powers = self.power_of(x);
        let d = self.deltas_of(x);
        let sq = n.sqrt();
        let (e11, e12) = (self.q_e.0 * LOG2_E / sq, self.q_e.1 * LOG2_E / sq);
        let c1 = self.factors.0 * n;
        let f11 = c1 * ((1.0 + d[0]).log2() - e11 * nu(d[0]));
        let (delta12, tau12) = if self.single() {
            (0.0, 0.0)
        } else {
            let f12 = c1 * ((1.0 + d[2]).log2() - e12 * nu(d[2]));
            (d[2], f12.max(0.0))
        };
        SlackState {
            delta11: d[0],
            delta22: d[1],
            delta12,
            tau11: f11.max(0.0),
            tau12,
            powers,
            n,
        }
    }
}

/// One surrogate solve around `reference`: minimizes n subject to the
/// expanded constraint set and returns the optimizing iterate. The caller
/// (the outer loop) re-linearizes at the result.
pub fn solve_p3(
    reference: &SlackState,
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    cfg: &SolverConfig,
) -> Result<SlackState> {
    let prob = RsmaProblem::new(sys, eps, targets, cfg)?;
    match prob.surrogate_min_n(reference, cfg.trust_rho0) {
        Some((n, x)) => Ok(prob.state_from(n, &x)),
        None => Err(Error::Infeasible(
            "expanded constraint set empty up to n_max".into(),
        )),
    }
}

fn rsma_start_states(sys: &SystemParams, cfg: &SolverConfig) -> Vec<SlackState> {
    let pt = sys.p_max;
    let starts: Vec<PowerAllocation> = if cfg.force_p12_zero {
        vec![
            PowerAllocation { p11: 0.999 * pt, p12: 0.0, p2: 0.999 * pt },
            PowerAllocation { p11: 0.999 * pt, p12: 0.0, p2: 0.35 * pt },
        ]
    } else {
        vec![
            // balanced split, full powers
            PowerAllocation { p11: 0.4995 * pt, p12: 0.4995 * pt, p2: 0.999 * pt },
            // U1's budget concentrated on the first-decoded stream
            PowerAllocation { p11: 0.9985 * pt, p12: 0.001 * pt, p2: 0.999 * pt },
            // U1's budget concentrated on the cleanly decoded stream
            PowerAllocation { p11: 0.001 * pt, p12: 0.9985 * pt, p2: 0.999 * pt },
        ]
    };
    starts
        .into_iter()
        .map(|p| {
            let g = rsma_sinrs(&p, sys);
            SlackState {
                delta11: (g.g11 * 0.999).max(cfg.delta_floor),
                delta22: (g.g22 * 0.999).max(cfg.delta_floor),
                delta12: (g.g12 * 0.999).max(cfg.delta_floor),
                tau11: 0.0,
                tau12: 0.0,
                powers: p,
                n: cfg.n_init,
            }
        })
        .collect()
}

pub(crate) struct AoRun {
    pub state: SlackState,
    pub trace: Vec<f64>,
    pub recoveries: usize,
    pub converged: bool,
}

fn rsma_ao_from(prob: &RsmaProblem, start: SlackState) -> Option<AoRun> {
    let cfg = prob.cfg;
    let mut reference = start;
    let mut rho = cfg.trust_rho0;
    let mut n_prev = cfg.n_init;
    let mut trace = Vec::new();
    let mut recoveries = 0usize;
    let mut best: Option<(f64, SlackState)> = None;
    let mut converged = false;

    for _ in 0..cfg.max_outer_iters {
        let Some((n_star, x)) = prob.surrogate_min_n(&reference, rho) else {
            // a tight trust box around a poor reference can be empty; widen
            if rho >= cfg.trust_rho_max {
                break;
            }
            rho = (rho * 2.0).min(cfg.trust_rho_max);
            recoveries += 1;
            continue;
        };
        let cand = prob.state_from(n_star, &x);
        let g = rsma_sinrs(&cand.powers, prob.sys);
        let viol11 = cand.delta11 / g.g11.max(1e-300) - 1.0;
        let viol22 = cand.delta22 / g.g22.max(1e-300) - 1.0;
        if viol11.max(viol22) > cfg.violation_tol {
            rho = (rho / 2.0).max(1e-3);
            recoveries += 1;
            continue;
        }
        trace.push(n_star);
        // project the new reference onto the exactly feasible SINR set
        reference = SlackState {
            delta11: cand.delta11.min(0.9995 * g.g11).max(cfg.delta_floor),
            delta22: cand.delta22.min(0.9995 * g.g22).max(cfg.delta_floor),
            delta12: if prob.single() {
                cfg.delta_floor
            } else {
                cand.delta12.min(g.g12).max(cfg.delta_floor)
            },
            ..cand
        };
        if best.as_ref().is_none_or(|(b, _)| n_star < *b) {
            best = Some((n_star, cand));
        }
        let done = (n_prev - n_star).abs() <= cfg.xi && rho >= 2.0;
        rho = (rho * 2.0).min(cfg.trust_rho_max);
        if done {
            converged = true;
            break;
        }
        n_prev = n_star;
    }
    let (_, state) = best?;
    Some(AoRun { state, trace, recoveries, converged })
}

/// Coordinate pattern search on the powers against the exact feasibility
/// boundary. The surrogate optimum inherits a small power offset from its
/// error-probability convention, and the exact minimum-n valley is steep in
/// the powers, so a local exact polish recovers the last fraction of a
/// channel use. `objective` returns the exact minimal n for a power triple
/// (infinity when infeasible); `transfer` additionally probes moving budget
/// between the two U1 streams at a fixed sum.
pub(crate) fn polish_powers(
    start: PowerAllocation,
    p_max: f64,
    single: bool,
    objective: &dyn Fn(&PowerAllocation) -> f64,
) -> (PowerAllocation, f64) {
    let mut best_p = start;
    let mut best_n = objective(&start);
    let mut h = 0.02 * p_max;
    while h > 1e-4 * p_max {
        let mut improved = false;
        let mut candidates: Vec<PowerAllocation> = Vec::with_capacity(8);
        let p = best_p;
        let clamp_pair = |p11: f64, p12: f64| -> Option<(f64, f64)> {
            let (p11, p12) = (p11.max(0.0), p12.max(0.0));
            (p11 + p12 <= p_max * (1.0 + 1e-12)).then_some((p11, p12))
        };
        for d in [h, -h] {
            if let Some((a, b)) = clamp_pair(p.p11 + d, p.p12) {
                candidates.push(PowerAllocation { p11: a, p12: b, p2: p.p2 });
            }
            let p2 = (p.p2 + d).clamp(0.0, p_max);
            candidates.push(PowerAllocation { p2, ..p });
            if !single {
                if let Some((a, b)) = clamp_pair(p.p11, p.p12 + d) {
                    candidates.push(PowerAllocation { p11: a, p12: b, p2: p.p2 });
                }
                // transfer between the streams at a fixed total
                if let Some((a, b)) = clamp_pair(p.p11 + d, p.p12 - d) {
                    candidates.push(PowerAllocation { p11: a, p12: b, p2: p.p2 });
                }
            }
        }
        for c in candidates {
            let n = objective(&c);
            if n < best_n - 1e-9 {
                best_n = n;
                best_p = c;
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (best_p, best_n)
}

/// Quick sufficient condition for infeasibility: even interference-free
/// full-power transmission at `n_max` cannot reach the thresholds.
fn rsma_upfront_infeasible(
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
) -> bool {
    let (e1, e2) = rsma_message_errors(eps, true);
    let c1 = shannon_capacity(sys.p_max * sys.g1 / sys.noise_var).unwrap_or(0.0);
    let c2 = shannon_capacity(sys.p_max * sys.g2 / sys.noise_var).unwrap_or(0.0);
    let c_sum = shannon_capacity(sys.p_max * (sys.g1 + sys.g2) / sys.noise_var).unwrap_or(0.0);
    targets.t1 > (1.0 - e1) * sys.n_max * c1
        || targets.t2 > (1.0 - e2) * sys.n_max * c2
        || targets.t1 / (1.0 - e1) + targets.t2 / (1.0 - e2) > sys.n_max * c_sum
}

/// Minimizes the RSMA blocklength. Runs the alternating optimization from a
/// small set of deterministic starting splits and keeps the best
/// exactly-verified result; the reported blocklength is the exact-feasibility
/// boundary at the returned powers, so a non-infeasible report always
/// satisfies the original constraints.
pub fn minimize_blocklength_rsma(
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let scheme = if cfg.force_p12_zero { "rsma-p12-zero" } else { "rsma" };
    if rsma_upfront_infeasible(sys, eps, targets) {
        return Ok(SolveReport::infeasible(scheme));
    }
    let prob = RsmaProblem::new(sys, eps, targets, cfg)?;
    let objective = |p: &PowerAllocation| -> f64 {
        let feas = |n: f64| {
            exact_constraints_satisfied(n, p, sys, eps, targets, EXACT_TOL).unwrap_or(false)
        };
        exact_min_n(&feas, sys.n_min, sys.n_max, 1e-3).unwrap_or(f64::INFINITY)
    };
    let mut best: Option<(f64, PowerAllocation, AoRun)> = None;
    for start in rsma_start_states(sys, cfg) {
        let Some(run) = rsma_ao_from(&prob, start) else {
            continue;
        };
        let (p, n_exact) = polish_powers(run.state.powers, sys.p_max, cfg.force_p12_zero, &objective);
        if !n_exact.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(b, _, _)| n_exact < *b) {
            best = Some((n_exact, p, run));
        }
    }
    let Some((n_star, powers, run)) = best else {
        return Ok(SolveReport::infeasible(scheme));
    };
    Ok(SolveReport {
        scheme: scheme.into(),
        n_star: Some(n_star),
        n_star_int: Some(n_star.ceil() as u64),
        powers: Some(powers),
        slacks: Some(SlackState { n: n_star, powers, ..run.state }),
        alpha: None,
        n_split: None,
        iterations: run.trace.len(),
        trace: run.trace,
        recoveries: run.recoveries,
        status: if run.converged { SolveStatus::Converged } else { SolveStatus::MaxIters },
    })
}

// ---------------------------------------------------------------------------
// NOMA: the same machinery with a single U1 stream
// ---------------------------------------------------------------------------

/// NOMA blocklength minimization. The U2-first order is solved by swapping
/// the user roles and unswapping the reported point.
pub fn minimize_blocklength_noma(
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    cfg: &SolverConfig,
    order: NomaOrder,
) -> Result<SolveReport> {
    let scheme = match order {
        NomaOrder::U1First => "noma12",
        NomaOrder::U2First => "noma21",
    };
    let (s_sys, s_eps, s_targets) = match order {
        NomaOrder::U1First => (*sys, *eps, *targets),
        NomaOrder::U2First => (
            SystemParams { g1: sys.g2, g2: sys.g1, ..*sys },
            StreamReliability { eps11: eps.eps22, eps12: eps.eps22, eps22: eps.eps11 },
            ThroughputTargets { t1: targets.t2, t2: targets.t1 },
        ),
    };
    let mut report = noma_solve_u1_first(&s_sys, &s_eps, &s_targets, cfg)?;
    report.scheme = scheme.into();
    if order == NomaOrder::U2First {
        if let Some(p) = report.powers {
            report.powers = Some(PowerAllocation { p11: p.p2, p12: 0.0, p2: p.p11 });
        }
        if let Some(sl) = report.slacks.as_mut() {
            std::mem::swap(&mut sl.delta11, &mut sl.delta22);
            if let Some(p) = report.powers {
                sl.powers = p;
            }
        }
        if let (Some(n), Some(p)) = (report.n_star, report.powers) {
            debug_assert!(noma_constraints_satisfied(
                n,
                p.p11,
                p.p2,
                sys,
                eps,
                targets,
                order,
                EXACT_TOL * 2.0
            )
            .unwrap_or(false));
        }
    }
    Ok(report)
}

fn noma_solve_u1_first(
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let (e1, e2) = noma_message_errors(eps.eps11, eps.eps22, false);
    if rsma_upfront_infeasible(sys, eps, targets) {
        return Ok(SolveReport::infeasible("noma12"));
    }
    let cfg_single = SolverConfig { force_p12_zero: true, ..*cfg };
    let mut prob = RsmaProblem::new(sys, eps, targets, &cfg_single)?;
    // swap in the NOMA error conventions
    let q1 = match cfg.convention {
        EpsilonConvention::MessageLevel => inverse_q(e1)?,
        EpsilonConvention::PerStream => inverse_q(eps.eps11)?,
    };
    prob.q_e = (q1, q1, inverse_q(eps.eps22)?);
    prob.factors = (1.0 - e1, 1.0 - e2);

    let objective = |p: &PowerAllocation| -> f64 {
        let feas = |n: f64| {
            noma_constraints_satisfied(
                n,
                p.p11,
                p.p2,
                sys,
                eps,
                targets,
                NomaOrder::U1First,
                EXACT_TOL,
            )
            .unwrap_or(false)
        };
        exact_min_n(&feas, sys.n_min, sys.n_max, 1e-3).unwrap_or(f64::INFINITY)
    };
    let mut best: Option<(f64, PowerAllocation, AoRun)> = None;
    for start in rsma_start_states(sys, &cfg_single) {
        let Some(run) = rsma_ao_from(&prob, start) else {
            continue;
        };
        let (p, n_exact) = polish_powers(run.state.powers, sys.p_max, true, &objective);
        if !n_exact.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(b, _, _)| n_exact < *b) {
            best = Some((n_exact, p, run));
        }
    }
    let Some((n_star, powers, run)) = best else {
        return Ok(SolveReport::infeasible("noma12"));
    };
    Ok(SolveReport {
        scheme: "noma12".into(),
        n_star: Some(n_star),
        n_star_int: Some(n_star.ceil() as u64),
        powers: Some(powers),
        slacks: Some(SlackState { n: n_star, powers, ..run.state }),
        alpha: None,
        n_split: None,
        iterations: run.trace.len(),
        trace: run.trace,
        recoveries: run.recoveries,
        status: if run.converged { SolveStatus::Converged } else { SolveStatus::MaxIters },
    })
}
