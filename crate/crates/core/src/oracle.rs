//! Brute-force verification of minimum feasible blocklengths.
//!
//! The oracle evaluates the exact nonlinear throughput expressions on a
//! uniform power grid and bisects on the blocklength — no linearization and
//! no code shared with the solver beyond the scalar rate primitives. It is
//! deliberately slow and simple; results are memoized per parameter set so
//! repeated cross-checks stay cheap.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

use once_cell::sync::Lazy;
use rayon::prelude::*;

use crate::channel::{NomaOrder, SystemParams};
use crate::fbl::{fbl_rate_clamped_with_qinv, inverse_q};
use crate::region::AlphaRule;
use crate::reliability::{oma_rate_with_qinv, OmaScheme, StreamReliability, ThroughputTargets};
use crate::{Error, Result};

/// Which scheme's feasibility the oracle checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeSpec {
    Rsma,
    Noma(NomaOrder),
    Oma(OmaScheme, AlphaRule),
}

/// Grid resolution for the brute-force search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Grid points per power dimension, endpoints included.
    pub power_steps: usize,
    /// Bisection resolution on the blocklength, channel uses.
    pub n_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { power_steps: 64, n_tol: 1.0 }
    }
}

fn exact_cascade(e11: f64, e12: f64, e22: f64) -> (f64, f64) {
    let e1 = e11 + (1.0 - e11) * e22 + (1.0 - e11) * (1.0 - e22) * e12;
    let e2 = e11 + (1.0 - e11) * e22;
    (e1, e2)
}

struct Ctx {
    q11: f64,
    q12: f64,
    q22: f64,
}

impl Ctx {
    fn new(eps: &StreamReliability) -> Result<Self> {
        Ok(Self {
            q11: inverse_q(eps.eps11)?,
            q12: inverse_q(eps.eps12)?,
            q22: inverse_q(eps.eps22)?,
        })
    }
}

fn rsma_feasible_at(
    n: f64,
    sys: &SystemParams,
    eps: &StreamReliability,
    t: &ThroughputTargets,
    steps: usize,
    ctx: &Ctx,
) -> bool {
    let pt = sys.p_max;
    let s2 = sys.noise_var;
    let grid: Vec<f64> = (0..steps).map(|i| pt * i as f64 / (steps - 1) as f64).collect();
    grid.par_iter().any(|&p12| {
        for &p11 in &grid {
            if p11 + p12 > pt * (1.0 + 1e-12) {
                break;
            }
            for &p2 in &grid {
                let g11 = p11 * sys.g1 / (p12 * sys.g1 + p2 * sys.g2 + s2);
                let g22 = p2 * sys.g2 / (p12 * sys.g1 + s2);
                let g12 = p12 * sys.g1 / s2;
                let e11 = if p11 > 0.0 { eps.eps11 } else { 0.0 };
                let e12 = if p12 > 0.0 { eps.eps12 } else { 0.0 };
                let e22 = if p2 > 0.0 { eps.eps22 } else { 0.0 };
                let (e1, e2) = exact_cascade(e11, e12, e22);
                let t1 = (1.0 - e1)
                    * n
                    * (fbl_rate_clamped_with_qinv(n, g11, ctx.q11)
                        + fbl_rate_clamped_with_qinv(n, g12, ctx.q12));
                if t1 < t.t1 {
                    continue;
                }
                let t2 = (1.0 - e2) * n * fbl_rate_clamped_with_qinv(n, g22, ctx.q22);
                if t2 >= t.t2 {
                    return true;
                }
            }
        }
        false
    })
}

fn noma_feasible_at(
    n: f64,
    sys: &SystemParams,
    eps: &StreamReliability,
    t: &ThroughputTargets,
    steps: usize,
    order: NomaOrder,
    ctx: &Ctx,
) -> bool {
    let pt = sys.p_max;
    let s2 = sys.noise_var;
    let grid: Vec<f64> = (0..steps).map(|i| pt * i as f64 / (steps - 1) as f64).collect();
    grid.par_iter().any(|&p1| {
        for &p2 in &grid {
            let e1s = if p1 > 0.0 { eps.eps11 } else { 0.0 };
            let e2s = if p2 > 0.0 { eps.eps22 } else { 0.0 };
            let (g_u1, g_u2, m1, m2) = match order {
                NomaOrder::U1First => {
                    let g1 = p1 * sys.g1 / (p2 * sys.g2 + s2);
                    let g2 = p2 * sys.g2 / s2;
                    (g1, g2, e1s + (1.0 - e1s) * e2s, e2s)
                }
                NomaOrder::U2First => {
                    let g2 = p2 * sys.g2 / (p1 * sys.g1 + s2);
                    let g1 = p1 * sys.g1 / s2;
                    (g1, g2, e1s, e2s + (1.0 - e2s) * e1s)
                }
            };
            let t1 = (1.0 - m1) * n * fbl_rate_clamped_with_qinv(n, g_u1, ctx.q11);
            let t2 = (1.0 - m2) * n * fbl_rate_clamped_with_qinv(n, g_u2, ctx.q22);
            if t1 >= t.t1 && t2 >= t.t2 {
                return true;
            }
        }
        false
    })
}

fn oma_feasible_at(
    n_total: f64,
    sys: &SystemParams,
    eps: &StreamReliability,
    t: &ThroughputTargets,
    steps: usize,
    scheme: OmaScheme,
    rule: AlphaRule,
    ctx: &Ctx,
) -> bool {
    let pt = sys.p_max;
    let s2 = sys.noise_var;
    // exclude zero power: the fraction rule needs positive powers
    let grid: Vec<f64> = (1..=steps).map(|i| pt * i as f64 / steps as f64).collect();
    grid.par_iter().any(|&p1| {
        for &p2 in &grid {
            let a = match rule {
                AlphaRule::Fixed(a) => a,
                AlphaRule::PowerRatio => p1 / (p1 + p2),
            };
            if !(a > 0.0 && a < 1.0) {
                continue;
            }
            let (n1, n2) = (a * n_total, (1.0 - a) * n_total);
            if n1 < sys.n_min || n2 < sys.n_min || n1 > sys.n_max || n2 > sys.n_max {
                continue;
            }
            let (g1, g2) = match scheme {
                OmaScheme::Fdma => (p1 * sys.g1 / (a * s2), p2 * sys.g2 / ((1.0 - a) * s2)),
                OmaScheme::Tdma => (p1 * sys.g1 / s2, p2 * sys.g2 / s2),
            };
            let t1 = (1.0 - eps.eps11) * n1 * oma_rate_with_qinv(n1, g1, a, ctx.q11).max(0.0);
            let t2 =
                (1.0 - eps.eps22) * n2 * oma_rate_with_qinv(n2, g2, 1.0 - a, ctx.q22).max(0.0);
            if t1 >= t.t1 && t2 >= t.t2 {
                return true;
            }
        }
        false
    })
}

/// Exact-formula feasibility of the throughput targets at blocklength `n`
/// (total blocklength for OMA), searched over the power grid.
pub fn oracle_feasible(
    n: f64,
    scheme: SchemeSpec,
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    grid: &GridSpec,
) -> Result<bool> {
    if grid.power_steps < 2 {
        return Err(Error::InvalidParam {
            name: "power_steps",
            value: grid.power_steps as f64,
            reason: "need at least two grid points",
        });
    }
    let ctx = Ctx::new(eps)?;
    Ok(match scheme {
        SchemeSpec::Rsma => rsma_feasible_at(n, sys, eps, targets, grid.power_steps, &ctx),
        SchemeSpec::Noma(order) => {
            noma_feasible_at(n, sys, eps, targets, grid.power_steps, order, &ctx)
        }
        SchemeSpec::Oma(s, rule) => {
            oma_feasible_at(n, sys, eps, targets, grid.power_steps, s, rule, &ctx)
        }
    })
}

fn cache_key(
    scheme: SchemeSpec,
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    grid: &GridSpec,
) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    let tag = match scheme {
        SchemeSpec::Rsma => 0u8,
        SchemeSpec::Noma(NomaOrder::U1First) => 1,
        SchemeSpec::Noma(NomaOrder::U2First) => 2,
        SchemeSpec::Oma(OmaScheme::Fdma, _) => 3,
        SchemeSpec::Oma(OmaScheme::Tdma, _) => 4,
    };
    tag.hash(&mut h);
    if let SchemeSpec::Oma(_, rule) = scheme {
        match rule {
            AlphaRule::PowerRatio => 0u64.hash(&mut h),
            AlphaRule::Fixed(a) => a.to_bits().hash(&mut h),
        }
    }
    for v in [
        sys.g1, sys.g2, sys.noise_var, sys.p_max, sys.n_min, sys.n_max, eps.eps11, eps.eps12,
        eps.eps22, targets.t1, targets.t2, grid.n_tol,
    ] {
        v.to_bits().hash(&mut h);
    }
    grid.power_steps.hash(&mut h);
    h.finish()
}

static MIN_CACHE: Lazy<Mutex<HashMap<u64, Option<f64>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn bisect_lower(
    scheme: SchemeSpec,
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    grid: &GridSpec,
    lo0: f64,
    hi0: f64,
) -> Result<f64> {
    if !oracle_feasible(hi0, scheme, sys, eps, targets, grid)? {
        return Err(Error::Infeasible(format!(
            "targets unreachable at n = {hi0} on the power grid"
        )));
    }
    if oracle_feasible(lo0, scheme, sys, eps, targets, grid)? {
        return Ok(lo0);
    }
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > grid.n_tol {
        let mid = 0.5 * (lo + hi);
        if oracle_feasible(mid, scheme, sys, eps, targets, grid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

/// Lower estimate of the minimum blocklength at which the targets are
/// feasible, by bisection on `n` (feasibility is monotone once the targets
/// are nonnegative) over the power grid.
///
/// The grid minimum converges to the continuous optimum from above as the
/// power grid refines, so the raw bracket is corrected by the gap observed
/// against the nested half-density grid (choose an odd `power_steps` to keep
/// the half grid nested). The result is a conservative lower value: the true
/// grid minimum lies within `n_tol` plus the correction above it.
/// `Err(Infeasible)` if even the largest admissible blocklength cannot meet
/// the targets on the grid.
pub fn oracle_min_blocklength(
    scheme: SchemeSpec,
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    grid: &GridSpec,
) -> Result<f64> {
    let key = cache_key(scheme, sys, eps, targets, grid);
    if let Some(hit) = MIN_CACHE.lock().unwrap().get(&key) {
        return hit.ok_or_else(|| Error::Infeasible("cached: infeasible at n_max".into()));
    }
    let (lo0, hi0) = match scheme {
        SchemeSpec::Oma(..) => (2.0 * sys.n_min, 2.0 * sys.n_max),
        _ => (sys.n_min, sys.n_max),
    };
    let result = (|| -> Result<f64> {
        let lo_full = bisect_lower(scheme, sys, eps, targets, grid, lo0, hi0)?;
        if lo_full == lo0 || grid.power_steps < 5 {
            return Ok(lo_full);
        }
        let half = GridSpec { power_steps: grid.power_steps / 2 + 1, ..*grid };
        let allowance = match bisect_lower(scheme, sys, eps, targets, &half, lo0, hi0) {
            Ok(lo_half) => (lo_half - lo_full).max(0.0),
            Err(_) => grid.n_tol,
        };
        Ok((lo_full - allowance).max(lo0))
    })();
    MIN_CACHE
        .lock()
        .unwrap()
        .insert(key, result.as_ref().ok().copied());
    result
}
