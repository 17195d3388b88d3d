//! FDMA/TDMA blocklength minimization.
//!
//! OMA splits the block between the users, `n1 = α·n`, `n2 = (1−α)·n`, so the
//! objective is the total `n1 + n2 = n` with per-user box constraints
//! `n_min ≤ n_i ≤ n_max`. There is nothing to linearize: for fixed total `n`
//! feasibility over the two powers is checked exactly by a deterministic
//! refining grid search, and the total is bisected (throughput grows with
//! both per-user blocklengths). Under a fixed fraction the two users
//! decouple and full power is optimal, which skips the search entirely.

use crate::channel::{PowerAllocation, SystemParams};
use crate::fbl::shannon_capacity;
use crate::region::AlphaRule;
use crate::reliability::{
    oma_effective_throughput, OmaScheme, StreamReliability, ThroughputTargets,
};
use crate::solver::{SolveReport, SolveStatus, SolverConfig, EXACT_TOL};
use crate::Result;

/// Exact OMA feasibility of a candidate point, including the per-user
/// blocklength boxes.
#[allow(clippy::too_many_arguments)]
pub fn oma_constraints_satisfied(
    n_total: f64,
    p1: f64,
    p2: f64,
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    scheme: OmaScheme,
    rule: AlphaRule,
    tol: f64,
) -> bool {
    let Ok(alpha) = rule.resolve(p1, p2) else {
        return false;
    };
    let a = alpha.value();
    let (n1, n2) = (a * n_total, (1.0 - a) * n_total);
    if n1 < sys.n_min - 1e-9
        || n2 < sys.n_min - 1e-9
        || n1 > sys.n_max + 1e-9
        || n2 > sys.n_max + 1e-9
    {
        return false;
    }
    if p1 > sys.p_max * (1.0 + 1e-9) || p2 > sys.p_max * (1.0 + 1e-9) {
        return false;
    }
    match oma_effective_throughput(n_total, p1, p2, alpha, sys, eps.eps11, eps.eps22, scheme) {
        Ok((t1, t2)) => t1 >= targets.t1 - tol && t2 >= targets.t2 - tol,
        Err(_) => false,
    }
}

/// Deterministic refining search for powers satisfying the targets at total
/// blocklength `n_total`. Returns the best (max-min margin) point found and
/// whether it is feasible.
fn search_powers(
    n_total: f64,
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    scheme: OmaScheme,
    rule: AlphaRule,
) -> (bool, (f64, f64)) {
    let pt = sys.p_max;
    let p_lo = 1e-4 * pt;

    if let AlphaRule::Fixed(_) = rule {
        // fixed fraction decouples the users; throughput rises with power
        let ok = oma_constraints_satisfied(
            n_total, pt, pt, sys, eps, targets, scheme, rule, EXACT_TOL,
        );
        return (ok, (pt, pt));
    }

    let margin = |p1: f64, p2: f64| -> f64 {
        let Ok(alpha) = rule.resolve(p1, p2) else {
            return f64::NEG_INFINITY;
        };
        let a = alpha.value();
        let (n1, n2) = (a * n_total, (1.0 - a) * n_total);
        if n1 < sys.n_min || n2 < sys.n_min || n1 > sys.n_max || n2 > sys.n_max {
            return f64::NEG_INFINITY;
        }
        match oma_effective_throughput(n_total, p1, p2, alpha, sys, eps.eps11, eps.eps22, scheme)
        {
            Ok((t1, t2)) => (t1 - targets.t1).min(t2 - targets.t2),
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let (mut lo1, mut hi1, mut lo2, mut hi2) = (p_lo, pt, p_lo, pt);
    let mut best = (f64::NEG_INFINITY, (pt, pt));
    for _level in 0..3 {
        const K: usize = 17;
        for i in 0..K {
            let p1 = lo1 + (hi1 - lo1) * i as f64 / (K - 1) as f64;
            for j in 0..K {
                let p2 = lo2 + (hi2 - lo2) * j as f64 / (K - 1) as f64;
                let m = margin(p1, p2);
                if m > best.0 {
                    best = (m, (p1, p2));
                }
            }
        }
        if best.0 > 0.0 {
            return (true, best.1);
        }
        let (w1, w2) = ((hi1 - lo1) / 8.0, (hi2 - lo2) / 8.0);
        let (b1, b2) = best.1;
        lo1 = (b1 - w1).max(p_lo);
        hi1 = (b1 + w1).min(pt);
        lo2 = (b2 - w2).max(p_lo);
        hi2 = (b2 + w2).min(pt);
    }
    (best.0 > 0.0, best.1)
}

/// Minimizes the total OMA blocklength `n1 + n2` over the powers (the
/// fraction follows the configured rule).
pub fn minimize_blocklength_oma(
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &ThroughputTargets,
    cfg: &SolverConfig,
    scheme: OmaScheme,
    rule: AlphaRule,
) -> Result<SolveReport> {
    let tag = match scheme {
        OmaScheme::Fdma => "fdma",
        OmaScheme::Tdma => "tdma",
    };
    // capacity bound: each user's rate never exceeds its clean full-band
    // capacity, and n_i <= n_max
    let c1 = shannon_capacity(sys.p_max * sys.g1 / sys.noise_var)?;
    let c2 = shannon_capacity(sys.p_max * sys.g2 / sys.noise_var)?;
    if targets.t1 > (1.0 - eps.eps11) * sys.n_max * c1
        || targets.t2 > (1.0 - eps.eps22) * sys.n_max * c2
    {
        return Ok(SolveReport::infeasible(tag));
    }

    let (lo0, hi0) = (2.0 * sys.n_min, 2.0 * sys.n_max);
    let feas = |n: f64| search_powers(n, sys, eps, targets, scheme, rule);

    let (ok_hi, mut witness) = feas(hi0);
    if !ok_hi {
        return Ok(SolveReport::infeasible(tag));
    }
    let (ok_lo, w_lo) = feas(lo0);
    let n_lin = if ok_lo {
        witness = w_lo;
        lo0
    } else {
        let (mut lo, mut hi) = (lo0, hi0);
        while hi - lo > cfg.bisect_res {
            let mid = 0.5 * (lo + hi);
            let (ok, w) = feas(mid);
            if ok {
                hi = mid;
                witness = w;
            } else {
                lo = mid;
            }
        }
        hi
    };

    // exact boundary at the found powers, then a local polish: the total is
    // sharply sensitive to the power ratio through the blocklength split
    let objective = |p: &PowerAllocation| -> f64 {
        let Ok(alpha) = rule.resolve(p.p11, p.p2) else {
            return f64::INFINITY;
        };
        let a = alpha.value();
        let hi_cap = (sys.n_max / a.max(1.0 - a)).min(hi0);
        let exact = |n: f64| {
            oma_constraints_satisfied(n, p.p11, p.p2, sys, eps, targets, scheme, rule, EXACT_TOL)
        };
        crate::solver::exact_min_n(&exact, lo0, hi_cap, 1e-3).unwrap_or(f64::INFINITY)
    };
    let start = PowerAllocation { p11: witness.0, p12: 0.0, p2: witness.1 };
    let (best_p, n_polished) = crate::solver::polish_powers(start, sys.p_max, true, &objective);
    let (p1, p2, n_star) = if n_polished.is_finite() {
        (best_p.p11, best_p.p2, n_polished)
    } else {
        (witness.0, witness.1, n_lin)
    };
    let a = rule.resolve(p1, p2)?.value();

    Ok(SolveReport {
        scheme: tag.into(),
        n_star: Some(n_star),
        n_star_int: Some(n_star.ceil() as u64),
        powers: Some(PowerAllocation { p11: p1, p12: 0.0, p2 }),
        slacks: None,
        alpha: Some(a),
        n_split: Some((a * n_star, (1.0 - a) * n_star)),
        iterations: 1,
        trace: vec![n_lin],
        recoveries: 0,
        status: SolveStatus::Converged,
    })
}
