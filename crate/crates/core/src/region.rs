//! Achievable-rate-region tracing for RSMA, NOMA (both orders), FDMA, and
//! TDMA at fixed per-user total powers, in the FBL regime and the IBL limit.
//!
//! The RSMA region is traced over the split fraction `β` of U1's budget
//! between its two streams (`p11 = β·P1`, `p12 = (1−β)·P1`) at fixed totals;
//! passing `n = f64::INFINITY` removes the dispersion penalty and yields the
//! IBL curve.

use serde::{Deserialize, Serialize};

use crate::channel::{
    aggregate_sinrs, fdma_sinrs, noma_sinrs, rsma_sinrs, tdma_sinrs, NomaOrder, OmaFraction,
    PowerAllocation, SystemParams,
};
use crate::fbl::{fbl_rate_clamped_with_qinv, inverse_q, shannon_capacity};
use crate::reliability::{oma_rate_with_qinv, OmaScheme, StreamReliability};
use crate::{Error, Result};

/// A jointly achievable rate pair, bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

/// How the bandwidth/time fraction of an OMA scheme is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaRule {
    /// A fixed fraction for U1.
    Fixed(f64),
    /// `α = P1 / (P1 + P2)`, tracking the current powers.
    PowerRatio,
}

impl AlphaRule {
    pub fn resolve(&self, p1: f64, p2: f64) -> Result<OmaFraction> {
        match self {
            AlphaRule::Fixed(a) => OmaFraction::new(*a),
            AlphaRule::PowerRatio => OmaFraction::from_power_ratio(p1, p2),
        }
    }
}

/// Identifies what a traced boundary belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionScheme {
    Rsma,
    Noma12,
    Noma21,
    Fdma,
    Tdma,
    IblPentagon,
}

impl RegionScheme {
    pub fn label(&self) -> &'static str {
        match self {
            RegionScheme::Rsma => "rsma",
            RegionScheme::Noma12 => "noma12",
            RegionScheme::Noma21 => "noma21",
            RegionScheme::Fdma => "fdma",
            RegionScheme::Tdma => "tdma",
            RegionScheme::IblPentagon => "ibl-pentagon",
        }
    }
}

/// A traced boundary: `points` sorted by `r1` ascending. At small
/// blocklengths the clamped swept curve can turn back on itself, so the raw
/// sweep may contain points dominated by others; [`RegionBoundary::frontier`]
/// extracts the Pareto staircase (`r1` ascending, `r2` non-increasing) that
/// actually bounds the achievable region. `params` carries the sweep
/// coordinate that produced each point (β for RSMA, α for OMA; NaN for
/// closed-form corner points).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub scheme: RegionScheme,
    /// Blocklength; `f64::INFINITY` marks the IBL curve.
    pub n: f64,
    pub points: Vec<RatePoint>,
    pub params: Vec<f64>,
}

impl RegionBoundary {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::MalformedBoundary("no points".into()));
        }
        if self.points.len() != self.params.len() {
            return Err(Error::MalformedBoundary("params/points length mismatch".into()));
        }
        for p in &self.points {
            if !(p.r1.is_finite() && p.r2.is_finite() && p.r1 >= 0.0 && p.r2 >= 0.0) {
                return Err(Error::MalformedBoundary(format!(
                    "invalid rate point ({}, {})",
                    p.r1, p.r2
                )));
            }
        }
        for w in self.points.windows(2) {
            if w[1].r1 < w[0].r1 - 1e-12 {
                return Err(Error::MalformedBoundary(format!(
                    "r1 not ascending: {} then {}",
                    w[0].r1, w[1].r1
                )));
            }
        }
        Ok(())
    }

    /// The non-dominated subset: `r1` ascending, `r2` strictly decreasing.
    pub fn frontier(&self) -> Vec<RatePoint> {
        let mut out: Vec<RatePoint> = Vec::with_capacity(self.points.len());
        // scan right-to-left keeping the running max of r2
        let mut best_r2 = f64::NEG_INFINITY;
        for p in self.points.iter().rev() {
            if p.r2 > best_r2 {
                best_r2 = p.r2;
                out.push(*p);
            }
        }
        out.reverse();
        out
    }

    fn sort_points(points: &mut Vec<(f64, RatePoint)>) {
        points.sort_by(|a, b| {
            a.1.r1
                .partial_cmp(&b.1.r1)
                .unwrap()
                .then(b.1.r2.partial_cmp(&a.1.r2).unwrap())
        });
    }
}

/// The infinite-blocklength MAC pentagon frontier:
/// `R1 ≤ C(P1G1/σ²)`, `R2 ≤ C(P2G2/σ²)`, `R1 + R2 ≤ C(γ_sum)`,
/// returned as its corner points in closed form.
pub fn ibl_mac_pentagon(p1_total: f64, p2: f64, sys: &SystemParams) -> Result<RegionBoundary> {
    let p = PowerAllocation::new(p1_total, 0.0, p2)?;
    let agg = aggregate_sinrs(&p, sys);
    let c1_max = shannon_capacity(p1_total * sys.g1 / sys.noise_var)?;
    let c2_max = shannon_capacity(p2 * sys.g2 / sys.noise_var)?;
    // C(g1)+C(P2G2/s2) = C(g_sum) = C(P1G1/s2)+C(g2): the sum edge connects
    // the two SIC corners.
    let corner_a = RatePoint { r1: shannon_capacity(agg.g1)?, r2: c2_max };
    let corner_b = RatePoint { r1: c1_max, r2: shannon_capacity(agg.g2)? };
    let points = vec![
        RatePoint { r1: 0.0, r2: c2_max },
        corner_a,
        corner_b,
        RatePoint { r1: c1_max, r2: 0.0 },
    ];
    let params = vec![f64::NAN; points.len()];
    let b = RegionBoundary { scheme: RegionScheme::IblPentagon, n: f64::INFINITY, points, params };
    b.validate()?;
    Ok(b)
}

/// RSMA frontier swept over the U1 stream split `β ∈ [0, 1]` at fixed totals.
pub fn rsma_fbl_boundary(
    n: f64,
    p1_total: f64,
    p2: f64,
    sys: &SystemParams,
    s: &StreamReliability,
    num_points: usize,
) -> Result<RegionBoundary> {
    if num_points < 2 {
        return Err(Error::InvalidParam {
            name: "num_points",
            value: num_points as f64,
            reason: "need at least the two sweep endpoints",
        });
    }
    if !(n > 0.0) {
        return Err(Error::InvalidBlocklength(n));
    }
    let q11 = inverse_q(s.eps11)?;
    let q12 = inverse_q(s.eps12)?;
    let q22 = inverse_q(s.eps22)?;
    let mut pts = Vec::with_capacity(num_points);
    for i in 0..num_points {
        let beta = i as f64 / (num_points - 1) as f64;
        let p = PowerAllocation::new(beta * p1_total, (1.0 - beta) * p1_total, p2)?;
        let g = rsma_sinrs(&p, sys);
        let r1 = fbl_rate_clamped_with_qinv(n, g.g11, q11) + fbl_rate_clamped_with_qinv(n, g.g12, q12);
        let r2 = fbl_rate_clamped_with_qinv(n, g.g22, q22);
        pts.push((beta, RatePoint { r1, r2 }));
    }
    RegionBoundary::sort_points(&mut pts);
    let (params, points) = pts.into_iter().map(|(b, p)| (b, p)).unzip();
    let b = RegionBoundary { scheme: RegionScheme::Rsma, n, points, params };
    b.validate()?;
    Ok(b)
}

/// The single NOMA corner point at full powers for the given decode order.
pub fn noma_fbl_point(
    n: f64,
    p1: f64,
    p2: f64,
    sys: &SystemParams,
    eps11: f64,
    eps22: f64,
    order: NomaOrder,
) -> Result<RatePoint> {
    if !(n > 0.0) {
        return Err(Error::InvalidBlocklength(n));
    }
    let (g_first, g_second) = noma_sinrs(p1, p2, sys, order);
    let (g_u1, g_u2) = match order {
        NomaOrder::U1First => (g_first, g_second),
        NomaOrder::U2First => (g_second, g_first),
    };
    Ok(RatePoint {
        r1: fbl_rate_clamped_with_qinv(n, g_u1, inverse_q(eps11)?),
        r2: fbl_rate_clamped_with_qinv(n, g_u2, inverse_q(eps22)?),
    })
}

/// A single OMA rate point under the configured α rule.
#[allow(clippy::too_many_arguments)]
pub fn oma_fbl_point(
    n: f64,
    p1: f64,
    p2: f64,
    sys: &SystemParams,
    eps1: f64,
    eps2: f64,
    scheme: OmaScheme,
    rule: AlphaRule,
) -> Result<RatePoint> {
    let alpha = rule.resolve(p1, p2)?;
    oma_point_at(n, p1, p2, sys, eps1, eps2, scheme, alpha)
}

#[allow(clippy::too_many_arguments)]
fn oma_point_at(
    n: f64,
    p1: f64,
    p2: f64,
    sys: &SystemParams,
    eps1: f64,
    eps2: f64,
    scheme: OmaScheme,
    alpha: OmaFraction,
) -> Result<RatePoint> {
    if !(n > 0.0) {
        return Err(Error::InvalidBlocklength(n));
    }
    let a = alpha.value();
    let (g1, g2) = match scheme {
        OmaScheme::Fdma => fdma_sinrs(p1, p2, alpha, sys),
        OmaScheme::Tdma => tdma_sinrs(p1, p2, sys),
    };
    let r1 = oma_rate_with_qinv(a * n, g1, a, inverse_q(eps1)?).max(0.0);
    let r2 = oma_rate_with_qinv((1.0 - a) * n, g2, 1.0 - a, inverse_q(eps2)?).max(0.0);
    Ok(RatePoint { r1, r2 })
}

/// OMA frontier swept over `α` on an open uniform grid in (0, 1).
#[allow(clippy::too_many_arguments)]
pub fn oma_fbl_boundary(
    n: f64,
    p1: f64,
    p2: f64,
    sys: &SystemParams,
    eps1: f64,
    eps2: f64,
    scheme: OmaScheme,
    num_points: usize,
) -> Result<RegionBoundary> {
    if num_points < 2 {
        return Err(Error::InvalidParam {
            name: "num_points",
            value: num_points as f64,
            reason: "need at least two sweep points",
        });
    }
    let mut pts = Vec::with_capacity(num_points);
    for i in 0..num_points {
        let a = (i + 1) as f64 / (num_points + 1) as f64;
        let alpha = OmaFraction::new(a)?;
        let p = oma_point_at(n, p1, p2, sys, eps1, eps2, scheme, alpha)?;
        pts.push((a, p));
    }
    RegionBoundary::sort_points(&mut pts);
    let (params, points) = pts.into_iter().unzip();
    let tag = match scheme {
        OmaScheme::Fdma => RegionScheme::Fdma,
        OmaScheme::Tdma => RegionScheme::Tdma,
    };
    let b = RegionBoundary { scheme: tag, n, points, params };
    b.validate()?;
    Ok(b)
}

/// Whether `point` lies weakly inside the region bounded by `outer` and the
/// axes: left of the first frontier point the boundary extends horizontally
/// to the `r2` axis, between points it is interpolated linearly, and beyond
/// the last point the region ends.
pub fn region_contains(outer: &RegionBoundary, point: RatePoint, tol: f64) -> Result<bool> {
    outer.validate()?;
    let pts = outer.frontier();
    if point.r1 < -tol || point.r2 < -tol {
        return Ok(false);
    }
    let last = pts.last().unwrap();
    if point.r1 > last.r1 + tol {
        return Ok(false);
    }
    let first = pts.first().unwrap();
    if point.r1 <= first.r1 {
        return Ok(point.r2 <= first.r2 + tol);
    }
    // binary search for the segment containing r1
    let idx = pts.partition_point(|p| p.r1 < point.r1);
    let i = idx.clamp(1, pts.len() - 1);
    let (a, b) = (pts[i - 1], pts[i]);
    let frontier_r2 = if b.r1 > a.r1 {
        a.r2 + (b.r2 - a.r2) * (point.r1 - a.r1) / (b.r1 - a.r1)
    } else {
        b.r2
    };
    Ok(point.r2 <= frontier_r2 + tol)
}
