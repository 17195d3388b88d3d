//! Message-level error aggregation over the SIC chain and effective
//! throughput for all four access schemes.
//!
//! Effective throughput counts expected successfully delivered bits:
//! `T = (1 − ε_message) · n · rate`, with per-stream rates clamped at zero
//! (negative throughput is unphysical). Inside the throughput composition a
//! stream carrying zero power has no decode-error event, so its ε enters the
//! cascade as zero; this makes the RSMA formulas degenerate exactly to the
//! NOMA ones when a stream is switched off.

use serde::{Deserialize, Serialize};

use crate::channel::{
    fdma_sinrs, noma_sinrs, rsma_sinrs, tdma_sinrs, NomaOrder, OmaFraction, PowerAllocation,
    SystemParams,
};
use crate::fbl::{fbl_rate_clamped_with_qinv, inverse_q, ReliabilityTarget, LOG2_E};
use crate::{Error, Result};

/// Per-stream predefined error probabilities for RSMA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamReliability {
    pub eps11: f64,
    pub eps12: f64,
    pub eps22: f64,
}

impl StreamReliability {
    pub fn new(eps11: f64, eps12: f64, eps22: f64) -> Result<Self> {
        for e in [eps11, eps12, eps22] {
            ReliabilityTarget::new(e)?;
        }
        Ok(Self { eps11, eps12, eps22 })
    }

    /// All three streams at the same error probability.
    pub fn uniform(eps: f64) -> Result<Self> {
        Self::new(eps, eps, eps)
    }
}

/// Effective-throughput thresholds in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputTargets {
    pub t1: f64,
    pub t2: f64,
}

impl ThroughputTargets {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        for (name, v) in [("t1", t1), ("t2", t2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    value: v,
                    reason: "threshold must be nonnegative and finite",
                });
            }
        }
        Ok(Self { t1, t2 })
    }
}

// ---------------------------------------------------------------------------
// Message errors
// ---------------------------------------------------------------------------

pub(crate) fn rsma_msg_errors_raw(e11: f64, e12: f64, e22: f64, exact: bool) -> (f64, f64) {
    if exact {
        let e1 = e11 + (1.0 - e11) * e22 + (1.0 - e11) * (1.0 - e22) * e12;
        let e2 = e11 + (1.0 - e11) * e22;
        (e1, e2)
    } else {
        (e11 + e12 + e22, e11 + e22)
    }
}

/// Message error probabilities `(ε1, ε2)` of the two RSMA users under the
/// decode chain `s11 → s2 → s12`. With `exact = false` the products of stream
/// errors are dropped (the linearized sums used by the optimization).
pub fn rsma_message_errors(s: &StreamReliability, exact: bool) -> (f64, f64) {
    rsma_msg_errors_raw(s.eps11, s.eps12, s.eps22, exact)
}

/// NOMA message errors `(ε1, ε2)` for the U1-first labeling: the first
/// decoded message accumulates both stream errors, the second only its own.
pub fn noma_message_errors(eps11: f64, eps22: f64, exact: bool) -> (f64, f64) {
    if exact {
        (eps11 + (1.0 - eps11) * eps22, eps22)
    } else {
        (eps11 + eps22, eps22)
    }
}

// ---------------------------------------------------------------------------
// Effective throughput
// ---------------------------------------------------------------------------

/// Precomputed per-stream `Q⁻¹` values, so sweeps and grid searches avoid
/// re-inverting the Gaussian tail per point.
#[derive(Debug, Clone, Copy)]
pub struct RsmaRates {
    eps: StreamReliability,
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
}

impl RsmaRates {
    pub fn new(s: &StreamReliability) -> Result<Self> {
        Ok(Self {
            eps: *s,
            q11: inverse_q(s.eps11)?,
            q12: inverse_q(s.eps12)?,
            q22: inverse_q(s.eps22)?,
        })
    }

    /// `(T1, T2)` at blocklength `n` for an RSMA power allocation.
    /// Streams with zero power contribute neither rate nor error events.
    pub fn throughput(&self, n: f64, p: &PowerAllocation, sys: &SystemParams) -> (f64, f64) {
        let s = rsma_sinrs(p, sys);
        let r11 = fbl_rate_clamped_with_qinv(n, s.g11, self.q11);
        let r12 = fbl_rate_clamped_with_qinv(n, s.g12, self.q12);
        let r22 = fbl_rate_clamped_with_qinv(n, s.g22, self.q22);
        let e11 = if p.p11 > 0.0 { self.eps.eps11 } else { 0.0 };
        let e12 = if p.p12 > 0.0 { self.eps.eps12 } else { 0.0 };
        let e22 = if p.p2 > 0.0 { self.eps.eps22 } else { 0.0 };
        let (e1, e2) = rsma_msg_errors_raw(e11, e12, e22, true);
        ((1.0 - e1) * n * (r11 + r12), (1.0 - e2) * n * r22)
    }
}

/// RSMA effective throughput `(T1, T2)` in bits.
pub fn rsma_effective_throughput(
    n: f64,
    p: &PowerAllocation,
    sys: &SystemParams,
    s: &StreamReliability,
) -> Result<(f64, f64)> {
    if !(n > 0.0) {
        return Err(Error::InvalidBlocklength(n));
    }
    Ok(RsmaRates::new(s)?.throughput(n, p, sys))
}

/// NOMA effective throughput with explicit per-user rate and message error
/// probabilities. This is the general form; [`noma_effective_throughput`]
/// instantiates it with the scheme's own error convention, and the RSMA/NOMA
/// degeneration checks instantiate it with the matched mapping.
pub fn noma_throughput_with_errors(
    n: f64,
    p1: f64,
    p2: f64,
    sys: &SystemParams,
    order: NomaOrder,
    rate_eps: (f64, f64),
    msg_eps: (f64, f64),
) -> Result<(f64, f64)> {
    if !(n > 0.0) {
        return Err(Error::InvalidBlocklength(n));
    }
    let (g_first, g_second) = noma_sinrs(p1, p2, sys, order);
    let (g_u1, g_u2) = match order {
        NomaOrder::U1First => (g_first, g_second),
        NomaOrder::U2First => (g_second, g_first),
    };
    let r1 = fbl_rate_clamped_with_qinv(n, g_u1, inverse_q(rate_eps.0)?);
    let r2 = fbl_rate_clamped_with_qinv(n, g_u2, inverse_q(rate_eps.1)?);
    Ok(((1.0 - msg_eps.0) * n * r1, (1.0 - msg_eps.1) * n * r2))
}

/// NOMA effective throughput `(T1, T2)` with per-stream errors
/// `(eps11, eps22)`. The first decoded message accumulates both error events
/// (exact cascade); a silent user contributes no error event.
pub fn noma_effective_throughput(
    n: f64,
    p1: f64,
    p2: f64,
    sys: &SystemParams,
    eps11: f64,
    eps22: f64,
    order: NomaOrder,
) -> Result<(f64, f64)> {
    ReliabilityTarget::new(eps11)?;
    ReliabilityTarget::new(eps22)?;
    let e1 = if p1 > 0.0 { eps11 } else { 0.0 };
    let e2 = if p2 > 0.0 { eps22 } else { 0.0 };
    let msg = match order {
        NomaOrder::U1First => noma_message_errors(e1, e2, true),
        NomaOrder::U2First => {
            let (m2, m1) = noma_message_errors(e2, e1, true);
            (m1, m2)
        }
    };
    noma_throughput_with_errors(n, p1, p2, sys, order, (eps11, eps22), msg)
}

/// Which orthogonal scheme an OMA computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmaScheme {
    Fdma,
    Tdma,
}

/// Per-user OMA rate: resource fraction as a pre-log on the capacity term
/// and the per-user blocklength inside the dispersion term.
pub fn oma_rate_with_qinv(n_user: f64, gamma: f64, prelog: f64, qinv: f64) -> f64 {
    let t = 1.0 + gamma;
    let v = 1.0 - 1.0 / (t * t);
    prelog * t.log2() - (v / n_user).sqrt() * qinv * LOG2_E
}

/// OMA effective throughput `(T1, T2)`; the shared block of `n` channel uses
/// is split `n1 = α·n`, `n2 = (1−α)·n`. Errors if either per-user blocklength
/// falls below one channel use.
#[allow(clippy::too_many_arguments)]
pub fn oma_effective_throughput(
    n: f64,
    p1: f64,
    p2: f64,
    alpha: OmaFraction,
    sys: &SystemParams,
    eps1: f64,
    eps2: f64,
    scheme: OmaScheme,
) -> Result<(f64, f64)> {
    let a = alpha.value();
    let (n1, n2) = (a * n, (1.0 - a) * n);
    if n1 < 1.0 || n2 < 1.0 {
        return Err(Error::InvalidBlocklength(n1.min(n2)));
    }
    let (g1, g2) = match scheme {
        OmaScheme::Fdma => fdma_sinrs(p1, p2, alpha, sys),
        OmaScheme::Tdma => tdma_sinrs(p1, p2, sys),
    };
    let r1 = oma_rate_with_qinv(n1, g1, a, inverse_q(eps1)?).max(0.0);
    let r2 = oma_rate_with_qinv(n2, g2, 1.0 - a, inverse_q(eps2)?).max(0.0);
    Ok(((1.0 - eps1) * n1 * r1, (1.0 - eps2) * n2 * r2))
}
