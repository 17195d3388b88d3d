//! Two-user uplink channel parameters and per-scheme SINRs.
//!
//! All powers are linear watts; dB only appears at the CLI/scenario boundary.
//! The RSMA decoding order is fixed to `s11 → s2 → s12`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Static system parameters: channel power gains, noise variance, power
/// budget, and the blocklength box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Channel power gain of U1 (`|h1|²`, linear).
    pub g1: f64,
    /// Channel power gain of U2 (`|h2|²`, linear).
    pub g2: f64,
    /// Noise power at the base station.
    pub noise_var: f64,
    /// Maximum transmit power per user (linear).
    pub p_max: f64,
    /// Minimum blocklength (channel uses).
    pub n_min: f64,
    /// Maximum blocklength (channel uses).
    pub n_max: f64,
}

impl SystemParams {
    pub fn new(g1: f64, g2: f64, noise_var: f64, p_max: f64, n_min: f64, n_max: f64) -> Result<Self> {
        let check = |name: &'static str, v: f64| -> Result<()> {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    value: v,
                    reason: "must be positive and finite",
                });
            }
            Ok(())
        };
        check("g1", g1)?;
        check("g2", g2)?;
        check("noise_var", noise_var)?;
        check("p_max", p_max)?;
        check("n_min", n_min)?;
        if !(n_max >= n_min) {
            return Err(Error::InvalidParam {
                name: "n_max",
                value: n_max,
                reason: "must satisfy n_min <= n_max",
            });
        }
        Ok(Self { g1, g2, noise_var, p_max, n_min, n_max })
    }

    /// U1 is conventionally the strongest user. The formulas stay well
    /// defined either way, so this is a warning predicate, not an invariant.
    pub fn gains_ordered(&self) -> bool {
        self.g1 > self.g2
    }
}

/// Transmit powers of the three RSMA streams (linear watts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub p11: f64,
    pub p12: f64,
    pub p2: f64,
}

impl PowerAllocation {
    pub fn new(p11: f64, p12: f64, p2: f64) -> Result<Self> {
        for (name, v) in [("p11", p11), ("p12", p12), ("p2", p2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    value: v,
                    reason: "must be nonnegative and finite",
                });
            }
        }
        Ok(Self { p11, p12, p2 })
    }

    /// Total power of U1, `P1 = P11 + P12`.
    pub fn p1_total(&self) -> f64 {
        self.p11 + self.p12
    }

    /// Checks the power budget constraints `P11 + P12 <= P_t`, `P2 <= P_t`.
    pub fn within_budget(&self, sys: &SystemParams, tol: f64) -> bool {
        self.p1_total() <= sys.p_max + tol && self.p2 <= sys.p_max + tol
    }
}

/// Bandwidth (FDMA) or time (TDMA) fraction allocated to U1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmaFraction(f64);

impl OmaFraction {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidFraction(alpha));
        }
        Ok(Self(alpha))
    }

    /// The power-ratio rule `α = P1 / (P1 + P2)`.
    pub fn from_power_ratio(p1: f64, p2: f64) -> Result<Self> {
        if !(p1 > 0.0 && p2 > 0.0) {
            return Err(Error::InvalidFraction(f64::NAN));
        }
        Self::new(p1 / (p1 + p2))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// NOMA decoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NomaOrder {
    /// Decode U1's stream first (NOMA-12).
    U1First,
    /// Decode U2's stream first (NOMA-21).
    U2First,
}

/// RSMA per-stream SINRs under the decoding order `s11 → s2 → s12`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsmaSinrs {
    /// Stream `s11`, decoded first against `s12` and `s2`.
    pub g11: f64,
    /// Stream `s2`, decoded second against `s12`.
    pub g22: f64,
    /// Stream `s12`, decoded last on a clean channel.
    pub g12: f64,
}

/// Aggregate SINRs used by the rate-region bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateSinrs {
    pub g1: f64,
    pub g2: f64,
    pub g_sum: f64,
}

pub fn rsma_sinrs(p: &PowerAllocation, sys: &SystemParams) -> RsmaSinrs {
    let s2 = sys.noise_var;
    RsmaSinrs {
        g11: p.p11 * sys.g1 / (p.p12 * sys.g1 + p.p2 * sys.g2 + s2),
        g22: p.p2 * sys.g2 / (p.p12 * sys.g1 + s2),
        g12: p.p12 * sys.g1 / s2,
    }
}

pub fn aggregate_sinrs(p: &PowerAllocation, sys: &SystemParams) -> AggregateSinrs {
    let p1 = p.p1_total();
    let s2 = sys.noise_var;
    AggregateSinrs {
        g1: p1 * sys.g1 / (p.p2 * sys.g2 + s2),
        g2: p.p2 * sys.g2 / (p1 * sys.g1 + s2),
        g_sum: (p1 * sys.g1 + p.p2 * sys.g2) / s2,
    }
}

/// NOMA SINRs in decode order: `(first decoded, second decoded)`.
pub fn noma_sinrs(p1: f64, p2: f64, sys: &SystemParams, order: NomaOrder) -> (f64, f64) {
    let s2 = sys.noise_var;
    match order {
        NomaOrder::U1First => (p1 * sys.g1 / (p2 * sys.g2 + s2), p2 * sys.g2 / s2),
        NomaOrder::U2First => (p2 * sys.g2 / (p1 * sys.g1 + s2), p1 * sys.g1 / s2),
    }
}

/// FDMA SINRs `(γ1, γ2)` for bandwidth fractions `(α, 1−α)`.
pub fn fdma_sinrs(p1: f64, p2: f64, alpha: OmaFraction, sys: &SystemParams) -> (f64, f64) {
    let a = alpha.value();
    (
        p1 * sys.g1 / (a * sys.noise_var),
        p2 * sys.g2 / ((1.0 - a) * sys.noise_var),
    )
}

/// TDMA SINRs `(γ1, γ2)`; each user transmits at full power in its slot.
pub fn tdma_sinrs(p1: f64, p2: f64, sys: &SystemParams) -> (f64, f64) {
    (p1 * sys.g1 / sys.noise_var, p2 * sys.g2 / sys.noise_var)
}
