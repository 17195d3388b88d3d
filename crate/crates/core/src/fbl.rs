//! Scalar finite-blocklength primitives.
//!
//! The normal approximation of the maximal achievable rate at blocklength `n`,
//! SINR `γ` and decoding error probability `ε` is
//!
//! ```text
//! R(n, γ, ε) ≈ log2(1+γ) − sqrt(V/n) · Q⁻¹(ε) · log2(e),   V = 1 − (1+γ)⁻²
//! ```
//!
//! `inverse_q` evaluates the Gaussian tail quantile to better than 1e-10
//! absolute over `p ∈ [1e-12, 1−1e-12]`: an inverse-CDF rational
//! approximation seeds two Newton steps on `Q(x) − p`, with `Q` itself
//! computed from a rational `erfc` that keeps full relative accuracy in the
//! deep tail where URLLC targets (1e-9..1e-5) live.
//!
//! `fbl_rate` is deliberately *not* clamped at zero: the solver's linearized
//! constraints need the raw algebraic form. Throughput computations use
//! [`fbl_rate_clamped`].

use crate::{Error, Result};

/// log2(e)
pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// A predefined decoding error probability, validated to lie in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityTarget(f64);

impl ReliabilityTarget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::ProbabilityOutOfRange(epsilon));
        }
        Ok(Self(epsilon))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

// ---------------------------------------------------------------------------
// Gaussian tail
// ---------------------------------------------------------------------------

/// Complementary error function, rational approximation in three regions
/// (relative accuracy ~1e-16 including the deep tail).
fn erfc(x: f64) -> f64 {
    const SQRPI: f64 = 5.641_895_835_477_562_9e-1; // 1/sqrt(pi)
    let y = x.abs();
    let result = if y <= 0.468_75 {
        // erfc = 1 - erf, erf via rational in x^2
        const A: [f64; 5] = [
            3.161_123_743_870_565_6e0,
            1.138_641_541_510_501_56e2,
            3.774_852_376_853_020_2e2,
            3.209_377_589_138_469_47e3,
            1.857_777_061_846_031_53e-1,
        ];
        const B: [f64; 4] = [
            2.360_129_095_234_412_09e1,
            2.440_246_379_344_441_73e2,
            1.282_616_526_077_372_28e3,
            2.844_236_833_439_170_62e3,
        ];
        let z = y * y;
        let mut num = A[4] * z;
        let mut den = z;
        for i in 0..3 {
            num = (num + A[i]) * z;
            den = (den + B[i]) * z;
        }
        let erf = x * (num + A[3]) / (den + B[3]);
        return 1.0 - erf;
    } else if y <= 4.0 {
        const C: [f64; 9] = [
            5.641_884_969_886_700_9e-1,
            8.883_149_794_388_375_9e0,
            6.611_919_063_714_163e1,
            2.986_351_381_974_001_3e2,
            8.819_522_212_417_691e2,
            1.712_047_612_634_070_6e3,
            2.051_078_377_826_071_5e3,
            1.230_339_354_797_997_2e3,
            2.153_115_354_744_038_46e-8,
        ];
        const D: [f64; 8] = [
            1.574_492_611_070_983_5e1,
            1.176_939_508_913_125e2,
            5.371_811_018_620_098_6e2,
            1.621_389_574_566_690_2e3,
            3.290_799_235_733_459_6e3,
            4.362_619_090_143_247e3,
            3.439_367_674_143_721_6e3,
            1.230_339_354_803_749_4e3,
        ];
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        let r = (num + C[7]) / (den + D[7]);
        scaled_exp(y) * r
    } else if y < 26.6 {
        const P: [f64; 6] = [
            3.053_266_349_612_323_44e-1,
            3.603_448_999_498_044_4e-1,
            1.257_817_261_112_292_46e-1,
            1.608_378_514_874_227_66e-2,
            6.587_491_615_298_378e-4,
            1.631_538_713_730_209_78e-2,
        ];
        const Q: [f64; 5] = [
            2.568_520_192_289_822_4e0,
            1.872_952_849_923_460_47e0,
            5.279_051_029_514_284_1e-1,
            6.051_834_131_244_131_9e-2,
            2.335_204_976_268_691_85e-3,
        ];
        let z = 1.0 / (y * y);
        let mut num = P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + P[i]) * z;
            den = (den + Q[i]) * z;
        }
        let mut r = z * (num + P[4]) / (den + Q[4]);
        r = (SQRPI - r) / y;
        scaled_exp(y) * r
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// exp(-y^2) split to preserve accuracy for large y.
fn scaled_exp(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Rational approximation of the standard normal quantile (lower tail and
/// central region), relative error below 1.2e-9; refined by Newton below.
fn norm_quantile_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239e0,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838e0,
        -2.549_732_539_343_734e0,
        4.374_664_141_464_968e0,
        2.938_163_982_698_783e0,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996e0,
        3.754_408_661_907_416e0,
    ];
    const P_LOW: f64 = 0.02425;
    debug_assert!(p > 0.0 && p <= 0.5);
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Inverse Gaussian tail: the `x` with `Q(x) = p`.
pub fn inverse_q(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) || p.is_nan() {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    // Work on the tail side p <= 0.5; 1-p is exact for p in [0.5, 1].
    if p > 0.5 {
        return Ok(-inverse_q(1.0 - p)?);
    }
    // Q^{-1}(p) = -Phi^{-1}(p)
    let mut x = -norm_quantile_approx(p);
    // Two Newton steps on Q(x) - p; dQ/dx = -pdf(x).
    for _ in 0..2 {
        let err = q_function(x) - p;
        let pdf = normal_pdf(x);
        if pdf > 0.0 {
            x += err / pdf;
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// FBL rate pieces
// ---------------------------------------------------------------------------

fn check_sinr(gamma: f64) -> Result<()> {
    if gamma < 0.0 || gamma.is_nan() {
        return Err(Error::InvalidSinr(gamma));
    }
    Ok(())
}

fn check_blocklength(n: f64) -> Result<()> {
    if !(n > 0.0) {
        return Err(Error::InvalidBlocklength(n));
    }
    Ok(())
}

/// Channel dispersion `V = 1 − (1+γ)⁻²`, in [0, 1).
pub fn channel_dispersion(gamma: f64) -> Result<f64> {
    check_sinr(gamma)?;
    let t = 1.0 + gamma;
    Ok(1.0 - 1.0 / (t * t))
}

/// Shannon capacity `log2(1+γ)` in bits per channel use.
pub fn shannon_capacity(gamma: f64) -> Result<f64> {
    check_sinr(gamma)?;
    Ok((1.0 + gamma).log2())
}

/// Dispersion penalty `D = sqrt(V/n) · Q⁻¹(ε) · log2(e)`.
///
/// Nonnegative for `ε < 1/2`; negative for `ε > 1/2` (the normal
/// approximation then exceeds capacity).
pub fn dispersion_penalty(n: f64, gamma: f64, eps: ReliabilityTarget) -> Result<f64> {
    check_blocklength(n)?;
    check_sinr(gamma)?;
    let qi = inverse_q(eps.value())?;
    Ok(dispersion_penalty_with_qinv(n, gamma, qi))
}

/// Dispersion penalty with a precomputed `Q⁻¹(ε)` (hot-path form used by the
/// region sweeps, the oracle, and the solver).
pub fn dispersion_penalty_with_qinv(n: f64, gamma: f64, qinv: f64) -> f64 {
    debug_assert!(n > 0.0 && gamma >= 0.0);
    let t = 1.0 + gamma;
    let v = 1.0 - 1.0 / (t * t);
    (v / n).sqrt() * qinv * LOG2_E
}

/// Normal-approximation achievable rate, bits per channel use. May be
/// negative when the dispersion penalty exceeds capacity.
pub fn fbl_rate(n: f64, gamma: f64, eps: ReliabilityTarget) -> Result<f64> {
    check_blocklength(n)?;
    check_sinr(gamma)?;
    let qi = inverse_q(eps.value())?;
    Ok(fbl_rate_with_qinv(n, gamma, qi))
}

/// Rate clamped at zero, for throughput computations.
pub fn fbl_rate_clamped(n: f64, gamma: f64, eps: ReliabilityTarget) -> Result<f64> {
    Ok(fbl_rate(n, gamma, eps)?.max(0.0))
}

/// Unclamped rate with precomputed `Q⁻¹(ε)`.
pub fn fbl_rate_with_qinv(n: f64, gamma: f64, qinv: f64) -> f64 {
    (1.0 + gamma).log2() - dispersion_penalty_with_qinv(n, gamma, qinv)
}

/// Clamped rate with precomputed `Q⁻¹(ε)`.
pub fn fbl_rate_clamped_with_qinv(n: f64, gamma: f64, qinv: f64) -> f64 {
    fbl_rate_with_qinv(n, gamma, qinv).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // -----------------------------------------------------------------
    // Independent oracle: Q by adaptive Simpson on the density tail and
    // Q^{-1} by bisection. No code shared with the implementation path.
    // -----------------------------------------------------------------

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let m = 0.5 * (a + b);
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }

    fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            adaptive(f, a, m, left, tol / 2.0, depth - 1)
                + adaptive(f, m, b, right, tol / 2.0, depth - 1)
        }
    }

    /// Tail integral of the standard normal density for x >= 0, evaluated
    /// directly so there is no cancellation; the tolerance is relative to
    /// the integral so the deep tail keeps ~12 significant digits.
    fn q_oracle(x: f64) -> f64 {
        assert!(x >= 0.0);
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let b = x + 12.0; // the remainder beyond is ~exp(-12x - 72) relative
        let rough = simpson(&pdf, x, b);
        adaptive(&pdf, x, b, rough, 1e-14 * rough.abs(), 60)
    }

    /// Bisection on the lower tail; the upper half reduces by symmetry
    /// (1 - p is exact for p >= 0.5).
    fn inverse_q_oracle(p: f64) -> f64 {
        if p > 0.5 {
            return -inverse_q_oracle(1.0 - p);
        }
        let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q_oracle(mid) > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn q_oracle_sanity() {
        // Q(0) = 1/2, Q(1.96) ~ 0.025 (classic two-sided 5% point)
        assert_abs_diff_eq!(q_oracle(0.0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(q_oracle(1.959963984540054), 0.025, epsilon = 1e-12);
    }

    #[test]
    fn inverse_q_center_and_symmetry() {
        assert_eq!(inverse_q(0.5).unwrap(), 0.0);
        // exactly representable complements: strict symmetry
        for p in [0.25, 0.125, 0.375, 0.0625] {
            let a = inverse_q(p).unwrap();
            let b = inverse_q(1.0 - p).unwrap();
            assert_abs_diff_eq!(a, -b, epsilon = 1e-13);
        }
        // tail values: 1-p itself rounds, so the tolerance scales with the
        // quantile sensitivity 1/pdf at the point
        for p in [1e-9, 1e-6, 1e-3] {
            let a = inverse_q(p).unwrap();
            let b = inverse_q(1.0 - p).unwrap();
            let tol = 4.0 * f64::EPSILON / normal_pdf(a) + 1e-12;
            assert_abs_diff_eq!(a, -b, epsilon = tol);
        }
    }

    #[test]
    fn inverse_q_matches_bisection_oracle() {
        // 4.7534243088228989 was frozen from the bisection oracle below;
        // both routes must agree to the spec'd 1e-10.
        let x = inverse_q(1e-6).unwrap();
        assert_abs_diff_eq!(x, 4.753424308822899, epsilon = 1e-10);
        assert_abs_diff_eq!(x, inverse_q_oracle(1e-6), epsilon = 1e-10);

        for p in [1e-12, 1e-9, 1e-5, 1e-3, 0.02, 0.2, 0.5, 0.9, 1.0 - 1e-9, 1.0 - 1e-12] {
            let got = inverse_q(p).unwrap();
            let want = inverse_q_oracle(p);
            assert!(
                (got - want).abs() <= 1e-10,
                "p={p:e}: got {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn inverse_q_round_trip() {
        for p in [1e-9, 1e-6, 1e-5, 1e-3, 0.5] {
            let x = inverse_q(p).unwrap();
            let back = q_function(x);
            assert!(
                ((back - p) / p).abs() < 1e-9,
                "round trip p={p:e} -> {back:e}"
            );
        }
    }

    #[test]
    fn inverse_q_domain_errors() {
        assert!(inverse_q(0.0).is_err());
        assert!(inverse_q(1.0).is_err());
        assert!(inverse_q(-0.1).is_err());
        assert!(inverse_q(f64::NAN).is_err());
    }

    #[test]
    fn dispersion_known_values() {
        assert_eq!(channel_dispersion(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(channel_dispersion(1.0).unwrap(), 0.75, epsilon = 1e-15);
        // approaches 1 monotonically (1e7 keeps 1 - (1+g)^-2 representable)
        assert!(channel_dispersion(1e7).unwrap() < 1.0);
        assert!(channel_dispersion(1e7).unwrap() > channel_dispersion(1e5).unwrap());
        assert!(channel_dispersion(-0.5).is_err());
    }

    #[test]
    fn capacity_known_values() {
        assert_eq!(shannon_capacity(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(shannon_capacity(1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(shannon_capacity(3.0).unwrap(), 2.0, epsilon = 1e-15);
        assert!(shannon_capacity(-1e-9).is_err());
    }

    #[test]
    fn penalty_known_values() {
        let e = ReliabilityTarget::new(1e-6).unwrap();
        let half = ReliabilityTarget::new(0.5).unwrap();
        assert_eq!(dispersion_penalty(700.0, 0.0, e).unwrap(), 0.0);
        assert_abs_diff_eq!(dispersion_penalty(700.0, 1.3, half).unwrap(), 0.0, epsilon = 1e-15);
        // frozen: sqrt(0.75/500) * 4.7534243088228989 * log2(e)
        assert_abs_diff_eq!(
            dispersion_penalty(500.0, 1.0, e).unwrap(),
            0.265599193098592,
            epsilon = 1e-12
        );
        assert!(dispersion_penalty(0.0, 1.0, e).is_err());
        assert!(dispersion_penalty(-5.0, 1.0, e).is_err());
    }

    #[test]
    fn rate_known_values() {
        let e = ReliabilityTarget::new(1e-6).unwrap();
        let half = ReliabilityTarget::new(0.5).unwrap();
        // zero penalty at eps = 1/2 recovers Shannon capacity exactly
        assert_eq!(
            fbl_rate(123.0, 2.5, half).unwrap(),
            shannon_capacity(2.5).unwrap()
        );
        // infinite blocklength limit
        assert_eq!(fbl_rate(f64::INFINITY, 1.0, e).unwrap(), 1.0);
        // frozen from the penalty value above
        assert_abs_diff_eq!(
            fbl_rate(500.0, 1.0, e).unwrap(),
            1.0 - 0.265599193098592,
            epsilon = 1e-12
        );
        // clamping
        assert!(fbl_rate(100.0, 0.01, e).unwrap() < 0.0);
        assert_eq!(fbl_rate_clamped(100.0, 0.01, e).unwrap(), 0.0);
    }

    #[test]
    fn penalty_scaling_law() {
        let e = ReliabilityTarget::new(1e-6).unwrap();
        for n in [100.0, 333.0, 1234.5] {
            for g in [0.1, 1.0, 7.3] {
                let d1 = dispersion_penalty(n, g, e).unwrap();
                let d4 = dispersion_penalty(4.0 * n, g, e).unwrap();
                assert!(
                    (d4 - d1 / 2.0).abs() <= 1e-12 * d1.abs(),
                    "D(4n) != D(n)/2 at n={n}, g={g}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn inverse_q_strictly_decreasing(p1 in 1e-9f64..0.9999, gap in 1e-6f64..0.1) {
            let p2 = (p1 + gap).min(1.0 - 1e-9);
            prop_assume!(p2 > p1);
            let x1 = inverse_q(p1).unwrap();
            let x2 = inverse_q(p2).unwrap();
            prop_assert!(x1 > x2, "Q^-1 not decreasing: {p1} -> {x1}, {p2} -> {x2}");
        }

        #[test]
        fn dispersion_increasing_and_bounded(g1 in 1e-6f64..1e5, factor in 1.001f64..10.0) {
            let v1 = channel_dispersion(g1).unwrap();
            let v2 = channel_dispersion(g1 * factor).unwrap();
            prop_assert!(v2 > v1);
            prop_assert!((0.0..1.0).contains(&v1));
            prop_assert!((0.0..1.0).contains(&v2));
        }

        #[test]
        fn rate_strictly_increasing_in_n(
            n1 in 50.0f64..5000.0,
            extra in 1.0f64..5000.0,
            g in 0.01f64..50.0,
            eps in 1e-9f64..0.4,
        ) {
            let e = ReliabilityTarget::new(eps).unwrap();
            let r1 = fbl_rate(n1, g, e).unwrap();
            let r2 = fbl_rate(n1 + extra, g, e).unwrap();
            prop_assert!(r2 > r1);
        }

        #[test]
        fn clamped_rate_nondecreasing_in_gamma(
            n in 100.0f64..3000.0,
            g in 0.0f64..20.0,
            dg in 0.001f64..5.0,
        ) {
            let e = ReliabilityTarget::new(1e-6).unwrap();
            let r1 = fbl_rate_clamped(n, g, e).unwrap();
            let r2 = fbl_rate_clamped(n, g + dg, e).unwrap();
            prop_assert!(r2 >= r1 - 1e-12);
        }
    }
}
