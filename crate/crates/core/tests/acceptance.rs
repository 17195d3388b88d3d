//! End-to-end acceptance suite: each test checks one headline property of
//! the library at its stated tolerance and prints a pass line. Run with
//! `cargo test -p rsma-fbl --test acceptance` (release or the optimized test
//! profile keeps the heavier solver/oracle checks fast).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsma_fbl::channel::{rsma_sinrs, NomaOrder, PowerAllocation, SystemParams};
use rsma_fbl::fbl::{
    dispersion_penalty, fbl_rate, inverse_q, q_function, shannon_capacity, ReliabilityTarget,
    LOG2_E,
};
use rsma_fbl::oracle::{oracle_min_blocklength, GridSpec, SchemeSpec};
use rsma_fbl::region::{
    noma_fbl_point, region_contains, rsma_fbl_boundary, AlphaRule, RatePoint,
};
use rsma_fbl::reliability::{
    noma_throughput_with_errors, rsma_effective_throughput, OmaScheme, StreamReliability,
    ThroughputTargets,
};
use rsma_fbl::scenario::Scenario;
use rsma_fbl::solver::{
    exact_constraints_satisfied, linearize_sinr, linearize_throughput, minimize_blocklength_noma,
    minimize_blocklength_oma, minimize_blocklength_rsma, noma_constraints_satisfied, nu, nu_prime,
    oma_constraints_satisfied, SinrConstraint, SlackState, SolverConfig,
};

fn sec5_sys(pt_db: f64) -> SystemParams {
    SystemParams::new(1.0, 0.7, 1.0, 10f64.powf(pt_db / 10.0), 100.0, 3000.0).unwrap()
}

fn uniform_eps() -> StreamReliability {
    StreamReliability::uniform(1e-6).unwrap()
}

/// (label, Pt in dB, T1, T2): spans both threshold orderings at 2 and 5 dB.
const SOLVE_SCENARIOS: [(&str, f64, f64, f64); 6] = [
    ("t1-heavy @5dB", 5.0, 300.0, 200.0),
    ("t1-heavy @2dB", 2.0, 300.0, 200.0),
    ("t2-heavy @5dB", 5.0, 150.0, 280.0),
    ("t2-heavy @2dB", 2.0, 150.0, 280.0),
    ("t1-extreme @5dB", 5.0, 400.0, 100.0),
    ("balanced @5dB", 5.0, 250.0, 250.0),
];

#[test]
fn sum_rate_decomposition_identity() {
    let start = Instant::now();
    let sys = sec5_sys(5.0);
    let e = ReliabilityTarget::new(1e-6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p11 = rng.gen_range(0.0..sys.p_max);
        let p12 = rng.gen_range(0.0..(sys.p_max - p11));
        let p2 = rng.gen_range(0.0..sys.p_max);
        let n = rng.gen_range(100.0..3000.0);
        let p = PowerAllocation::new(p11, p12, p2).unwrap();
        let g = rsma_sinrs(&p, &sys);
        let lhs = fbl_rate(n, g.g11, e).unwrap()
            + fbl_rate(n, g.g12, e).unwrap()
            + fbl_rate(n, g.g22, e).unwrap();
        let g_sum = (p.p1_total() * sys.g1 + p2 * sys.g2) / sys.noise_var;
        let rhs = shannon_capacity(g_sum).unwrap()
            - dispersion_penalty(n, g.g11, e).unwrap()
            - dispersion_penalty(n, g.g12, e).unwrap()
            - dispersion_penalty(n, g.g22, e).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    assert!(worst < 1e-9, "worst deviation {worst:e}");
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}");
    println!("PASS sum_rate_decomposition_identity: worst |dev| = {worst:.3e} in {dt:?}");
}

#[test]
fn fbl_primitive_accuracy() {
    // inverse-Q round trips
    for eps in [1e-9, 1e-6, 1e-5, 1e-3, 0.5] {
        let x = inverse_q(eps).unwrap();
        let back = q_function(x);
        let rel = ((back - eps) / eps).abs();
        assert!(rel < 1e-9, "round trip at {eps:e}: rel err {rel:e}");
    }
    // quartering the blocklength exactly halves the penalty
    let e = ReliabilityTarget::new(1e-6).unwrap();
    for n in [100.0, 517.0, 2999.0] {
        for g in [0.2, 1.0, 9.0] {
            let d1 = dispersion_penalty(n, g, e).unwrap();
            let d4 = dispersion_penalty(4.0 * n, g, e).unwrap();
            assert!((d4 - d1 / 2.0).abs() <= 1e-12 * d1);
        }
    }
    // eps = 1/2 recovers the Shannon capacity exactly
    let half = ReliabilityTarget::new(0.5).unwrap();
    for g in [0.3, 1.0, 4.0] {
        assert_eq!(fbl_rate(321.0, g, half).unwrap(), shannon_capacity(g).unwrap());
    }
    println!("PASS fbl_primitive_accuracy");
}

#[test]
fn linearization_tangency() {
    let sys = sec5_sys(5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let dref = 10f64.powf(rng.gen_range(-3.0..1.0));
        let n = rng.gen_range(100.0..3000.0);
        let eps = 10f64.powf(rng.gen_range(-8.0..-3.0));

        // throughput surrogate equals the exact expression at the reference
        let f = linearize_throughput(dref, eps, n).unwrap();
        let e_const = inverse_q(eps).unwrap() * LOG2_E / n.sqrt();
        let exact = (1.0 - eps) * n * ((1.0 + dref).log2() - e_const * nu(dref));
        assert!((f(dref) - exact).abs() <= 1e-10, "tangency broke at dref={dref}");

        // ν' against central finite differences
        let h = 1e-6;
        let fd = (nu(dref + h) - nu(dref - h)) / (2.0 * h);
        assert!((nu_prime(dref).unwrap() - fd).abs() <= 1e-6);

        // SINR surrogates are exact at a reference sitting on the constraint
        let p11 = rng.gen_range(0.01..sys.p_max / 2.0);
        let p12 = rng.gen_range(0.01..sys.p_max / 2.0);
        let p2 = rng.gen_range(0.01..sys.p_max);
        let powers = PowerAllocation::new(p11, p12, p2).unwrap();
        let g = rsma_sinrs(&powers, &sys);
        let state = SlackState {
            delta11: g.g11,
            delta22: g.g22,
            delta12: g.g12,
            tau11: 0.0,
            tau12: 0.0,
            powers,
            n,
        };
        let a = linearize_sinr(SinrConstraint::Gamma11GeDelta11, &state, &sys).unwrap();
        assert!(a.eval(&powers, g.g11).abs() <= 1e-10);
        let b = linearize_sinr(SinrConstraint::Gamma22GeDelta22, &state, &sys).unwrap();
        assert!(b.eval(&powers, g.g22).abs() <= 1e-10);
    }
    println!("PASS linearization_tangency (100 random references)");
}

#[test]
fn solver_matches_oracle() {
    let start = Instant::now();
    let eps = uniform_eps();
    let cfg = SolverConfig::default();
    let rule = AlphaRule::PowerRatio;
    let g_rsma = GridSpec { power_steps: 256, n_tol: 1.0 };
    let g_noma = GridSpec { power_steps: 256, n_tol: 1.0 };
    let g_oma = GridSpec { power_steps: 1024, n_tol: 1.0 };

    for (label, pt_db, t1, t2) in SOLVE_SCENARIOS {
        let sys = sec5_sys(pt_db);
        let t = ThroughputTargets::new(t1, t2).unwrap();
        let sandwich = |n: f64, o: f64, tag: &str| {
            assert!(
                o <= n && n <= o * 1.02 + 2.0,
                "{label}/{tag}: solver {n} vs oracle {o}"
            );
        };

        let rep = minimize_blocklength_rsma(&sys, &eps, &t, &cfg).unwrap();
        let n = rep.n_star.unwrap();
        assert!(exact_constraints_satisfied(n, &rep.powers.unwrap(), &sys, &eps, &t, 1e-6)
            .unwrap());
        let o = oracle_min_blocklength(SchemeSpec::Rsma, &sys, &eps, &t, &g_rsma).unwrap();
        sandwich(n, o, "rsma");

        let rep = minimize_blocklength_noma(&sys, &eps, &t, &cfg, NomaOrder::U1First).unwrap();
        let n = rep.n_star.unwrap();
        let p = rep.powers.unwrap();
        assert!(noma_constraints_satisfied(
            n,
            p.p11,
            p.p2,
            &sys,
            &eps,
            &t,
            NomaOrder::U1First,
            1e-6
        )
        .unwrap());
        let o =
            oracle_min_blocklength(SchemeSpec::Noma(NomaOrder::U1First), &sys, &eps, &t, &g_noma)
                .unwrap();
        sandwich(n, o, "noma12");

        for scheme in [OmaScheme::Fdma, OmaScheme::Tdma] {
            let rep = minimize_blocklength_oma(&sys, &eps, &t, &cfg, scheme, rule).unwrap();
            let n = rep.n_star.unwrap();
            let p = rep.powers.unwrap();
            assert!(oma_constraints_satisfied(
                n, p.p11, p.p2, &sys, &eps, &t, scheme, rule, 1e-6
            ));
            let o = oracle_min_blocklength(SchemeSpec::Oma(scheme, rule), &sys, &eps, &t, &g_oma)
                .unwrap();
            sandwich(n, o, if scheme == OmaScheme::Fdma { "fdma" } else { "tdma" });
        }
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "oracle cross-check took {dt:?}");
    println!(
        "PASS solver_matches_oracle ({} scenarios x 4 schemes in {dt:?})",
        SOLVE_SCENARIOS.len()
    );
}

#[test]
fn rate_region_containment_properties() {
    let sys = sec5_sys(5.0);
    let eps = uniform_eps();
    let (p1, p2) = (2.0, 1.0);

    // (a) at n = 2000 the swept region contains both SIC corner points
    let big = rsma_fbl_boundary(2000.0, p1, p2, &sys, &eps, 201).unwrap();
    for order in [NomaOrder::U1First, NomaOrder::U2First] {
        let c = noma_fbl_point(2000.0, p1, p2, &sys, 1e-6, 1e-6, order).unwrap();
        assert!(region_contains(&big, c, 1e-6).unwrap(), "corner {order:?} escaped at n=2000");
    }

    // (b) at n = 500 some swept NOMA operating point escapes: splitting U1
    // into two streams pays a third dispersion penalty
    let small = rsma_fbl_boundary(500.0, p1, p2, &sys, &eps, 201).unwrap();
    let mut escaped = 0usize;
    for i in 1..=100 {
        let frac = i as f64 / 100.0;
        let c12 = noma_fbl_point(500.0, p1, frac * p2, &sys, 1e-6, 1e-6, NomaOrder::U1First)
            .unwrap();
        if !region_contains(&small, c12, 1e-9).unwrap() {
            escaped += 1;
        }
        let c21 = noma_fbl_point(500.0, frac * p1, p2, &sys, 1e-6, 1e-6, NomaOrder::U2First)
            .unwrap();
        if !region_contains(&small, c21, 1e-9).unwrap() {
            escaped += 1;
        }
    }
    assert!(escaped > 0, "no swept NOMA point escaped the n=500 region");

    // (c) the IBL sweep sits on the pentagon's sum-rate edge
    let ibl = rsma_fbl_boundary(f64::INFINITY, p1, p2, &sys, &eps, 201).unwrap();
    let c_sum = shannon_capacity((p1 * sys.g1 + p2 * sys.g2) / sys.noise_var).unwrap();
    for pt in &ibl.points {
        assert!(
            (pt.r1 + pt.r2 - c_sum).abs() <= 1e-9,
            "IBL point off the sum edge by {}",
            (pt.r1 + pt.r2 - c_sum).abs()
        );
    }
    println!("PASS rate_region_containment_properties ({escaped} escaped points at n=500)");
}

fn minlen_scenario(t1: f64, t2: f64, extra: &str) -> (Scenario, String) {
    let text = format!(
        r#"
g1 = 1.0
g2 = 0.7
noise_var = 1.0
pt_db = 5.0
n_min = 100
n_max = 3000
eps11 = 1e-6
eps12 = 1e-6
eps22 = 1e-6
t1_th = {t1}
t2_th = {t2}
{extra}
"#
    );
    Scenario::from_toml(&text).unwrap()
}

#[test]
fn blocklength_vs_power_trends() {
    let start = Instant::now();
    // demanding U1: RSMA's split should beat every baseline outright
    let (scen, hash) = minlen_scenario(
        400.0,
        100.0,
        "pt_db_start = 2.0\npt_db_stop = 6.0\npt_db_points = 10",
    );
    let rows = rsma_fbl::experiments::run_blocklength_vs_power(&scen, &hash).unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.status == "converged"));
    let sweep = scen.power_sweep().unwrap();
    let at = |scheme: &str, db: f64| {
        rows.iter()
            .find(|r| r.scheme == scheme && r.pt_db == db)
            .and_then(|r| r.n_star)
            .unwrap()
    };
    for scheme in ["rsma", "noma12", "noma21", "fdma", "tdma"] {
        for w in sweep.windows(2) {
            let (a, b) = (at(scheme, w[0]), at(scheme, w[1]));
            assert!(b <= a + 1e-9, "{scheme} rose from {a} to {b} with more power");
        }
    }
    for &db in &sweep {
        let r = at("rsma", db);
        for other in ["noma12", "noma21", "fdma", "tdma"] {
            assert!(r <= at(other, db), "rsma {r} above {other} at {db} dB");
        }
    }

    // demanding U2: the U2 constraint pins p12 = 0, so RSMA and NOMA tie
    let eps = uniform_eps();
    let cfg = SolverConfig::default();
    let t = ThroughputTargets::new(150.0, 280.0).unwrap();
    for pt_db in [2.0, 5.0] {
        let sys = sec5_sys(pt_db);
        let r = minimize_blocklength_rsma(&sys, &eps, &t, &cfg).unwrap().n_star.unwrap();
        let n = minimize_blocklength_noma(&sys, &eps, &t, &cfg, NomaOrder::U1First)
            .unwrap()
            .n_star
            .unwrap();
        assert!((r - n).abs() <= cfg.xi, "RSMA {r} vs NOMA {n} at {pt_db} dB");
    }
    println!("PASS blocklength_vs_power_trends in {:?}", start.elapsed());
}

#[test]
fn blocklength_vs_epsilon_trends() {
    let start = Instant::now();
    let (scen, hash) = minlen_scenario(
        400.0,
        100.0,
        "eps_start = 1e-9\neps_stop = 1e-4\neps_points = 8\neps_pt_db_list = [2.0, 5.0]",
    );
    let rows = rsma_fbl::experiments::run_blocklength_vs_epsilon(&scen, &hash).unwrap();
    assert_eq!(rows.len(), 2 * 8 * 5);
    assert!(rows.iter().all(|r| r.status == "converged"));
    let eps_sweep = scen.eps_sweep().unwrap();
    let at = |scheme: &str, db: f64, e: f64| {
        rows.iter()
            .find(|r| r.scheme == scheme && r.pt_db == db && r.eps == e)
            .and_then(|r| r.n_star)
            .unwrap()
    };
    for db in [2.0, 5.0] {
        for scheme in ["rsma", "noma12", "noma21", "fdma", "tdma"] {
            for w in eps_sweep.windows(2) {
                let (a, b) = (at(scheme, db, w[0]), at(scheme, db, w[1]));
                assert!(
                    b <= a + 1e-9,
                    "{scheme}@{db}dB rose from {a} to {b} as eps grew"
                );
            }
        }
        for &e in &eps_sweep {
            let r = at("rsma", db, e);
            for other in ["noma12", "noma21", "fdma", "tdma"] {
                assert!(
                    r <= at(other, db, e),
                    "rsma {r} above {other} at eps={e:e}, {db} dB"
                );
            }
        }
    }
    println!("PASS blocklength_vs_epsilon_trends in {:?}", start.elapsed());
}

#[test]
fn sum_rate_trends() {
    let (scen, hash) = minlen_scenario(
        300.0,
        200.0,
        "sumrate_n_start = 100\nsumrate_n_stop = 3000\nsumrate_n_points = 12\nsumrate_beta_points = 201",
    );
    let rows = rsma_fbl::experiments::run_sumrate_vs_blocklength(&scen, &hash).unwrap();
    let series = |scheme: &str| -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| (r.n, r.sum_rate))
            .collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    };
    let ibl = series("ibl")[0].1;
    let pa = series("rsma-pa");
    let nopa = series("rsma-nopa");
    let mut strict = false;
    for (p, q) in pa.iter().zip(&nopa) {
        assert!(p.1 >= q.1, "power allocation lost to the fixed split");
        strict |= p.1 > q.1 + 1e-9;
    }
    assert!(strict, "power allocation never strictly beat the fixed split");
    for scheme in ["rsma-pa", "rsma-nopa", "noma12", "noma21", "fdma", "tdma"] {
        let s = series(scheme);
        for w in s.windows(2) {
            assert!(w[1].1 > w[0].1, "{scheme} sum rate not increasing in n");
        }
        for (_, v) in s {
            assert!(v < ibl, "{scheme} reached the IBL sum capacity");
        }
    }
    println!("PASS sum_rate_trends");
}

#[test]
fn noma_degeneration_equivalence() {
    let eps = uniform_eps();
    let cfg = SolverConfig::default();
    let forced = SolverConfig { force_p12_zero: true, ..cfg };
    for (label, pt_db, t1, t2) in [
        ("t1-heavy", 5.0, 300.0, 200.0),
        ("t2-heavy", 5.0, 150.0, 280.0),
        ("t1-extreme @2dB", 2.0, 400.0, 100.0),
    ] {
        let sys = sec5_sys(pt_db);
        let t = ThroughputTargets::new(t1, t2).unwrap();
        let r = minimize_blocklength_rsma(&sys, &eps, &t, &forced).unwrap().n_star.unwrap();
        let n = minimize_blocklength_noma(&sys, &eps, &t, &cfg, NomaOrder::U1First)
            .unwrap()
            .n_star
            .unwrap();
        assert!((r - n).abs() <= cfg.xi, "{label}: forced-RSMA {r} vs NOMA {n}");
    }

    // throughput identity at p12 = 0 under the matched error mapping
    let sys = sec5_sys(5.0);
    let s = StreamReliability::new(1e-6, 2e-6, 4e-6).unwrap();
    let msg = 1e-6 + (1.0 - 1e-6) * 4e-6;
    for n in [200.0, 900.0, 2500.0] {
        for (p1, p2) in [(3.0, 1.0), (1.5, 2.5)] {
            let p = PowerAllocation::new(p1, 0.0, p2).unwrap();
            let (t1r, t2r) = rsma_effective_throughput(n, &p, &sys, &s).unwrap();
            let (t1n, t2n) = noma_throughput_with_errors(
                n,
                p1,
                p2,
                &sys,
                NomaOrder::U1First,
                (1e-6, 4e-6),
                (msg, msg),
            )
            .unwrap();
            assert!((t1r - t1n).abs() <= 1e-9, "T1 mismatch: {t1r} vs {t1n}");
            assert!((t2r - t2n).abs() <= 1e-9, "T2 mismatch: {t2r} vs {t2n}");
        }
    }
    println!("PASS noma_degeneration_equivalence");
}

/// Not a numbered criterion on its own, but the region-growth claim the
/// region module's contract rests on: regions only expand with n.
#[test]
fn region_monotone_growth() {
    let sys = sec5_sys(5.0);
    let eps = uniform_eps();
    let mut prev: Option<rsma_fbl::region::RegionBoundary> = None;
    for n in [500.0, 1000.0, 2000.0] {
        let b = rsma_fbl_boundary(n, 2.0, 1.0, &sys, &eps, 101).unwrap();
        if let Some(p) = &prev {
            for pt in &p.points {
                assert!(
                    region_contains(&b, RatePoint { r1: pt.r1, r2: pt.r2 }, 1e-9).unwrap(),
                    "n={n} region lost a point of the smaller region"
                );
            }
        }
        prev = Some(b);
    }
    println!("PASS region_monotone_growth");
}
