use rsma_fbl::channel::{NomaOrder, SystemParams};
use rsma_fbl::oracle::{oracle_min_blocklength, GridSpec, SchemeSpec};
use rsma_fbl::region::AlphaRule;
use rsma_fbl::reliability::{OmaScheme, StreamReliability, ThroughputTargets};
use rsma_fbl::solver::{minimize_blocklength_noma, minimize_blocklength_oma, minimize_blocklength_rsma, SolverConfig};

fn main() {
    let eps = StreamReliability::uniform(1e-6).unwrap();
    let cfg = SolverConfig::default();
    let scen = [
        ("S1", 5.0, 300.0, 200.0),
        ("S2", 2.0, 300.0, 200.0),
        ("S3", 5.0, 150.0, 280.0),
        ("S4", 2.0, 150.0, 280.0),
        ("S5", 5.0, 400.0, 100.0),
        ("S6", 5.0, 250.0, 250.0),
    ];
    let mut all_ok = true;
    for (name, db, t1, t2) in scen {
        let pt = 10f64.powf(db / 10.0);
        let sys = SystemParams::new(1.0, 0.7, 1.0, pt, 100.0, 3000.0).unwrap();
        let t = ThroughputTargets::new(t1, t2).unwrap();
        let t0 = std::time::Instant::now();

        let g3 = GridSpec { power_steps: 257, n_tol: 1.0 };
        let g2 = GridSpec { power_steps: 257, n_tol: 1.0 };
        let g2o = GridSpec { power_steps: 1025, n_tol: 1.0 };

        let r = minimize_blocklength_rsma(&sys, &eps, &t, &cfg).unwrap().n_star.unwrap();
        let ro = oracle_min_blocklength(SchemeSpec::Rsma, &sys, &eps, &t, &g3).unwrap();
        let nm = minimize_blocklength_noma(&sys, &eps, &t, &cfg, NomaOrder::U1First).unwrap().n_star.unwrap();
        let no = oracle_min_blocklength(SchemeSpec::Noma(NomaOrder::U1First), &sys, &eps, &t, &g2).unwrap();
        let fd = minimize_blocklength_oma(&sys, &eps, &t, &cfg, OmaScheme::Fdma, AlphaRule::PowerRatio).unwrap().n_star.unwrap();
        let fo = oracle_min_blocklength(SchemeSpec::Oma(OmaScheme::Fdma, AlphaRule::PowerRatio), &sys, &eps, &t, &g2o).unwrap();
        let td = minimize_blocklength_oma(&sys, &eps, &t, &cfg, OmaScheme::Tdma, AlphaRule::PowerRatio).unwrap().n_star.unwrap();
        let to = oracle_min_blocklength(SchemeSpec::Oma(OmaScheme::Tdma, AlphaRule::PowerRatio), &sys, &eps, &t, &g2o).unwrap();

        let ok = |s: f64, o: f64| o <= s && s <= o * 1.02 + 2.0;
        all_ok &= ok(r, ro) && ok(nm, no) && ok(fd, fo) && ok(td, to);
        println!(
            "{name}: rsma {r:.2}/{ro:.2} m={:+.2} | noma {nm:.2}/{no:.2} m={:+.2} | fdma {fd:.2}/{fo:.2} m={:+.2} | tdma {td:.2}/{to:.2} m={:+.2}  [{:?}]",
            r - ro, nm - no, fd - fo, td - to, t0.elapsed()
        );
    }
    println!("ALL OK: {all_ok}");
}
