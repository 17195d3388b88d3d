use rsma_fbl::channel::{NomaOrder, SystemParams};
use rsma_fbl::reliability::{StreamReliability, ThroughputTargets};
use rsma_fbl::solver::{minimize_blocklength_noma, minimize_blocklength_rsma, SolverConfig};

fn main() {
    let sys = SystemParams::new(1.0, 0.7, 1.0, 10f64.powf(0.5), 100.0, 3000.0).unwrap();
    let eps = StreamReliability::uniform(1e-6).unwrap();
    let t = ThroughputTargets::new(300.0, 200.0).unwrap();
    let cfg = SolverConfig::default();
    let forced = SolverConfig { force_p12_zero: true, ..cfg };
    let r = minimize_blocklength_rsma(&sys, &eps, &t, &forced).unwrap();
    println!("forced-rsma: n={:?} P={:?} trace={:?} rec={}", r.n_star, r.powers, r.trace.iter().map(|v| (v*100.0).round()/100.0).collect::<Vec<_>>(), r.recoveries);
    let n = minimize_blocklength_noma(&sys, &eps, &t, &cfg, NomaOrder::U1First).unwrap();
    println!("noma12:      n={:?} P={:?} trace={:?} rec={}", n.n_star, n.powers, n.trace.iter().map(|v| (v*100.0).round()/100.0).collect::<Vec<_>>(), n.recoveries);
}
