//! Experiment drivers: rate-region tracing, blocklength-vs-power and
//! blocklength-vs-error sweeps, and sum-rate-vs-blocklength curves, emitted
//! as CSV or JSON rows for external plotting.
//!
//! Every row carries the scenario hash and its sweep coordinates so it can
//! be regenerated in isolation; grids are fixed and nothing depends on the
//! wall clock, so identical scenario files produce byte-identical output.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{NomaOrder, PowerAllocation, SystemParams};
use crate::fbl::{fbl_rate_clamped_with_qinv, inverse_q, shannon_capacity};
use crate::region::{
    ibl_mac_pentagon, noma_fbl_point, oma_fbl_boundary, rsma_fbl_boundary, AlphaRule,
    RegionBoundary,
};
use crate::reliability::{oma_rate_with_qinv, OmaScheme, StreamReliability};
use crate::scenario::{linspace, Scenario, Scheme};
use crate::solver::{
    minimize_blocklength_noma, minimize_blocklength_oma, minimize_blocklength_rsma, SolveReport,
    SolveStatus, SolverConfig,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Row types
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RegionRow {
    pub scenario: String,
    pub scheme: String,
    /// Blocklength; `inf` marks the IBL curve.
    pub n: f64,
    /// Sweep coordinate: β for RSMA, α for OMA, the swept power for the
    /// NOMA curves; empty for closed-form corner points.
    pub param: Option<f64>,
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinlenRow {
    pub scenario: String,
    pub scheme: String,
    pub pt_db: f64,
    pub eps: f64,
    pub t1_th: f64,
    pub t2_th: f64,
    pub n_star: Option<f64>,
    pub n1: Option<f64>,
    pub n2: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SumRateRow {
    pub scenario: String,
    pub scheme: String,
    pub n: f64,
    pub sum_rate: f64,
}

fn status_label(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIters => "max-iters",
        SolveStatus::Infeasible => "infeasible",
    }
}

// ---------------------------------------------------------------------------
// Region experiment
// ---------------------------------------------------------------------------

fn push_boundary(rows: &mut Vec<RegionRow>, hash: &str, b: &RegionBoundary) {
    for (p, pt) in b.params.iter().zip(&b.points) {
        rows.push(RegionRow {
            scenario: hash.into(),
            scheme: b.scheme.label().into(),
            n: b.n,
            param: if p.is_nan() { None } else { Some(*p) },
            r1: pt.r1,
            r2: pt.r2,
        });
    }
}

/// Traces all requested boundaries at each blocklength in the scenario's
/// region list (plus the IBL limit): the β-swept RSMA curve, the NOMA corner
/// points and their power-swept curves, the α-swept OMA curves, and the IBL
/// pentagon corners.
pub fn run_region_experiment(scenario: &Scenario, hash: &str) -> Result<Vec<RegionRow>> {
    let sys = scenario.system()?;
    let eps = scenario.reliability()?;
    let (p1, p2) = scenario.region_powers()?;
    let schemes = scenario.scheme_list()?;
    let num = scenario.region_num_points;

    let mut n_list = scenario.region_n_list.clone();
    if scenario.region_include_ibl {
        n_list.push(f64::INFINITY);
    }

    let mut rows = Vec::new();
    for &n in &n_list {
        for scheme in &schemes {
            match scheme {
                Scheme::Rsma => {
                    let b = rsma_fbl_boundary(n, p1, p2, &sys, &eps, num)?;
                    push_boundary(&mut rows, hash, &b);
                }
                Scheme::Noma12 | Scheme::Noma21 => {
                    let order = scheme.noma_order().unwrap();
                    // full-power corner point
                    let c = noma_fbl_point(n, p1, p2, &sys, eps.eps11, eps.eps22, order)?;
                    rows.push(RegionRow {
                        scenario: hash.into(),
                        scheme: scheme.label().into(),
                        n,
                        param: None,
                        r1: c.r1,
                        r2: c.r2,
                    });
                    // power-swept curve: reduce the second-decoded user's power
                    let sweep_label = format!("{}-sweep", scheme.label());
                    for i in 1..=num.min(101) {
                        let frac = i as f64 / num.min(101) as f64;
                        let (q1, q2) = match order {
                            NomaOrder::U1First => (p1, frac * p2),
                            NomaOrder::U2First => (frac * p1, p2),
                        };
                        let pt = noma_fbl_point(n, q1, q2, &sys, eps.eps11, eps.eps22, order)?;
                        rows.push(RegionRow {
                            scenario: hash.into(),
                            scheme: sweep_label.clone(),
                            n,
                            param: Some(frac),
                            r1: pt.r1,
                            r2: pt.r2,
                        });
                    }
                }
                Scheme::Fdma | Scheme::Tdma => {
                    let b = oma_fbl_boundary(
                        n,
                        p1,
                        p2,
                        &sys,
                        eps.eps11,
                        eps.eps22,
                        scheme.oma_scheme().unwrap(),
                        num,
                    )?;
                    push_boundary(&mut rows, hash, &b);
                }
            }
        }
    }
    if scenario.region_include_ibl {
        let b = ibl_mac_pentagon(p1, p2, &sys)?;
        push_boundary(&mut rows, hash, &b);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Blocklength minimization sweeps
// ---------------------------------------------------------------------------

fn solve_scheme(
    scheme: Scheme,
    sys: &SystemParams,
    eps: &StreamReliability,
    targets: &crate::reliability::ThroughputTargets,
    cfg: &SolverConfig,
    rule: AlphaRule,
) -> Result<SolveReport> {
    match scheme {
        Scheme::Rsma => minimize_blocklength_rsma(sys, eps, targets, cfg),
        Scheme::Noma12 => {
            minimize_blocklength_noma(sys, eps, targets, cfg, NomaOrder::U1First)
        }
        Scheme::Noma21 => {
            minimize_blocklength_noma(sys, eps, targets, cfg, NomaOrder::U2First)
        }
        Scheme::Fdma => {
            minimize_blocklength_oma(sys, eps, targets, cfg, OmaScheme::Fdma, rule)
        }
        Scheme::Tdma => {
            minimize_blocklength_oma(sys, eps, targets, cfg, OmaScheme::Tdma, rule)
        }
    }
}

fn minlen_row(
    hash: &str,
    scheme: Scheme,
    pt_db: f64,
    eps_val: f64,
    scenario: &Scenario,
    report: &SolveReport,
) -> MinlenRow {
    MinlenRow {
        scenario: hash.into(),
        scheme: scheme.label().into(),
        pt_db,
        eps: eps_val,
        t1_th: scenario.t1_th,
        t2_th: scenario.t2_th,
        n_star: report.n_star,
        n1: report.n_split.map(|s| s.0),
        n2: report.n_split.map(|s| s.1),
        status: status_label(report.status).into(),
    }
}

/// Minimum blocklength per scheme across the transmit-power sweep.
/// Per-point infeasibility becomes a flagged row, not an error.
pub fn run_blocklength_vs_power(scenario: &Scenario, hash: &str) -> Result<Vec<MinlenRow>> {
    let sweep = scenario.power_sweep()?;
    let eps = scenario.reliability()?;
    let targets = scenario.targets()?;
    let schemes = scenario.scheme_list()?;
    let rule = scenario.alpha_rule.resolve()?;
    let cfg = SolverConfig::default();

    let points: Vec<(f64, Scheme)> = sweep
        .iter()
        .flat_map(|&db| schemes.iter().map(move |&s| (db, s)))
        .collect();
    let rows: Result<Vec<MinlenRow>> = points
        .par_iter()
        .map(|&(db, scheme)| {
            let sys = scenario.system_at(db)?;
            let rep = solve_scheme(scheme, &sys, &eps, &targets, &cfg, rule)?;
            Ok(minlen_row(hash, scheme, db, scenario.eps11, scenario, &rep))
        })
        .collect();
    rows
}

/// Minimum blocklength per scheme across the error-probability sweep, at
/// each requested maximum transmit power.
pub fn run_blocklength_vs_epsilon(scenario: &Scenario, hash: &str) -> Result<Vec<MinlenRow>> {
    let eps_sweep = scenario.eps_sweep()?;
    if scenario.eps_pt_db_list.is_empty() {
        return Err(Error::Config {
            field: "eps_pt_db_list".into(),
            message: "required by this experiment".into(),
        });
    }
    let targets = scenario.targets()?;
    let schemes = scenario.scheme_list()?;
    let rule = scenario.alpha_rule.resolve()?;
    let cfg = SolverConfig::default();

    let mut points: Vec<(f64, f64, Scheme)> = Vec::new();
    for &db in &scenario.eps_pt_db_list {
        for &e in &eps_sweep {
            for &s in &schemes {
                points.push((db, e, s));
            }
        }
    }
    points
        .par_iter()
        .map(|&(db, e, scheme)| {
            let sys = scenario.system_at(db)?;
            let stream = StreamReliability::uniform(e)?;
            let rep = solve_scheme(scheme, &sys, &stream, &targets, &cfg, rule)?;
            Ok(minlen_row(hash, scheme, db, e, scenario, &rep))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Sum-rate experiment
// ---------------------------------------------------------------------------

const POWER_GRID: usize = 64;

fn noma_sum_rate(n: f64, pt: f64, sys: &SystemParams, q: f64, order: NomaOrder) -> f64 {
    let grid = linspace(0.0, pt, POWER_GRID);
    let mut best = 0.0f64;
    for &p1 in &grid {
        for &p2 in &grid {
            let (gf, gs) = crate::channel::noma_sinrs(p1, p2, sys, order);
            let s = fbl_rate_clamped_with_qinv(n, gf, q) + fbl_rate_clamped_with_qinv(n, gs, q);
            best = best.max(s);
        }
    }
    best
}

fn oma_sum_rate(
    n: f64,
    pt: f64,
    sys: &SystemParams,
    q: f64,
    scheme: OmaScheme,
    rule: AlphaRule,
) -> f64 {
    let grid = linspace(pt / POWER_GRID as f64, pt, POWER_GRID);
    let mut best = 0.0f64;
    for &p1 in &grid {
        for &p2 in &grid {
            let Ok(alpha) = rule.resolve(p1, p2) else { continue };
            let a = alpha.value();
            let (n1, n2) = (a * n, (1.0 - a) * n);
            if n1 < 1.0 || n2 < 1.0 {
                continue;
            }
            let (g1, g2) = match scheme {
                OmaScheme::Fdma => crate::channel::fdma_sinrs(p1, p2, alpha, sys),
                OmaScheme::Tdma => crate::channel::tdma_sinrs(p1, p2, sys),
            };
            let s = oma_rate_with_qinv(n1, g1, a, q).max(0.0)
                + oma_rate_with_qinv(n2, g2, 1.0 - a, q).max(0.0);
            best = best.max(s);
        }
    }
    best
}

/// Maximum sum of achievable rates per scheme versus the blocklength, at
/// full per-user budgets: a β-sweep for RSMA (plus the fixed equal split as
/// the no-power-allocation variant), grid search for the baselines, and the
/// IBL sum capacity as the reference line.
pub fn run_sumrate_vs_blocklength(scenario: &Scenario, hash: &str) -> Result<Vec<SumRateRow>> {
    let sweep = scenario.sumrate_sweep()?;
    let sys = scenario.system()?;
    let schemes = scenario.scheme_list()?;
    let rule = scenario.alpha_rule.resolve()?;
    let pt = sys.p_max;
    let q = inverse_q(scenario.eps11)?;
    let betas = linspace(0.0, 1.0, scenario.sumrate_beta_points);

    let rsma_sum = |n: f64, beta: f64| -> f64 {
        let p = PowerAllocation { p11: beta * pt, p12: (1.0 - beta) * pt, p2: pt };
        let g = crate::channel::rsma_sinrs(&p, &sys);
        fbl_rate_clamped_with_qinv(n, g.g11, q)
            + fbl_rate_clamped_with_qinv(n, g.g12, q)
            + fbl_rate_clamped_with_qinv(n, g.g22, q)
    };

    let mut rows: Vec<SumRateRow> = sweep
        .par_iter()
        .map(|&n| {
            let mut out = Vec::new();
            let mut push = |scheme: String, v: f64| {
                out.push(SumRateRow { scenario: hash.into(), scheme, n, sum_rate: v })
            };
            for scheme in &schemes {
                match scheme {
                    Scheme::Rsma => {
                        let best =
                            betas.iter().map(|&b| rsma_sum(n, b)).fold(f64::MIN, f64::max);
                        push("rsma-pa".into(), best);
                        push("rsma-nopa".into(), rsma_sum(n, 0.5));
                    }
                    Scheme::Noma12 => {
                        push("noma12".into(), noma_sum_rate(n, pt, &sys, q, NomaOrder::U1First))
                    }
                    Scheme::Noma21 => {
                        push("noma21".into(), noma_sum_rate(n, pt, &sys, q, NomaOrder::U2First))
                    }
                    Scheme::Fdma => push(
                        "fdma".into(),
                        oma_sum_rate(n, pt, &sys, q, OmaScheme::Fdma, rule),
                    ),
                    Scheme::Tdma => push(
                        "tdma".into(),
                        oma_sum_rate(n, pt, &sys, q, OmaScheme::Tdma, rule),
                    ),
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<SumRateRow>>>>()?
        .into_iter()
        .flatten()
        .collect();

    // IBL reference: the sum capacity at full powers
    let c_sum = shannon_capacity(pt * (sys.g1 + sys.g2) / sys.noise_var)?;
    for &n in &sweep {
        rows.push(SumRateRow { scenario: hash.into(), scheme: "ibl".into(), n, sum_rate: c_sum });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Serializes rows in deterministic order to the given writer.
pub fn write_rows<T: Serialize, W: Write>(
    rows: &[T],
    format: OutputFormat,
    out: W,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(out, rows)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_text() -> String {
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
t1_th = 300.0
t2_th = 200.0
region_p1_db = 3.0102999566398116
region_p2_db = 0.0
region_n_list = [500]
region_num_points = 21
pt_db_start = 3.0
pt_db_stop = 5.0
pt_db_points = 2
sumrate_n_start = 200
sumrate_n_stop = 1000
sumrate_n_points = 3
sumrate_beta_points = 41
"#
        .to_string()
    }

    #[test]
    fn region_rows_cover_all_schemes() {
        let (s, hash) = Scenario::from_toml(&scenario_text()).unwrap();
        let rows = run_region_experiment(&s, &hash).unwrap();
        for tag in ["rsma", "noma12", "noma21", "noma12-sweep", "fdma", "tdma", "ibl-pentagon"] {
            assert!(rows.iter().any(|r| r.scheme == tag), "missing {tag}");
        }
        // two blocklengths (500 and inf) for the rsma sweep
        let rsma_ns: std::collections::BTreeSet<String> = rows
            .iter()
            .filter(|r| r.scheme == "rsma")
            .map(|r| format!("{}", r.n))
            .collect();
        assert_eq!(rsma_ns.len(), 2);
        assert!(rows.iter().all(|r| r.scenario == hash));
    }

    #[test]
    fn empty_scheme_list_empty_dataset() {
        let txt = format!("{}\nschemes = []\n", scenario_text());
        let (s, hash) = Scenario::from_toml(&txt).unwrap();
        let rows = run_blocklength_vs_power(&s, &hash).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn power_sweep_rows_and_determinism() {
        let txt = format!("{}\nschemes = [\"noma12\", \"tdma\"]\n", scenario_text());
        let (s, hash) = Scenario::from_toml(&txt).unwrap();
        let rows = run_blocklength_vs_power(&s, &hash).unwrap();
        assert_eq!(rows.len(), 4); // 2 power points x 2 schemes
        assert!(rows.iter().all(|r| r.status == "converged"));
        // byte-identical CSV on repeat
        let mut a = Vec::new();
        write_rows(&rows, OutputFormat::Csv, &mut a).unwrap();
        let rows2 = run_blocklength_vs_power(&s, &hash).unwrap();
        let mut b = Vec::new();
        write_rows(&rows2, OutputFormat::Csv, &mut b).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn sumrate_rows_include_nopa_and_ibl() {
        let txt = format!("{}\nschemes = [\"rsma\", \"noma12\"]\n", scenario_text());
        let (s, hash) = Scenario::from_toml(&txt).unwrap();
        let rows = run_sumrate_vs_blocklength(&s, &hash).unwrap();
        let pa: Vec<&SumRateRow> = rows.iter().filter(|r| r.scheme == "rsma-pa").collect();
        let nopa: Vec<&SumRateRow> = rows.iter().filter(|r| r.scheme == "rsma-nopa").collect();
        let ibl: Vec<&SumRateRow> = rows.iter().filter(|r| r.scheme == "ibl").collect();
        assert_eq!(pa.len(), 3);
        assert_eq!(nopa.len(), 3);
        assert_eq!(ibl.len(), 3);
        for (p, q) in pa.iter().zip(&nopa) {
            assert!(p.sum_rate >= q.sum_rate);
            assert!(p.sum_rate < ibl[0].sum_rate);
        }
    }
}
