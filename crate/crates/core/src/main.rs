use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rsma_fbl::experiments::{
    run_blocklength_vs_epsilon, run_blocklength_vs_power, run_region_experiment,
    run_sumrate_vs_blocklength, write_rows, OutputFormat,
};
use rsma_fbl::oracle::{oracle_min_blocklength, GridSpec, SchemeSpec};
use rsma_fbl::scenario::{Scenario, Scheme};
use rsma_fbl::solver::{
    minimize_blocklength_noma, minimize_blocklength_oma, minimize_blocklength_rsma, SolveReport,
    SolverConfig,
};

/// Finite-blocklength rate regions and blocklength minimization for two-user
/// uplink RSMA, NOMA, FDMA, and TDMA.
#[derive(Parser)]
#[command(name = "rsma-fbl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Output format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Trace achievable rate regions at the scenario's blocklengths.
    Region(Common),
    /// Minimum blocklength versus the maximum transmit power.
    MinlenPower(Common),
    /// Minimum blocklength versus the per-stream error probability.
    MinlenEps(Common),
    /// Maximum sum rate versus the blocklength.
    Sumrate(Common),
    /// Cross-check every scheme's solver against the brute-force oracle.
    Verify(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> rsma_fbl::Result<ExitCode> {
    let common = match &cli.command {
        Command::Region(c)
        | Command::MinlenPower(c)
        | Command::MinlenEps(c)
        | Command::Sumrate(c)
        | Command::Verify(c) => c,
    };
    if let Some(k) = common.workers {
        // ignore failure: the global pool may already exist
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let (scenario, hash) = Scenario::load(&common.scenario)?;
    let format = if common.format == "json" { OutputFormat::Json } else { OutputFormat::Csv };
    let ext = if format == OutputFormat::Json { "json" } else { "csv" };

    let emit = |name: &str, write: &dyn Fn(&mut dyn std::io::Write) -> rsma_fbl::Result<()>|
     -> rsma_fbl::Result<PathBuf> {
        std::fs::create_dir_all(&common.out)?;
        let path = common.out.join(format!("{name}.{ext}"));
        let mut file = std::fs::File::create(&path)?;
        write(&mut file)?;
        Ok(path)
    };

    match &cli.command {
        Command::Region(_) => {
            let rows = run_region_experiment(&scenario, &hash)?;
            let path = emit("region", &|w| write_rows(&rows, format, w))?;
            println!("{} rows -> {}", rows.len(), path.display());
        }
        Command::MinlenPower(_) => {
            let rows = run_blocklength_vs_power(&scenario, &hash)?;
            let path = emit("minlen_power", &|w| write_rows(&rows, format, w))?;
            println!("{} rows -> {}", rows.len(), path.display());
        }
        Command::MinlenEps(_) => {
            let rows = run_blocklength_vs_epsilon(&scenario, &hash)?;
            let path = emit("minlen_eps", &|w| write_rows(&rows, format, w))?;
            println!("{} rows -> {}", rows.len(), path.display());
        }
        Command::Sumrate(_) => {
            let rows = run_sumrate_vs_blocklength(&scenario, &hash)?;
            let path = emit("sumrate", &|w| write_rows(&rows, format, w))?;
            println!("{} rows -> {}", rows.len(), path.display());
        }
        Command::Verify(_) => {
            return verify(&scenario);
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Runs each scheme's solver and brute-force oracle on the scenario and
/// checks that the solver lands in the oracle sandwich.
fn verify(scenario: &Scenario) -> rsma_fbl::Result<ExitCode> {
    let sys = scenario.system()?;
    let eps = scenario.reliability()?;
    let targets = scenario.targets()?;
    let rule = scenario.alpha_rule.resolve()?;
    let cfg = SolverConfig::default();
    let mut all_ok = true;

    println!(
        "{:<8} {:>12} {:>12} {:>10}  {}",
        "scheme", "solver", "oracle", "margin", "verdict"
    );
    for scheme in scenario.scheme_list()? {
        let (report, oracle): (SolveReport, rsma_fbl::Result<f64>) = match scheme {
            Scheme::Rsma => (
                minimize_blocklength_rsma(&sys, &eps, &targets, &cfg)?,
                oracle_min_blocklength(
                    SchemeSpec::Rsma,
                    &sys,
                    &eps,
                    &targets,
                    &GridSpec { power_steps: 128, n_tol: 1.0 },
                ),
            ),
            Scheme::Noma12 | Scheme::Noma21 => {
                let order = scheme.noma_order().unwrap();
                (
                    minimize_blocklength_noma(&sys, &eps, &targets, &cfg, order)?,
                    oracle_min_blocklength(
                        SchemeSpec::Noma(order),
                        &sys,
                        &eps,
                        &targets,
                        &GridSpec { power_steps: 192, n_tol: 1.0 },
                    ),
                )
            }
            Scheme::Fdma | Scheme::Tdma => {
                let s = scheme.oma_scheme().unwrap();
                (
                    minimize_blocklength_oma(&sys, &eps, &targets, &cfg, s, rule)?,
                    oracle_min_blocklength(
                        SchemeSpec::Oma(s, rule),
                        &sys,
                        &eps,
                        &targets,
                        &GridSpec { power_steps: 768, n_tol: 1.0 },
                    ),
                )
            }
        };
        match (report.n_star, oracle) {
            (Some(n), Ok(o)) => {
                let ok = o <= n && n <= o * 1.02 + 2.0;
                all_ok &= ok;
                println!(
                    "{:<8} {:>12.2} {:>12.2} {:>+10.2}  {}",
                    scheme.label(),
                    n,
                    o,
                    n - o,
                    if ok { "ok" } else { "MISMATCH" }
                );
            }
            (None, Err(_)) => {
                println!(
                    "{:<8} {:>12} {:>12} {:>10}  ok",
                    scheme.label(),
                    "infeasible",
                    "infeasible",
                    "-"
                );
            }
            (n, o) => {
                all_ok = false;
                println!(
                    "{:<8} {:>12} {:>12} {:>10}  MISMATCH",
                    scheme.label(),
                    n.map_or("infeasible".into(), |v| format!("{v:.2}")),
                    o.map_or_else(|_| "infeasible".to_string(), |v| format!("{v:.2}")),
                    "-"
                );
            }
        }
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
