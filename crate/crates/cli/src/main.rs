//! `photonlab`: run scenarios, export slices, run the self-test.
//!
//! Exit codes: 0 when every check passed, 1 when a check failed, 2 on
//! configuration or runtime errors. `PHOTONLAB_THREADS` sets the retarded
//! solver's worker count; logging follows `RUST_LOG` (default `info`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use photon_lab::densities::DensityKind;
use photon_lab::runner::{self, config::Plane, RunOptions, ScenarioConfig};
use photon_lab::selftest;

const THREADS_ENV: &str = "PHOTONLAB_THREADS";

#[derive(Parser)]
#[command(name = "photonlab", about = "Single-photon densities and retarded potentials on periodic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its artifacts and summary.
    Run { config: PathBuf },
    /// Run the built-in acceptance suite.
    Selftest {
        /// Run only these criteria (1-11).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Write one density slice of a scenario at its first time as CSV.
    ExportSlice {
        config: PathBuf,
        /// Density name, e.g. number, energy, lp_number.
        #[arg(long)]
        kind: String,
        /// Plane such as z=0 or x=1.5.
        #[arg(long)]
        plane: String,
    },
    /// Print the version.
    Version,
}

fn threads() -> anyhow::Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{THREADS_ENV}={v} is not a non-negative integer")),
        Err(_) => Ok(0),
    }
}

fn run(cfg_path: &Path) -> anyhow::Result<bool> {
    let cfg = ScenarioConfig::load(cfg_path).with_context(|| format!("reading {}", cfg_path.display()))?;
    let out = runner::run_scenario(&cfg, &RunOptions { threads: threads()? })?;
    for c in &out.checks {
        println!("{:<28} {:>12.4e} <= {:<10.3e} {}", c.name, c.value, c.tol, if c.pass { "ok" } else { "FAIL" });
    }
    println!("{} artifacts in {}", out.artifacts.len(), out.dir.display());
    if !out.passed() {
        eprintln!("failed checks: {}", out.failed().join(", "));
    }
    Ok(out.passed())
}

fn selftest_cmd(only: &[u8]) -> anyhow::Result<bool> {
    let ids: Vec<u8> = if only.is_empty() { selftest::criterion_names().iter().map(|c| c.0).collect() } else { only.to_vec() };
    let mut ok = true;
    for id in ids {
        let Some(r) = selftest::run_criterion(id) else { bail!("no criterion {id}") };
        println!(
            "[{}] {:>2} {:<26} {} ({:.2}s)",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.detail,
            r.elapsed.as_secs_f64()
        );
        ok &= r.pass;
    }
    if only.is_empty() {
        let d = photon_lab::synthesis::ExpansionConvention::MissingStateFactor;
        let rejected = match selftest::parseval_defect(d) {
            Ok(v) => v > 1e-8,
            Err(_) => true,
        };
        println!(
            "[{}] negative control: corrupted expansion factor {}",
            if rejected { "PASS" } else { "FAIL" },
            if rejected { "rejected" } else { "accepted" }
        );
        ok &= rejected;
    }
    log::info!("density sign calibration: {:?}", photon_lab::densities::sign_calibration());
    Ok(ok)
}

fn export_slice(cfg_path: &Path, kind: &str, plane: &str) -> anyhow::Result<bool> {
    let cfg = ScenarioConfig::load(cfg_path).with_context(|| format!("reading {}", cfg_path.display()))?;
    let Some(kind) = DensityKind::parse(kind) else {
        let names: Vec<_> = DensityKind::ALL.iter().map(|k| k.name()).collect();
        bail!("unknown density `{kind}`; expected one of {}", names.join(", "));
    };
    let plane = Plane::parse(plane).map_err(anyhow::Error::msg)?;
    let path = runner::export_slice(&cfg, kind, plane)?;
    println!("{}", path.display());
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config),
        Command::Selftest { only } => selftest_cmd(only),
        Command::ExportSlice { config, kind, plane } => export_slice(config, kind, plane),
        Command::Version => {
            println!("photonlab {}", runner::VERSION);
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
