use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use xcf_core::claims::{all_pass, evaluate_claims, ClaimTolerances};
use xcf_core::harness::{fmt_f64, read_series, write_claims, CLAIMS_FILE};
use xcf_core::{curvature_dump, epsilon_sweep, load_config, run_scenario, BundleKind, ScenarioConfig};

#[derive(Parser)]
#[command(name = "xcf", about = "Cross curvature flow on torus and sphere bundles over a circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario; writes series.csv, snapshots and claims.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Continue from a snapshot written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Write the curvature table of the initial profile.
    Curvature {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-evaluate the claims on an existing series.csv.
    Check {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        kind: BundleKind,
        /// Grid size the series was produced on (sets the monotonicity slack).
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        period: f64,
    },
    /// Compare torus runs at several regularizations against ε = 0.
    EpsSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
    },
}

fn load(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = load_config(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(dir) = std::env::var_os("XCF_OUT") {
        config.output_dir = PathBuf::from(dir);
    }
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { config, resume } => {
            let config = load(&config)?;
            let outcome = run_scenario(&config, resume.as_deref())?;
            if outcome.stationary {
                eprintln!("warning: initial g is constant; the torus flow is stationary");
            }
            let s = &outcome.summary;
            eprintln!(
                "t = {} after {} steps ({} retries), dt in [{:.3e}, {:.3e}]{}",
                s.t_final,
                s.steps,
                s.retries,
                s.dt_min,
                s.dt_max,
                if s.stopped_early { ", stopped by spread ratio" } else { "" }
            );
            for v in &outcome.verdicts {
                println!("{}", v.report_line());
            }
            Ok(outcome.all_pass())
        }
        Command::Curvature { config } => {
            let path = curvature_dump(&load(&config)?)?;
            eprintln!("wrote {}", path.display());
            Ok(true)
        }
        Command::Check { series, kind, n, period } => {
            if n < 8 || !(period > 0.0) {
                bail!("grid must have n >= 8 and a positive period");
            }
            let records = read_series(&series)?;
            let tolerances = ClaimTolerances {
                grid_dx: period / n as f64,
                ..ClaimTolerances::default()
            };
            let verdicts = evaluate_claims(&records, kind, &tolerances)?;
            let out = series.with_file_name(CLAIMS_FILE);
            write_claims(&out, &verdicts)?;
            for v in &verdicts {
                println!("{}", v.report_line());
            }
            Ok(all_pass(&verdicts))
        }
        Command::EpsSweep { config, epsilons } => {
            let rows = epsilon_sweep(&load(&config)?, &epsilons)?;
            println!("epsilon,sup_gap");
            for (e, gap) in rows {
                println!("{},{}", fmt_f64(e), fmt_f64(gap));
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
