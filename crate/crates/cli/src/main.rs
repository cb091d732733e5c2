use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavemap_cli::{Command, ExperimentConfig};

/// Numerical experiments on boosted harmonic maps and penalized wave maps.
#[derive(Debug, Parser)]
#[command(name = "wavemap", version)]
struct Cli {
    /// TOML experiment configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for the JSON report and CSV side files.
    #[arg(long, global = true, env = "WAVEMAP_OUT")]
    out: Option<PathBuf>,

    /// Global refinement multiplier: divides h and multiplies quadrature counts.
    #[arg(long, global = true, default_value_t = 1)]
    refine: usize,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Point-charge strength s(λ): closed form against quadrature.
    STable {
        /// Dilations to tabulate; the configured list is used when empty.
        lambdas: Vec<f64>,
    },
    /// Energy balance of the moving map on every configured cone.
    ConeBalance,
    /// Solver limit against the moving map on the first cone.
    NonuniqDemo,
    /// Solver output pulled back to the rest frame of the moving map.
    StationaryDemo,
    /// Boost transformation law and two-field identity checks.
    IdentityChecks,
    /// Penalty sweep with penalized cone balances.
    PenalizedRun,
}

impl Sub {
    fn command(self) -> Command {
        match self {
            Sub::STable { lambdas } => Command::STable(lambdas),
            Sub::ConeBalance => Command::ConeBalance,
            Sub::NonuniqDemo => Command::NonuniqDemo,
            Sub::StationaryDemo => Command::StationaryDemo,
            Sub::IdentityChecks => Command::IdentityChecks,
            Sub::PenalizedRun => Command::PenalizedRun,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    let command = cli.command.command();
    let artifacts = match command.run(&cfg, cli.refine) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{}: {e}", command.name());
            return ExitCode::from(2);
        }
    };
    let dir = cli
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("wavemap-out"));
    match artifacts.write(&dir) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("cannot write outputs to {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    for v in &artifacts.report.verdicts {
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: value {:.6e}, target {:.6e}, tolerance {:.3e}", v.name, v.value, v.target, v.tolerance);
    }
    if artifacts.report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
