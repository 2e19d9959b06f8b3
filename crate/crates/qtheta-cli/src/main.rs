//! qtheta: stabilizer search and certification, star multiplication tables
//! with theta-constant oracles, classical theta evaluation, and verification
//! suites over quantum theta rings.
//!
//! Configuration comes from a flat JSON file (`--config`) overridden by
//! flags; θ uses the grammar "(p+q*sqrt(D))/r". Reports are JSON with sorted
//! keys and 17-significant-digit floats, written to `--out` or stdout. Exit
//! codes: 0 all pass, 1 verification failure, 2 configuration error, 3 radius
//! budget exceeded. The environment variable QTHETA_RADIUS_BUDGET caps every
//! adaptive series radius.

mod commands;
mod config;
mod emit;

use clap::{Parser, Subcommand};
use commands::{Report, Suite, ThetaEvalArgs};
use config::{CliError, RawConfig, RunConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "qtheta", version, about = "Quantum theta rings on noncommutative tori")]
struct Cli {
    /// Flat JSON config file; flags override file values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// θ as "(p+q*sqrt(D))/r", e.g. "(-1+1*sqrt(21))/10"
    #[arg(long, global = true, value_name = "EXPR")]
    theta: Option<String>,

    /// Stabilizer matrix, row major
    #[arg(long, global = true, value_name = "a,b,c,d")]
    g: Option<String>,

    /// τ in the upper half-plane (default "0,1")
    #[arg(long, global = true, value_name = "re,im")]
    tau: Option<String>,

    /// Polishchuk bound level ε (default 2)
    #[arg(long, global = true, value_name = "0|1|2")]
    epsilon_level: Option<u8>,

    /// Largest cached grade (default 2)
    #[arg(long, global = true, value_name = "N")]
    grade: Option<u32>,

    /// Series truncation tolerance (default 1e-14)
    #[arg(long, global = true, value_name = "TOL")]
    tol: Option<f64>,

    /// Write the JSON report here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a stabilizer with c >= a+d+ε, or certify a supplied one
    FindG,
    /// Star structure constants and the theta-constant column at grades (n, m)
    Table {
        /// Left grade
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Right grade
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Evaluate θ[α;β](z, τs) by truncated summation (tolerance from --tol)
    ThetaEval {
        /// Characteristic α as "p/q" or "p"
        #[arg(long, default_value = "0")]
        alpha: String,
        /// Characteristic β as "p/q" or "p"
        #[arg(long, default_value = "0")]
        beta: String,
        /// Argument z
        #[arg(long, default_value = "0,0", value_name = "re,im")]
        z: String,
        /// Modulus τs in the upper half-plane
        #[arg(long = "tau-s", default_value = "0,1", value_name = "re,im")]
        tau_s: String,
    },
    /// Run verification suites; exit 0 iff every checked invariant passes
    Verify {
        /// Which suite to run
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
}

fn main() {
    std::process::exit(run(Cli::parse()));
}

fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok((report, out_path)) => {
            let text = emit::stable_json(&report.value);
            match out_path {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{text}"),
            }
            report.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(Report, Option<PathBuf>), CliError> {
    let file_layer = match &cli.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    let raw = file_layer.overlay(RawConfig {
        theta: cli.theta,
        g: cli.g,
        tau: cli.tau,
        epsilon_level: cli.epsilon_level,
        max_grade: cli.grade,
        trunc_tol: cli.tol,
        out: cli.out.map(|p| p.display().to_string()),
    });
    match cli.command {
        Command::FindG => with_config(raw, commands::find_g),
        Command::Table { n, m } => with_config(raw, |cfg| commands::table(cfg, n, m)),
        Command::ThetaEval { alpha, beta, z, tau_s } => {
            let out_path = raw.out.clone().map(PathBuf::from);
            let tol = raw.trunc_tol.unwrap_or(1e-14);
            Ok((commands::theta_eval(&ThetaEvalArgs { alpha, beta, z, tau_s, tol })?, out_path))
        }
        Command::Verify { suite } => with_config(raw, |cfg| commands::verify(cfg, suite)),
    }
}

fn with_config(
    raw: RawConfig,
    f: impl FnOnce(&RunConfig) -> Result<Report, CliError>,
) -> Result<(Report, Option<PathBuf>), CliError> {
    let config = RunConfig::resolve(raw)?;
    let report = f(&config)?;
    Ok((report, config.out_path))
}
