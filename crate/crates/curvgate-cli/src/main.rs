//! Command-line front end: config-driven inequality checks and radius
//! scans over the bundle catalog, with deterministic CSV reports.
//!
//! Exit codes: 0 = all verdicts as expected, 1 = a verdict mismatched its
//! expectation (or an undeclared violation), 2 = configuration or
//! evaluation error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod run;

#[derive(Parser)]
#[command(
    name = "curvgate",
    about = "Numerical verification of curvature conditions on vector bundles"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run inequality checks from a config file and write report.csv +
    /// summary.txt
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Scan sectional-curvature extremes over the configured radius grid
    Scan {
        #[arg(long)]
        config: PathBuf,
    },
    /// Catalog queries
    Catalog {
        /// List the available bundle ids
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CURVGATE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Check { config } => {
            config::parse_config(&config).and_then(|cfg| run::run_check(&cfg))
        }
        Cmd::Scan { config } => config::parse_config(&config).and_then(|cfg| run::run_scan(&cfg)),
        Cmd::Catalog { list } => {
            if list {
                for id in curvgate::bundle::catalog::list() {
                    println!("{id}");
                }
            } else {
                println!("try: curvgate catalog --list");
            }
            Ok(0)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
