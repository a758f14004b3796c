use std::path::PathBuf;
use std::process::ExitCode;

use atomlaser::config::{ScenarioConfig, ScenarioKind};
use atomlaser::scenario::{convergence_check, run};
use atomlaser::Error;
use clap::{Parser, Subcommand};

/// Worker-count override for the internal thread pool.
const WORKERS_ENV: &str = "ATOMLASER_WORKERS";

#[derive(Parser)]
#[command(name = "atomlaser", version, about = "Atom-laser outcoupling scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV files.
    Run { config: PathBuf },
    /// Rerun a scenario with dt/2 and twice the grid and report the largest changes.
    Check { config: PathBuf },
    /// Print the resolved default configuration of a scenario.
    PrintDefaults {
        #[arg(default_value = "single-pulse")]
        scenario: String,
    },
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_numerical() { 2 } else { 1 })
}

fn configure_workers() -> Result<(), String> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{WORKERS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_workers() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match cli.command {
        Command::PrintDefaults { scenario } => match scenario.parse::<ScenarioKind>() {
            Ok(kind) => {
                print!("{}", ScenarioConfig::defaults(kind).to_text());
                ExitCode::SUCCESS
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
        Command::Run { config } => {
            let cfg = match ScenarioConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match run(&cfg) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Check { config } => {
            let cfg = match ScenarioConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match convergence_check(&cfg) {
                Ok(report) => {
                    print!("{report}");
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => fail(&e),
            }
        }
    }
}
