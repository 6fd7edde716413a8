use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use galileo_lab::audit::CATALOG;
use galileo_lab::dynamics::Method;
use galileo_lab::output;
use galileo_lab::scenario::{run_scenario, RunOptions, Scenario};

const EXIT_INPUT: u8 = 1;
const EXIT_AUDIT: u8 = 2;

#[derive(Parser)]
#[command(name = "galileo-lab", about = "Two-body invariance laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs.
    Run {
        scenario: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// RNG seed for randomized audits (overrides the scenario).
        #[arg(long)]
        seed: Option<u64>,
        /// Integration step (overrides the scenario).
        #[arg(long)]
        step: Option<f64>,
        /// rk4 or verlet (overrides the scenario).
        #[arg(long)]
        method: Option<Method>,
    },
    /// List the available audits.
    Audits,
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Audits => {
            for spec in CATALOG {
                println!("{:<20} {:<22} tol {:<8e} {}", spec.name, spec.lemma, spec.default_tolerance, spec.description);
            }
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("galileo-lab {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
        Command::Run { scenario, out, seed, step, method } => {
            let started = std::time::Instant::now();
            let sc = match Scenario::load(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {}: {e}", scenario.display());
                    return ExitCode::from(EXIT_INPUT);
                }
            };
            let run = match run_scenario(&sc, &RunOptions { seed, step, method }) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_INPUT);
                }
            };
            if let Err(e) = output::write_all(&out, &run.report, run.trajectory.as_ref()) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            for a in &run.report.audits {
                let residual = a.residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
                println!("{:<5} {:<20} residual {:<10} tol {:e}  {}", a.verdict, a.audit, residual, a.tolerance, a.detail);
            }
            if let Some(e) = &run.report.integration_error {
                eprintln!("integration stopped: {e}");
            }
            println!("overall {}", run.report.verdict);
            eprintln!("wall time {:.3}s, outputs in {}", started.elapsed().as_secs_f64(), out.display());
            if run.report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_AUDIT)
            }
        }
    }
}
