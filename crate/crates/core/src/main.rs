use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use chirpsqueeze::report::run_scenario;
use chirpsqueeze::scenario::{list_scenarios, locate, scenario_dir, Scenario, SCENARIO_DIR_ENV};
use chirpsqueeze::validate::{self, Level};

#[derive(Parser)]
#[command(
    name = "chirpsqueeze",
    version,
    about = "Squeezed light from high-gain PDC in chirped QPM crystals"
)]
struct Cli {
    /// Worker threads for the data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a bundled scenario by name).
    Run {
        config: String,
        /// Directory receiving the output files.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Override the scenario's grid size (power of two, at least 1024).
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Run the self-consistency checks.
    Validate {
        #[arg(long, value_enum, default_value = "fast")]
        level: Level,
    },
    /// Work with the bundled scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// List bundled scenarios (directory from $CHIRPSQUEEZE_SCENARIOS if set).
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: could not configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match cli.command {
        Command::Run {
            config,
            out_dir,
            grid_points,
        } => {
            let result = locate(&config)
                .and_then(|p| Scenario::load(&p))
                .and_then(|mut s| {
                    if let Some(g) = grid_points {
                        s.grid_points = g;
                    }
                    run_scenario(&s, &out_dir)
                });
            match result {
                Ok(out) => {
                    print!("{}", out.summary.table());
                    if out.summary.unwrap_warnings > 0 {
                        eprintln!(
                            "warning: {} squeezing-angle steps were close to the unwrap limit; consider more grid points",
                            out.summary.unwrap_warnings
                        );
                    }
                    for p in &out.written {
                        println!("wrote {}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Validate { level } => {
            let checks = validate::run(level);
            println!("status\tcheck\tvalue\tlimit");
            for c in &checks {
                println!("{}", c.line());
            }
            if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Scenarios {
            action: ScenarioAction::List,
        } => {
            let dir = scenario_dir();
            match list_scenarios(&dir) {
                Ok(list) => {
                    for (name, path) in list {
                        let desc = Scenario::load(&path)
                            .map(|s| s.description)
                            .unwrap_or_else(|e| format!("(invalid: {e})"));
                        println!("{name:<20}{desc}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e} (set {SCENARIO_DIR_ENV} to a scenario directory)");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
