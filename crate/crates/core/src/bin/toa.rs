//! Scenario runner CLI.
//!
//! Exit codes: 0 when every requested check passes, 2 when a check fails,
//! 1 for configuration or runtime errors.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use toa_core::runner::run_many;
use toa_core::scenario::{bundled_names, bundled_toml, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "toa",
    version,
    about = "Arrival-time densities for free 1D wave packets: Kijowski's q0 vs the Bohmian first-crossing density"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenarios given as bundled names or TOML config paths
    Run {
        /// Bundled scenario names or paths to config files
        #[arg(required = true)]
        configs: Vec<String>,
        /// Output directory (one subdirectory per scenario)
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Run scenarios in parallel threads
        #[arg(long)]
        parallel: bool,
        /// Override the trajectory seed of every scenario that uses one
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the bundled scenarios
    List,
    /// Print a bundled scenario's annotated config
    Describe {
        name: String,
    },
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 1;
        }
    };
    match cli.cmd {
        Command::List => {
            for name in bundled_names() {
                println!("{name}");
            }
            0
        }
        Command::Describe { name } => match bundled_toml(&name) {
            Some(text) => {
                print!("{text}");
                0
            }
            None => {
                eprintln!(
                    "error: unknown scenario '{name}'; bundled scenarios: {}",
                    bundled_names().join(", ")
                );
                1
            }
        },
        Command::Run { configs, out, parallel, seed } => {
            let mut loaded = Vec::new();
            for spec in &configs {
                match ScenarioConfig::load(spec) {
                    Ok(mut cfg) => {
                        if let (Some(s), Some(t)) = (seed, cfg.trajectories.as_mut()) {
                            t.seed = s;
                        }
                        loaded.push(cfg);
                    }
                    Err(e) => {
                        eprintln!("error: {spec}: {e}");
                        return 1;
                    }
                }
            }
            let results = run_many(&loaded, Some(&out), parallel);
            let mut any_check_failed = false;
            for (name, res) in &results {
                match res {
                    Ok(run) => {
                        for c in &run.summary.checks {
                            println!(
                                "[{}] {name}/{}: {}",
                                if c.passed { "PASS" } else { "FAIL" },
                                c.name,
                                c.detail
                            );
                        }
                        for w in &run.summary.warnings {
                            eprintln!("warning: {name}: {w}");
                        }
                        println!(
                            "{name}: {} (outputs in {})",
                            if run.pass { "pass" } else { "FAIL" },
                            run.out_dir.as_deref().unwrap_or_else(|| out.as_path()).display()
                        );
                        any_check_failed |= !run.pass;
                    }
                    Err(e) => {
                        eprintln!("error: {name}: {e}");
                        return 1;
                    }
                }
            }
            if any_check_failed {
                2
            } else {
                0
            }
        }
    }
}
