use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use edlab::artifacts::write_artifacts;
use edlab::config::{load_config, ExperimentKind};
use edlab::experiments::run_experiment;

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;
const EXIT_NUMERIC_ABORT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "edlab",
    about = "1-D entropic-dynamics laboratory: integrators, walker ensembles, and uncertainty-relation diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file and write its artifacts.
    Run {
        config: PathBuf,
        /// Override the RNG seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: runs/<experiment>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List experiment names and the config keys they accept.
    List,
    /// Validate a config file without running it.
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, out } => cmd_run(config, seed, out),
        Command::List => cmd_list(),
        Command::Check { config } => cmd_check(config),
    }
}

fn cmd_run(path: PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> ExitCode {
    let mut config = match load_config(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    let out_dir = out.unwrap_or_else(|| PathBuf::from("runs").join(config.kind.name()));

    let artifacts = match run_experiment(&config) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("run error: {e}");
            return ExitCode::from(EXIT_NUMERIC_ABORT);
        }
    };

    match write_artifacts(&artifacts, &out_dir) {
        Ok(paths) => {
            for p in &paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("artifact error: {e}");
            return ExitCode::from(EXIT_NUMERIC_ABORT);
        }
    }

    for c in &artifacts.checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {}: {} (measured = {:.6e}, bound = {:.3e})",
            c.id, c.detail, c.measured, c.bound
        );
    }
    if let Some(reason) = &artifacts.abort {
        eprintln!("numeric abort: {reason} (partial artifacts written)");
        return ExitCode::from(EXIT_NUMERIC_ABORT);
    }
    if artifacts.passed() {
        println!("run {} passed all checks", artifacts.run_id);
        ExitCode::SUCCESS
    } else {
        let failed = artifacts.checks.iter().filter(|c| !c.pass).count();
        eprintln!("run {}: {failed} check(s) failed", artifacts.run_id);
        ExitCode::from(EXIT_CHECK_FAILURE)
    }
}

fn cmd_list() -> ExitCode {
    println!("experiments (required key: [experiment].name; everything else has defaults):");
    for kind in ExperimentKind::all() {
        let run_keys = kind.run_keys().join(", ");
        let exp_keys = kind.experiment_keys().join(", ");
        println!("  {}", kind.name());
        if !exp_keys.is_empty() {
            println!("    [experiment] {exp_keys}");
        }
        println!("    [grid] n, x_min, x_max");
        println!("    [physics] hbar, m, mu");
        println!("    [run] {run_keys}");
    }
    ExitCode::SUCCESS
}

fn cmd_check(path: PathBuf) -> ExitCode {
    match load_config(&path) {
        Ok(config) => {
            println!("config ok: experiment {}", config.kind.name());
            println!(
                "{}",
                serde_json::to_string_pretty(&config).expect("config serializes")
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG_ERROR)
        }
    }
}
