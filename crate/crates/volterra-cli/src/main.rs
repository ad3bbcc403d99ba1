//! `volterra`: run experiment suites from a TOML config and write CSV/report
//! artifacts, or describe what an experiment checks.
//!
//! Exit codes: 0 all checks pass, 1 an experiment failed or a check is FAIL,
//! 2 unusable input (unreadable/malformed config, invalid values, unknown name).

mod config;
mod describe;
mod experiments;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, RawConfig, Resolved};
use experiments::Session;
use output::{write_artifacts, RunHeader};

/// Overrides the output directory from the config.
const OUT_DIR_ENV: &str = "VOLTERRA_OUT_DIR";

#[derive(Parser)]
#[command(name = "volterra", about = "Numerical experiments for stochastic Volterra equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment selected by a config file and write artifacts.
    Run { config: PathBuf },
    /// Explain what a named experiment computes and checks.
    Describe { experiment: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => run_command(&config),
        Command::Describe { experiment } => describe_command(&experiment),
    };
    ExitCode::from(code)
}

/// Prints to stdout, ignoring a closed pipe (e.g. `volterra describe x | head`).
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn describe_command(name: &str) -> u8 {
    match Experiment::parse(name) {
        Some(e) => {
            emit(describe::describe(e));
            0
        }
        None => {
            eprintln!(
                "error: unknown experiment {name:?}; known experiments: {}",
                Experiment::NAMES.join(", ")
            );
            2
        }
    }
}

fn run_command(config_path: &Path) -> u8 {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return 2;
        }
    };
    let raw: RawConfig = match toml::from_str(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: malformed config: {e}");
            return 2;
        }
    };
    let cfg = match config::resolve(&raw) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: invalid config: {msg}");
            return 2;
        }
    };

    let out_dir = std::env::var(OUT_DIR_ENV)
        .ok()
        .filter(|v| !v.is_empty())
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| "volterra-out".to_string());
    let out_dir = PathBuf::from(out_dir);

    let selected: Vec<Experiment> = match cfg.experiment {
        Experiment::All => vec![
            Experiment::CompletePositivity,
            Experiment::ResolventBuild,
            Experiment::YosidaConvergence,
            Experiment::ConvolutionCompare,
            Experiment::Identities,
            Experiment::Regularity,
        ],
        single => vec![single],
    };

    let session = Session::new(&cfg);
    let mut outputs = Vec::new();
    let mut run_error = false;
    for experiment in selected {
        match experiments::run(experiment, &session) {
            Ok(out) => outputs.push(out),
            Err(msg) => {
                eprintln!("error: {} failed: {msg}", experiment.name());
                let mut out = output::ExperimentOutput::new(experiment.name());
                out.line(format!("error: {msg}"));
                out.check("completed", 0.0, 1.0, false);
                outputs.push(out);
                run_error = true;
                break;
            }
        }
    }

    let header = run_header(&cfg, config_path);
    let failures = match write_artifacts(&out_dir, &header, &outputs) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot write artifacts to {}: {e}", out_dir.display());
            return 1;
        }
    };

    let checks: usize = outputs.iter().map(|o| o.checks.len()).sum();
    emit(&format!(
        "wrote {} to {} ({checks} checks, {failures} FAIL)",
        outputs
            .iter()
            .flat_map(|o| o.csvs.iter())
            .map(|(f, _)| f.as_str())
            .chain(["report.txt", "summary.csv"])
            .collect::<Vec<_>>()
            .join(", "),
        out_dir.display()
    ));
    if run_error || failures > 0 {
        1
    } else {
        0
    }
}

fn run_header(cfg: &Resolved, config_path: &Path) -> RunHeader {
    let grids: Vec<String> = cfg.grids.iter().map(|g| g.steps().to_string()).collect();
    RunHeader {
        config_path: config_path.display().to_string(),
        experiment: cfg.experiment.name().to_string(),
        operator: format!("{} [{} modes]", cfg.operator.label(), cfg.operator.dimension()),
        kernel: cfg.kernel_label.clone(),
        covariance: cfg.covariance_label.clone(),
        grid: format!(
            "T = {}, steps per level: {}",
            cfg.grids[0].horizon(),
            grids.join(", ")
        ),
        seed: cfg.seed,
        ensemble: cfg.ensemble,
    }
}
