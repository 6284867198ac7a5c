//! `torus`: command-line front end for torus fitting, isochrone sweeps,
//! action-grid probing and Poincaré-section checks.

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "torus", version, about = "Least-squares construction of invariant tori")]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set solver.max_iterations=50`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory (same as `--set output=DIR`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frequency-labelled isochrone fits over a grid of orders and frequencies.
    SweepIsochrone,
    /// A single torus fit.
    Fit,
    /// Wavefront probing of an action lattice from a seed torus.
    Probe,
    /// Constructed against integrated Poincaré sections of a fitted torus.
    Section {
        /// Fit report or model file (same as `--set section.model=PATH`).
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let mut overrides = cli.overrides.clone();
    if let Some(out) = &cli.output {
        overrides.push(format!("output={}", toml_string(&out.to_string_lossy())));
    }
    if let Command::Section { model: Some(m) } = &cli.command {
        overrides.push(format!("section.model={}", toml_string(&m.to_string_lossy())));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::SweepIsochrone => commands::sweep_isochrone(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Probe => commands::probe(&cfg),
        Command::Section { .. } => commands::section(&cfg),
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}
