// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use raqr_cli::{load_config, run_recipe, Recipe};

#[derive(Parser)]
#[command(
    name = "raqr",
    version,
    about = "Rydberg atomic quantum receiver experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a recipe and write its tables.
    Run {
        /// Defaults to the recipe named in the config
        recipe: Option<Recipe>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long, env = "RAQR_THREADS")]
        threads: Option<usize>,
    },
    /// Check a config file and print its fingerprint.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the available recipes.
    ListRecipes,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            recipe,
            config,
            seed,
            out,
            threads,
        } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .context("configuring the worker pool")?;
            }
            let cfg = load_config(&config)
                .with_context(|| format!("loading {}", config.display()))?
                .with_overrides(recipe, seed, out.as_deref())?;
            log::info!("running {} (fingerprint {})", cfg.recipe, cfg.fingerprint());
            let artifacts = run_recipe(&cfg)?;
            for f in &artifacts.files {
                println!("{}", f.display());
            }
        }
        Command::Validate { config } => {
            let cfg =
                load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            println!("ok {} fingerprint={}", cfg.recipe, cfg.fingerprint());
        }
        Command::ListRecipes => {
            for r in Recipe::ALL {
                println!("{:<18} {}", r.name(), r.description());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
