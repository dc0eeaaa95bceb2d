// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Experiment harness: TOML configs, named recipes and tidy CSV/JSON output.

pub mod config;
pub mod output;
pub mod recipes;

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde_json::json;

pub use config::{load_config, ConfigError, ExperimentConfig};
pub use output::{emit_plotdata, Manifest, RecipeOutput};
pub use recipes::Recipe;

/// Files written by one run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub files: Vec<PathBuf>,
    pub manifest: Manifest,
    pub summary: serde_json::Value,
}

/// Runs the configured recipe into `cfg.output_dir`.
///
/// Writes one CSV per figure, `manifest.json`, `summary.json` and the
/// canonical `config.toml`. Output bytes depend only on the config and seed.
pub fn run_recipe(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let fingerprint = cfg.fingerprint();
    let name = cfg.recipe.name();
    let out = cfg.recipe.run(cfg, dir)?;
    let (manifest, mut files) = emit_plotdata(&out, dir, name, &fingerprint, cfg.seed)
        .with_context(|| format!("writing plot data to {}", dir.display()))?;
    let summary = json!({
        "recipe": name,
        "fingerprint": fingerprint,
        "seed": cfg.seed,
        "results": out.summary,
    });
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")?;
    files.push(path);
    let path = dir.join("config.toml");
    fs::write(
        &path,
        format!("# fingerprint = \"{fingerprint}\"\n{}", cfg.to_toml()),
    )?;
    files.push(path);
    files.extend(out.extra);
    Ok(RunArtifacts {
        files,
        manifest,
        summary,
    })
}
