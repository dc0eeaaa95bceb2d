// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Named experiments. Each recipe turns a validated config into tables and
//! a JSON summary.

mod design;
mod frontend;
mod mimo;

use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use raqr_core::frontend::{
    baseband_gains, noise_budget, BasebandGains, NoiseBudget, OperatingPoint,
};
use raqr_core::mimo::{drop_users, Link, UserDrop};

use crate::config::{ExperimentConfig, MimoSettings, SweepVariable};
use crate::output::RecipeOutput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Recipe {
    WaveformOverlay,
    SnVsRatio,
    SisoOptima,
    DetuningLoss,
    RateVsM,
    PowerScaling,
    RateVsParameter,
}

impl Recipe {
    pub const ALL: [Recipe; 7] = [
        Recipe::WaveformOverlay,
        Recipe::SnVsRatio,
        Recipe::SisoOptima,
        Recipe::DetuningLoss,
        Recipe::RateVsM,
        Recipe::PowerScaling,
        Recipe::RateVsParameter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::WaveformOverlay => "waveform-overlay",
            Recipe::SnVsRatio => "sn-vs-ratio",
            Recipe::SisoOptima => "siso-optima",
            Recipe::DetuningLoss => "detuning-loss",
            Recipe::RateVsM => "rate-vs-m",
            Recipe::PowerScaling => "power-scaling",
            Recipe::RateVsParameter => "rate-vs-parameter",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Recipe::WaveformOverlay => "exact and first-order detector voltage V(t) overlaid, with RMS deviation per LO/user ratio",
            Recipe::SnVsRatio => "measured user-signal-dependent and DC shot-noise variance against prediction",
            Recipe::SisoOptima => "closed-form coupling and LO power optima against grid search",
            Recipe::DetuningLoss => "gain loss of the numeric steady state away from resonance",
            Recipe::RateVsM => "Monte-Carlo rate and closed-form bounds against array size",
            Recipe::PowerScaling => "rate with p_k = E/M converging to the large-array limit",
            Recipe::RateVsParameter => "large-array RAQ and RF rates against an operating parameter, with crossover points",
        }
    }

    pub fn needs_mimo(self) -> bool {
        matches!(
            self,
            Recipe::RateVsM | Recipe::PowerScaling | Recipe::RateVsParameter
        )
    }

    /// Sweep variables the recipe accepts; empty when it needs no sweep.
    pub fn sweep_variables(self) -> &'static [SweepVariable] {
        use SweepVariable::*;
        match self {
            Recipe::WaveformOverlay => &[],
            Recipe::SnVsRatio => &[RatioDb],
            Recipe::SisoOptima => &[CouplingPowerMw, LoPowerDbm],
            Recipe::DetuningLoss => &[ProbeDetuningMhz, CouplingDetuningMhz],
            Recipe::RateVsM | Recipe::PowerScaling => &[Sensors],
            Recipe::RateVsParameter => &[
                LoPowerDbm,
                ProbePowerUw,
                CouplingPowerMw,
                LocalOpticalPowerMw,
            ],
        }
    }

    pub fn run(self, cfg: &ExperimentConfig, dir: &Path) -> Result<RecipeOutput> {
        let out = match self {
            Recipe::WaveformOverlay => frontend::waveform_overlay(cfg, dir),
            Recipe::SnVsRatio => frontend::sn_vs_ratio(cfg),
            Recipe::DetuningLoss => frontend::detuning_loss(cfg),
            Recipe::SisoOptima => design::siso_optima(cfg),
            Recipe::RateVsM => mimo::rate_vs_m(cfg),
            Recipe::PowerScaling => mimo::power_scaling(cfg),
            Recipe::RateVsParameter => mimo::rate_vs_parameter(cfg),
        };
        out.with_context(|| format!("recipe {}", self.name()))
    }
}

impl FromStr for Recipe {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Recipe::ALL.iter().map(|r| r.name()).collect();
                format!("unknown recipe `{s}`, expected one of {names:?}")
            })
    }
}

impl std::fmt::Display for Recipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn link_at(
    op: &OperatingPoint,
    cfg: &ExperimentConfig,
) -> Result<(BasebandGains, NoiseBudget, Link)> {
    let gains = baseband_gains(op, &cfg.chain, &cfg.system)?;
    let budget = noise_budget(op, &cfg.chain, &cfg.system, &gains)?;
    let link = Link::new(&gains, &budget);
    Ok((gains, budget, link))
}

pub(crate) fn users(m: &MimoSettings, cfg: &ExperimentConfig) -> Result<UserDrop> {
    Ok(drop_users(
        m.users,
        m.disc_distance,
        m.disc_radius,
        cfg.carrier * 1e-9,
        cfg.seed,
    )?)
}

pub(crate) fn mimo_settings(cfg: &ExperimentConfig) -> &MimoSettings {
    cfg.mimo
        .as_ref()
        .expect("validated configs carry a mimo block for MIMO recipes")
}
