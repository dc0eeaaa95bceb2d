// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

use anyhow::Result;
use raqr_core::mimo::{
    self as core_mimo, asymptotic_rate, crossover_threshold, monte_carlo_rate, noise_floor,
    rate_of, rf_baseline, sinr_lb_mrc, sinr_lb_zf, Link, Method, MimoScenario,
};
use raqr_core::Error as CoreError;
use serde_json::{json, Value};

use super::{link_at, mimo_settings, users};
use crate::config::{dbm_to_w, w_to_dbm, ExperimentConfig, MimoSettings, Scale, SweepVariable};
use crate::output::{col, Annotation, AxisScale, Cell, Figure, RecipeOutput};

fn scenario(
    cfg: &ExperimentConfig,
    m: &MimoSettings,
    sensors: usize,
    beta: &[f64],
    power: f64,
) -> MimoScenario {
    let lambda = raqr_core::constants::SPEED_OF_LIGHT / cfg.op.f_lo;
    MimoScenario {
        m: sensors,
        k: m.users,
        d_s: m.spacing_wavelengths * lambda,
        lambda_lo: lambda,
        theta_arrival: m.arrival_angle,
        beta: beta.to_vec(),
        p: vec![power; m.users],
        seed: cfg.seed,
        n_realizations: m.realizations,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn mean_rate(sinr: &[f64]) -> f64 {
    mean(&sinr.iter().map(|&s| rate_of(s)).collect::<Vec<_>>())
}

fn bound(sc: &MimoScenario, link: &Link, method: Method) -> Result<Vec<f64>> {
    Ok(match method {
        Method::Mrc => sinr_lb_mrc(sc, link)?,
        Method::Zf => sinr_lb_zf(sc, link)?,
    })
}

pub(super) fn rate_vs_m(cfg: &ExperimentConfig) -> Result<RecipeOutput> {
    let ms = mimo_settings(cfg);
    let sweep = cfg.sweep.as_ref().expect("validated sweep");
    let (_, _, link) = link_at(&cfg.op, cfg)?;
    let drop = users(ms, cfg)?;
    let mut fig = Figure::new(
        "rate_vs_m",
        "Per-user rate against array size",
        vec![
            col("sensors", ""),
            col("detector", ""),
            col("mc_rate", "bps_hz"),
            col("mc_se", "bps_hz"),
            col("bound_rate", "bps_hz"),
            col("printed_bound_rate", "bps_hz"),
            col("ergodic_rate", "bps_hz"),
        ],
        "sensors",
        &["mc_rate", "bound_rate"],
    );
    fig.group_by = Some("detector".into());
    if sweep.scale == Scale::Log {
        fig.x_scale = AxisScale::Log;
    }
    let mut skipped = Vec::new();
    let mut violations = 0usize;
    let mut alarms = Vec::new();
    for m in sweep.integer_values() {
        for &method in &ms.detectors {
            if method == Method::Zf && m <= ms.users {
                skipped.push(json!({"sensors": m, "detector": "zf"}));
                continue;
            }
            let sc = scenario(cfg, ms, m, &drop.beta, ms.user_power);
            let r = monte_carlo_rate(&sc, &link, method)?;
            if r.mean_rate + 3.0 * r.mean_rate_se < r.mean_bound_rate {
                violations += 1;
            }
            if r.bound_alarm {
                alarms.push(m);
            }
            let printed: Cell = match method {
                Method::Zf => mean(
                    &r.users
                        .iter()
                        .filter_map(|u| u.printed_bound_rate)
                        .collect::<Vec<_>>(),
                )
                .into(),
                Method::Mrc => "".into(),
            };
            fig.push(vec![
                m.into(),
                method.to_string().into(),
                r.mean_rate.into(),
                r.mean_rate_se.into(),
                r.mean_bound_rate.into(),
                printed,
                r.mean_ergodic_rate.into(),
            ]);
        }
    }
    Ok(RecipeOutput {
        figures: vec![fig],
        summary: json!({
            "scheme": cfg.op.scheme.to_string(),
            "users": ms.users,
            "realizations": ms.realizations,
            "user_distance_m": drop.distance,
            "beta": drop.beta,
            "bound_violations": violations,
            "printed_zf_bound_alarms": alarms,
            "skipped": skipped,
        }),
        extra: Vec::new(),
    })
}

pub(super) fn power_scaling(cfg: &ExperimentConfig) -> Result<RecipeOutput> {
    let ms = mimo_settings(cfg);
    let sweep = cfg.sweep.as_ref().expect("validated sweep");
    let (gains, _, link) = link_at(&cfg.op, cfg)?;
    let drop = users(ms, cfg)?;
    let floor = noise_floor(&gains, &cfg.chain, &cfg.system);
    let limit = mean(
        &drop
            .beta
            .iter()
            .map(|&b| asymptotic_rate(floor, b, ms.total_energy))
            .collect::<Vec<_>>(),
    );
    let mut fig = Figure::new(
        "power_scaling",
        "Per-user rate with transmit power E/M",
        vec![
            col("sensors", ""),
            col("detector", ""),
            col("bound_rate", "bps_hz"),
            col("mc_rate", "bps_hz"),
            col("mc_se", "bps_hz"),
            col("asymptotic_rate", "bps_hz"),
        ],
        "sensors",
        &["bound_rate", "mc_rate", "asymptotic_rate"],
    );
    fig.group_by = Some("detector".into());
    fig.x_scale = AxisScale::Log;
    let mut last = Vec::new();
    for m in sweep.integer_values() {
        for &method in &ms.detectors {
            if method == Method::Zf && m <= ms.users {
                continue;
            }
            let sc = scenario(cfg, ms, m, &drop.beta, ms.total_energy / m as f64);
            let r = monte_carlo_rate(&sc, &link, method)?;
            let b = mean_rate(&bound(&sc, &link, method)?);
            fig.push(vec![
                m.into(),
                method.to_string().into(),
                b.into(),
                r.mean_rate.into(),
                r.mean_rate_se.into(),
                limit.into(),
            ]);
            last.push(json!({"sensors": m, "detector": method.to_string(), "bound_rate": b, "relative_gap": (b / limit - 1.0).abs()}));
        }
    }
    fig.annotations.push(Annotation {
        label: "large-array limit".into(),
        axis: "y".into(),
        value: limit,
    });
    Ok(RecipeOutput {
        figures: vec![fig],
        summary: json!({
            "scheme": cfg.op.scheme.to_string(),
            "total_energy_w": ms.total_energy,
            "noise_floor": floor,
            "asymptotic_rate": limit,
            "points": last,
        }),
        extra: Vec::new(),
    })
}

fn core_variable(v: SweepVariable) -> core_mimo::SweepVariable {
    match v {
        SweepVariable::ProbePowerUw => core_mimo::SweepVariable::P0,
        SweepVariable::CouplingPowerMw => core_mimo::SweepVariable::Pc,
        SweepVariable::LocalOpticalPowerMw => core_mimo::SweepVariable::Pl,
        _ => core_mimo::SweepVariable::PLo,
    }
}

/// Sweep value in watts.
fn to_watts(v: SweepVariable, x: f64) -> f64 {
    match v {
        SweepVariable::ProbePowerUw => x * 1e-6,
        SweepVariable::CouplingPowerMw | SweepVariable::LocalOpticalPowerMw => x * 1e-3,
        _ => dbm_to_w(x),
    }
}

fn from_watts(v: SweepVariable, w: f64) -> f64 {
    match v {
        SweepVariable::ProbePowerUw => w * 1e6,
        SweepVariable::CouplingPowerMw | SweepVariable::LocalOpticalPowerMw => w * 1e3,
        _ => w_to_dbm(w),
    }
}

pub(super) fn rate_vs_parameter(cfg: &ExperimentConfig) -> Result<RecipeOutput> {
    let ms = mimo_settings(cfg);
    let sweep = cfg.sweep.as_ref().expect("validated sweep");
    let var = sweep.variable;
    let drop = users(ms, cfg)?;
    let energy = ms.total_energy;
    let rf_limit = mean(
        &drop
            .beta
            .iter()
            .map(|&b| rate_of(energy * b / ms.rf_noise))
            .collect::<Vec<_>>(),
    );
    let rf_sc = scenario(cfg, ms, ms.sensors, &drop.beta, energy / ms.sensors as f64);
    let rf_bound = mean_rate(&rf_baseline(&rf_sc, ms.rf_noise, Method::Mrc)?);

    let axis = var.key();
    let mut fig = Figure::new(
        "rate_vs_parameter",
        "Large-array rate of RAQ and RF arrays",
        vec![
            col(axis, ""),
            col("raq_asymptotic_rate", "bps_hz"),
            col("rf_asymptotic_rate", "bps_hz"),
            col("raq_mrc_bound_rate", "bps_hz"),
            col("rf_mrc_bound_rate", "bps_hz"),
        ],
        axis,
        &["raq_asymptotic_rate", "rf_asymptotic_rate"],
    );
    if sweep.scale == Scale::Log {
        fig.x_scale = AxisScale::Log;
    }
    let values = sweep.values();
    for &x in &values {
        let op = var.apply(&cfg.op, x);
        let (gains, _, link) = link_at(&op, cfg)?;
        let floor = noise_floor(&gains, &cfg.chain, &cfg.system);
        let raq = mean(
            &drop
                .beta
                .iter()
                .map(|&b| asymptotic_rate(floor, b, energy))
                .collect::<Vec<_>>(),
        );
        let sc = scenario(cfg, ms, ms.sensors, &drop.beta, energy / ms.sensors as f64);
        let raq_bound = mean_rate(&sinr_lb_mrc(&sc, &link)?);
        fig.push(vec![
            x.into(),
            raq.into(),
            rf_limit.into(),
            raq_bound.into(),
            rf_bound.into(),
        ]);
    }

    let roots: Vec<f64> = if values.len() < 2 {
        Vec::new()
    } else {
        let (lo, hi) = {
            let a = to_watts(var, sweep.start);
            let b = to_watts(var, sweep.stop);
            (a.min(b), a.max(b))
        };
        let grid = (4 * values.len()).max(64);
        match crossover_threshold(
            &cfg.op,
            &cfg.system,
            &cfg.chain,
            ms.rf_noise,
            core_variable(var),
            lo,
            hi,
            grid,
        ) {
            Ok(r) => r.into_iter().map(|w| from_watts(var, w)).collect(),
            Err(CoreError::NoCrossing { .. }) => Vec::new(),
            Err(e) => return Err(e.into()),
        }
    };
    for r in &roots {
        fig.annotations.push(Annotation {
            label: "crossover".into(),
            axis: "x".into(),
            value: *r,
        });
    }
    Ok(RecipeOutput {
        figures: vec![fig],
        summary: json!({
            "scheme": cfg.op.scheme.to_string(),
            "variable": axis,
            "rf_noise_w": ms.rf_noise,
            "total_energy_w": energy,
            "crossover": roots.iter().map(|&r| json!(r)).collect::<Vec<Value>>(),
        }),
        extra: Vec::new(),
    })
}
