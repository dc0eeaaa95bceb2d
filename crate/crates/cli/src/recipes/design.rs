// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

use anyhow::Result;
use raqr_core::design::{
    grid_golden_max, newton_optimal_p0, normalized_noise, optimal_pc_cn, optimal_pc_tn,
    optimal_plo_cn, optimal_plo_tn, single_noise_objective, ClosedFormOptimum, FeasibleBox,
    NoiseTarget, NoiseWeights,
};
use raqr_core::frontend::OperatingPoint;
use raqr_core::mimo::path_loss_db;
use serde_json::{json, Value};

use crate::config::{dbm_to_w, w_to_dbm, ExperimentConfig, SweepVariable};
use crate::output::{col, Annotation, AxisScale, Figure, RecipeOutput};

const GRID_POINTS: usize = 400;
const PC_RANGE: (f64, f64) = (1e-4, 10.0);
const PLO_RANGE: (f64, f64) = (1e-14, 1e-6);

#[derive(Clone, Copy)]
enum Knob {
    Pc,
    PLo,
}

impl Knob {
    fn set(self, op: &OperatingPoint, w: f64) -> OperatingPoint {
        let mut o = op.clone();
        match self {
            Knob::Pc => o.pc = w,
            Knob::PLo => o.p_lo = w,
        }
        o
    }

    /// Watts to the unit of the matching sweep key.
    fn to_sweep_unit(self, w: f64) -> f64 {
        match self {
            Knob::Pc => w * 1e3,
            Knob::PLo => w_to_dbm(w),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Knob::Pc => "pc",
            Knob::PLo => "p_lo",
        }
    }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Closed-form optimum against a grid search of the same objective.
fn compare(
    op: &OperatingPoint,
    cfg: &ExperimentConfig,
    knob: Knob,
    target: NoiseTarget,
    cf: &ClosedFormOptimum,
    range: (f64, f64),
) -> Value {
    let f = |w: f64| single_noise_objective(&knob.set(op, w), &cfg.system, target);
    let (grid_x, grid_v) = grid_golden_max(f, range.0, range.1, GRID_POINTS);
    let at_cf = if cf.power > 0.0 { f(cf.power) } else { 0.0 };
    json!({
        "parameter": knob.name(),
        "target": match target { NoiseTarget::DcShot => "dc-shot", NoiseTarget::Thermal => "thermal" },
        "closed_form_w": cf.power,
        "boundary": cf.boundary,
        "gamma": cf.gamma,
        "grid_w": grid_x,
        "gap_db": db(grid_v) - db(at_cf),
    })
}

/// Reference user-signal power 2pβ at the disc centre.
fn reference_sn_power(cfg: &ExperimentConfig) -> f64 {
    let (p, d) = cfg.mimo.as_ref().map_or((dbm_to_w(20.0), 1500.0), |m| {
        (m.user_power, m.disc_distance)
    });
    2.0 * p * 10f64.powf(path_loss_db(d, cfg.carrier * 1e-9) / 10.0)
}

pub(super) fn siso_optima(cfg: &ExperimentConfig) -> Result<RecipeOutput> {
    let sweep = cfg.sweep.as_ref().expect("validated sweep");
    let op = &cfg.op;
    let sys = &cfg.system;
    let optima = [
        (Knob::Pc, NoiseTarget::DcShot, optimal_pc_cn(op, sys)?),
        (Knob::PLo, NoiseTarget::DcShot, optimal_plo_cn(op, sys)?),
        (Knob::Pc, NoiseTarget::Thermal, optimal_pc_tn(op, sys)?),
        (Knob::PLo, NoiseTarget::Thermal, optimal_plo_tn(op, sys)?),
    ];
    let comparisons: Vec<Value> = optima
        .iter()
        .map(|(k, t, cf)| {
            let range = match k {
                Knob::Pc => PC_RANGE,
                Knob::PLo => PLO_RANGE,
            };
            compare(op, cfg, *k, *t, cf, range)
        })
        .collect();

    let knob = match sweep.variable {
        SweepVariable::CouplingPowerMw => Knob::Pc,
        _ => Knob::PLo,
    };
    let to_w = |v: f64| match knob {
        Knob::Pc => v * 1e-3,
        Knob::PLo => dbm_to_w(v),
    };
    let values = sweep.values();
    let cn: Vec<f64> = values
        .iter()
        .map(|&v| single_noise_objective(&knob.set(op, to_w(v)), sys, NoiseTarget::DcShot))
        .collect();
    let tn: Vec<f64> = values
        .iter()
        .map(|&v| single_noise_objective(&knob.set(op, to_w(v)), sys, NoiseTarget::Thermal))
        .collect();
    let peak = |xs: &[f64], cf: &ClosedFormOptimum, target| {
        let at = if cf.power > 0.0 {
            single_noise_objective(&knob.set(op, cf.power), sys, target)
        } else {
            0.0
        };
        xs.iter().copied().fold(at, f64::max)
    };
    let (cf_cn, cf_tn) = match knob {
        Knob::Pc => (&optima[0].2, &optima[2].2),
        Knob::PLo => (&optima[1].2, &optima[3].2),
    };
    let (cn_peak, tn_peak) = (
        peak(&cn, cf_cn, NoiseTarget::DcShot),
        peak(&tn, cf_tn, NoiseTarget::Thermal),
    );

    let axis = sweep.variable.key();
    let mut fig = Figure::new(
        "siso_optima",
        "Single-noise objectives and their closed-form optima",
        vec![
            col(axis, ""),
            col("objective_cn", "dB"),
            col("objective_tn", "dB"),
        ],
        axis,
        &["objective_cn", "objective_tn"],
    );
    if sweep.scale == crate::config::Scale::Log {
        fig.x_scale = AxisScale::Log;
    }
    for (i, v) in values.iter().enumerate() {
        fig.push(vec![
            (*v).into(),
            (db(cn[i]) - db(cn_peak)).into(),
            (db(tn[i]) - db(tn_peak)).into(),
        ]);
    }
    for (label, cf) in [
        ("closed-form optimum, dc shot", cf_cn),
        ("closed-form optimum, thermal", cf_tn),
    ] {
        if !cf.boundary {
            fig.annotations.push(Annotation {
                label: label.to_string(),
                axis: "x".into(),
                value: knob.to_sweep_unit(cf.power),
            });
        }
    }

    let weights = NoiseWeights::derived(&cfg.chain, sys, reference_sn_power(cfg));
    let bounds = FeasibleBox::default();
    let newton = newton_optimal_p0(
        op,
        &weights,
        sys,
        &cfg.chain,
        bounds.optical_min,
        bounds.optical_max,
    )?;
    let w_of = |p0: f64| {
        let mut o = op.clone();
        o.p0 = p0;
        normalized_noise(&o, &weights, sys, &cfg.chain).map_or(f64::NEG_INFINITY, |w| -w)
    };
    let (grid_p0, _) = grid_golden_max(w_of, bounds.optical_min, bounds.optical_max, GRID_POINTS);

    Ok(RecipeOutput {
        figures: vec![fig],
        summary: json!({
            "scheme": op.scheme.to_string(),
            "probe_power_w": op.p0,
            "optima": comparisons,
            "newton_p0": {
                "newton_w": newton.power,
                "grid_w": grid_p0,
                "relative_gap": (newton.power / grid_p0 - 1.0).abs(),
                "iterations": newton.iterations,
                "boundary": newton.boundary,
                "regime": newton.regime.to_string(),
            },
        }),
        extra: Vec::new(),
    })
}
