// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use anyhow::Result;
use raqr_core::frontend::{
    band_limited_variance, baseband_gains, noise_budget, simulate_waveform, sn_variance_prediction,
    write_waveform_dump, UserSignal, Waveform, WaveformRequest,
};
use serde_json::json;

use crate::config::{ExperimentConfig, SweepVariable};
use crate::output::{col, AxisScale, Figure, RecipeOutput};

fn simulate(cfg: &ExperimentConfig, ratio_db: f64, duration: f64) -> Result<Waveform> {
    let w = &cfg.waveform;
    let user = UserSignal::below_lo(&cfg.op, ratio_db, cfg.beat, w.user_phase);
    let request = WaveformRequest {
        duration,
        sample_rate: w.sample_rate,
        seed: cfg.seed,
    };
    Ok(simulate_waveform(
        &cfg.op,
        &cfg.chain,
        &user,
        &cfg.system,
        &request,
    )?)
}

pub(super) fn waveform_overlay(cfg: &ExperimentConfig, dir: &Path) -> Result<RecipeOutput> {
    let ws = &cfg.waveform;
    let wave = simulate(cfg, ws.ratio_db, ws.duration)?;
    let shown = ((ws.plot_periods / cfg.beat) * ws.sample_rate).ceil() as usize;

    let mut overlay = Figure::new(
        "waveform_overlay",
        "Detector voltage, exact and first-order",
        vec![
            col("time", "s"),
            col("exact", "V"),
            col("approx", "V"),
            col("sn_exact", "V"),
            col("sn_approx", "V"),
            col("cn", "V"),
        ],
        "time",
        &["exact", "approx"],
    );
    for i in 0..shown.min(wave.len()) {
        overlay.push(vec![
            wave.time[i].into(),
            wave.exact[i].into(),
            wave.approx[i].into(),
            wave.sn_exact[i].into(),
            wave.sn_approx[i].into(),
            wave.cn[i].into(),
        ]);
    }

    let mut ratios = vec![0.0, 10.0, 20.0, ws.ratio_db];
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    let short = ws.duration.min(ws.plot_periods.max(16.0) / cfg.beat);
    let mut deviation = Figure::new(
        "waveform_deviation",
        "RMS deviation of the first-order model",
        vec![
            col("ratio", "dB"),
            col("rms_deviation", ""),
            col("ac_rms_deviation", ""),
            col("weak_lo", ""),
        ],
        "ratio",
        &["rms_deviation", "ac_rms_deviation"],
    );
    deviation.y_scale = AxisScale::Log;
    let mut rows = Vec::new();
    for &r in &ratios {
        let w = simulate(cfg, r, short)?;
        deviation.push(vec![
            r.into(),
            w.rms_deviation().into(),
            w.ac_rms_deviation().into(),
            usize::from(w.weak_lo).into(),
        ]);
        rows.push(json!({"ratio_db": r, "rms_deviation": w.rms_deviation(), "ac_rms_deviation": w.ac_rms_deviation()}));
    }

    let dump = dir.join("waveform.f64");
    let params = json!({
        "scheme": cfg.op.scheme.to_string(),
        "ratio_db": ws.ratio_db,
        "sample_rate_hz": ws.sample_rate,
        "beat_hz": cfg.beat,
        "seed": cfg.seed,
    });
    write_waveform_dump(&dump, &wave, params)?;

    Ok(RecipeOutput {
        figures: vec![overlay, deviation],
        summary: json!({
            "scheme": cfg.op.scheme.to_string(),
            "ratio_db": ws.ratio_db,
            "samples": wave.len(),
            "rms_deviation": wave.rms_deviation(),
            "ac_rms_deviation": wave.ac_rms_deviation(),
            "weak_lo": wave.weak_lo,
            "deviation_by_ratio": rows,
        }),
        extra: vec![dump.clone(), dump.with_extension("f64.json")],
    })
}

pub(super) fn sn_vs_ratio(cfg: &ExperimentConfig) -> Result<RecipeOutput> {
    let sweep = cfg.sweep.as_ref().expect("validated sweep");
    let gains = baseband_gains(&cfg.op, &cfg.chain, &cfg.system)?;
    let budget = noise_budget(&cfg.op, &cfg.chain, &cfg.system, &gains)?;
    let fs = cfg.waveform.sample_rate;
    let b = cfg.chain.bandwidth;
    let mut fig = Figure::new(
        "sn_vs_ratio",
        "Signal-dependent noise variance",
        vec![
            col("ratio", "dB"),
            col("sn_measured", "V2"),
            col("sn_approx_measured", "V2"),
            col("sn_predicted", "V2"),
            col("cn_measured", "V2"),
            col("cn_predicted", "V2"),
        ],
        "ratio",
        &["sn_measured", "sn_approx_measured", "sn_predicted"],
    );
    fig.y_scale = AxisScale::Log;
    let mut worst: f64 = 0.0;
    for r in sweep.values() {
        let w = simulate(cfg, r, cfg.waveform.duration)?;
        let user = UserSignal::below_lo(&cfg.op, r, cfg.beat, cfg.waveform.user_phase);
        let predicted = sn_variance_prediction(&gains, &cfg.chain, &user);
        let measured = band_limited_variance(&w.sn_exact, fs, b);
        worst = worst.max((measured / predicted - 1.0).abs());
        fig.push(vec![
            r.into(),
            measured.into(),
            band_limited_variance(&w.sn_approx, fs, b).into(),
            predicted.into(),
            band_limited_variance(&w.cn, fs, b).into(),
            budget.n_cn.into(),
        ]);
    }
    debug_assert_eq!(sweep.variable, SweepVariable::RatioDb);
    Ok(RecipeOutput {
        figures: vec![fig],
        summary: json!({
            "scheme": cfg.op.scheme.to_string(),
            "points": sweep.points,
            "max_relative_sn_error": worst,
            "n_cn": budget.n_cn,
        }),
        extra: Vec::new(),
    })
}

pub(super) fn detuning_loss(cfg: &ExperimentConfig) -> Result<RecipeOutput> {
    let sweep = cfg.sweep.as_ref().expect("validated sweep");
    let resonant = {
        let mut op = cfg.op.clone();
        op.detuning = Default::default();
        baseband_gains(&op, &cfg.chain, &cfg.system)?
    };
    let mut fig = Figure::new(
        "detuning_loss",
        "Gain loss against detuning",
        vec![
            col(sweep.variable.key().trim_end_matches("_mhz"), "MHz"),
            col("gain_loss", "dB"),
            col("p1", "W"),
            col("kappa", "per_V_per_m"),
            col("kappa_phase", "rad_per_V_per_m"),
            col("psi", "rad"),
        ],
        sweep.variable.key().trim_end_matches("_mhz"),
        &["gain_loss"],
    );
    let mut worst: f64 = 0.0;
    for v in sweep.values() {
        let op = sweep.variable.apply(&cfg.op, v);
        let g = baseband_gains(&op, &cfg.chain, &cfg.system)?;
        let loss = 10.0 * (g.rho / resonant.rho).log10();
        worst = worst.min(loss);
        fig.push(vec![
            v.into(),
            loss.into(),
            g.p1.into(),
            g.kappa.into(),
            g.kappa_phase.into(),
            g.psi.into(),
        ]);
    }
    Ok(RecipeOutput {
        figures: vec![fig],
        summary: json!({
            "scheme": cfg.op.scheme.to_string(),
            "variable": sweep.variable.key(),
            "resonant_rho": resonant.rho,
            "worst_loss_db": worst,
        }),
        extra: Vec::new(),
    })
}
