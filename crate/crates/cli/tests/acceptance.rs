// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails. Pass criterion numbers as arguments to run a subset:
//! `cargo test -p raqr-cli --test acceptance -- 1 7`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, ensure, Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use raqr_cli::config::{dbm_to_w, ExperimentConfig};
use raqr_cli::{load_config, run_recipe};
use raqr_core::atomic::{
    chi_prime_resonant, chi_resonant, rho21_resonant, steady_state_numeric, AtomicSystem,
};
use raqr_core::constants::SPEED_OF_LIGHT;
use raqr_core::design::{
    grid_golden_max, newton_optimal_p0, normalized_noise, normalized_noise_gradient, optimal_pc_cn,
    optimal_pc_tn, optimal_plo_cn, optimal_plo_tn, single_noise_objective, ClosedFormOptimum,
    FeasibleBox, NoiseTarget, NoiseWeights,
};
use raqr_core::frontend::{
    band_limited_variance, baseband_gains, ln_p1_gradient, noise_budget, p1_of_lo,
    simulate_waveform, sn_variance_prediction, DetectionChain, OperatingPoint, UserSignal,
    WaveformRequest,
};
use raqr_core::mimo::{
    asymptotic_rate, drop_users, monte_carlo_rate, mrc_moments, noise_floor, path_loss_db, rate_of,
    sinr_lb_mrc, zf_moments, Link, Method, MimoScenario, TermMoments,
};

const F_DELTA: f64 = 75e3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

type Check = fn() -> Result<Outcome>;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn config(name: &str) -> Result<ExperimentConfig> {
    let path = configs_dir().join(name);
    load_config(&path).with_context(|| format!("loading {}", path.display()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

/// Five-point central difference with relative step `1e-3`.
fn derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-3 * x;
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn closed_form_vs_null_space() -> Result<Outcome> {
    let sys = AtomicSystem::cesium_47d();
    let drive = OperatingPoint::diod_default().drive(&sys);
    let centre = drive.omega_rf;
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let w = centre * 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0);
        let numeric = steady_state_numeric(&sys, &drive.with_rf(w))?.rho21();
        let cf = rho21_resonant(drive.omega_p, drive.omega_c, w, sys.gamma2)?;
        worst = worst.max((numeric - cf).norm() / cf.norm());
    }
    outcome(
        worst <= 1e-9,
        format!("max relative error {worst:.2e} (limit 1e-9)"),
    )
}

fn derivative_chain() -> Result<Outcome> {
    let sys = AtomicSystem::cesium_47d();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut chi_err, mut p1_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let mut op = OperatingPoint::diod_default();
        op.p0 = log_uniform(&mut rng, 1e-6, 1e-3);
        op.pc = log_uniform(&mut rng, 1e-3, 1.0);
        op.p_lo = log_uniform(&mut rng, 1e-12, 1e-6);
        let d = op.drive(&sys);
        let (im, re) = chi_prime_resonant(&sys, d.omega_p, d.omega_c, d.omega_rf)?;
        ensure!(re == 0.0, "real part of the resonant derivative is {re}");
        let chi_im =
            |w: f64| chi_resonant(&sys, d.omega_p, d.omega_c, w).map_or(f64::NAN, |c| c.im);
        chi_err = chi_err.max(rel(derivative(chi_im, d.omega_rf), im));

        // ln P1 = ln P0 − A with absorption A = 2·(πd/λp)·Im χ at the LO field.
        let absorption = |o: &OperatingPoint| {
            let d = o.drive(&sys);
            chi_resonant(&sys, d.omega_p, d.omega_c, d.omega_rf)
                .map_or(f64::NAN, |c| 2.0 * sys.path_factor() * c.im)
        };
        let direct = p1_of_lo(&op, &sys)?.ln();
        ensure!(
            rel(op.p0.ln() - absorption(&op), direct) < 1e-12,
            "transmission paths disagree"
        );
        let g = ln_p1_gradient(&op, &sys)?;
        let fd_lo = -derivative(
            |x| {
                absorption(&OperatingPoint {
                    p_lo: x,
                    ..op.clone()
                })
            },
            op.p_lo,
        );
        let fd_pc = -derivative(
            |x| {
                absorption(&OperatingPoint {
                    pc: x,
                    ..op.clone()
                })
            },
            op.pc,
        );
        let fd_p0 = 1.0 / op.p0
            - derivative(
                |x| {
                    absorption(&OperatingPoint {
                        p0: x,
                        ..op.clone()
                    })
                },
                op.p0,
            );
        for (fd, an) in [(fd_lo, g.d_p_lo), (fd_pc, g.d_pc), (fd_p0, g.d_p0)] {
            p1_err = p1_err.max(rel(fd, an));
        }
    }
    outcome(
        chi_err <= 1e-6 && p1_err <= 1e-6,
        format!("chi' {chi_err:.2e}, dlnP1 {p1_err:.2e} (limit 1e-6)"),
    )
}

fn waveform_request(samples: usize, seed: u64) -> WaveformRequest {
    WaveformRequest {
        duration: samples as f64 / (16.0 * F_DELTA),
        sample_rate: 16.0 * F_DELTA,
        seed,
    }
}

fn waveform_deviation() -> Result<Outcome> {
    let sys = AtomicSystem::cesium_47d();
    let chain = DetectionChain::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for op in [
        OperatingPoint::diod_default(),
        OperatingPoint::bcod_default(),
    ] {
        let mut dev = [0.0; 3];
        for (slot, ratio) in dev.iter_mut().zip([0.0, 10.0, 20.0]) {
            let user = UserSignal::below_lo(&op, ratio, F_DELTA, 0.0);
            *slot = simulate_waveform(&op, &chain, &user, &sys, &waveform_request(3200, 1))?
                .rms_deviation();
        }
        pass &= dev[2] <= 0.01 && dev[0] > dev[1] && dev[1] > dev[2];
        parts.push(format!(
            "{}: 0/10/20 dB {:.2e}/{:.2e}/{:.2e}",
            op.scheme, dev[0], dev[1], dev[2]
        ));
    }
    outcome(
        pass,
        parts.join("; ") + " (limit 1e-2 at 20 dB, decreasing)",
    )
}

fn sn_variance() -> Result<Outcome> {
    let sys = AtomicSystem::cesium_47d();
    let chain = DetectionChain::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for op in [
        OperatingPoint::diod_default(),
        OperatingPoint::bcod_default(),
    ] {
        let gains = baseband_gains(&op, &chain, &sys)?;
        let user = UserSignal::below_lo(&op, 20.0, F_DELTA, 0.0);
        let w = simulate_waveform(&op, &chain, &user, &sys, &waveform_request(100_000, 1))?;
        let measured = band_limited_variance(&w.sn_exact, w.sample_rate, chain.bandwidth);
        let err = rel(measured, sn_variance_prediction(&gains, &chain, &user));
        pass &= err <= 0.05;
        parts.push(format!("{} {err:.2e}", op.scheme));
    }
    outcome(
        pass,
        format!("relative error {} (limit 5e-2)", parts.join(", ")),
    )
}

fn reference_weights(chain: &DetectionChain, sys: &AtomicSystem) -> NoiseWeights {
    let beta = 10f64.powf(path_loss_db(1500.0, 6.9458) / 10.0);
    NoiseWeights::derived(chain, sys, 2.0 * dbm_to_w(20.0) * beta)
}

/// Gap in dB between the grid optimum and the closed-form point.
fn optimum_gap(
    op: &OperatingPoint,
    sys: &AtomicSystem,
    cf: &ClosedFormOptimum,
    target: NoiseTarget,
    pc: bool,
) -> f64 {
    let set = |w: f64| {
        let mut o = op.clone();
        if pc {
            o.pc = w;
        } else {
            o.p_lo = w;
        }
        o
    };
    let f = |w: f64| single_noise_objective(&set(w), sys, target);
    let (lo, hi) = if pc { (1e-4, 10.0) } else { (1e-14, 1e-6) };
    let (_, best) = grid_golden_max(f, lo, hi, 2000);
    10.0 * (best / f(cf.power)).log10()
}

fn stationary_points() -> Result<Outcome> {
    let sys = AtomicSystem::cesium_47d();
    let chain = DetectionChain::default();
    let diod = OperatingPoint {
        p0: 20e-6,
        ..OperatingPoint::diod_default()
    };
    let bcod = OperatingPoint {
        p0: 20e-6,
        ..OperatingPoint::bcod_default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (op, limit) in [(&diod, 0.1), (&bcod, 0.5)] {
        let mut worst: f64 = 0.0;
        for (cf, target, pc) in [
            (optimal_pc_cn(op, &sys)?, NoiseTarget::DcShot, true),
            (optimal_plo_cn(op, &sys)?, NoiseTarget::DcShot, false),
            (optimal_pc_tn(op, &sys)?, NoiseTarget::Thermal, true),
            (optimal_plo_tn(op, &sys)?, NoiseTarget::Thermal, false),
        ] {
            ensure!(
                !cf.boundary,
                "{} optimum for {target:?} sits on the boundary",
                op.scheme
            );
            let mut at = op.clone();
            if pc {
                at.pc = cf.power;
            } else {
                at.p_lo = cf.power;
            }
            ensure!(
                at.pl == 0.0 || at.pl >= 100.0 * p1_of_lo(&at, &sys)?,
                "local beam below 100 P1"
            );
            worst = worst.max(optimum_gap(op, &sys, &cf, target, pc).abs());
        }
        pass &= worst <= limit;
        parts.push(format!(
            "{} optima within {worst:.2e} dB (limit {limit})",
            op.scheme
        ));
    }
    let weights = reference_weights(&chain, &sys);
    let bounds = FeasibleBox::default();
    for op in [
        OperatingPoint::diod_default(),
        OperatingPoint::bcod_default(),
    ] {
        let newton = newton_optimal_p0(
            &op,
            &weights,
            &sys,
            &chain,
            bounds.optical_min,
            bounds.optical_max,
        )?;
        let neg_w = |p0: f64| {
            let o = OperatingPoint { p0, ..op.clone() };
            normalized_noise(&o, &weights, &sys, &chain).map_or(f64::NEG_INFINITY, |w| -w)
        };
        let (grid, _) = grid_golden_max(neg_w, bounds.optical_min, bounds.optical_max, 2000);
        let gap = rel(newton.power, grid);
        pass &= gap <= 5e-3;
        parts.push(format!(
            "{} Newton P0 gap {gap:.2e} (limit 5e-3)",
            op.scheme
        ));
    }
    outcome(pass, parts.join("; "))
}

fn local_beam_monotone() -> Result<Outcome> {
    let sys = AtomicSystem::cesium_47d();
    let chain = DetectionChain::default();
    let weights = reference_weights(&chain, &sys);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut tested, mut violations) = (0, 0);
    while tested < 1000 {
        let mut op = OperatingPoint::bcod_default();
        op.p0 = log_uniform(&mut rng, 1e-6, 1e-1);
        op.pc = log_uniform(&mut rng, 1e-6, 1e-1);
        op.p_lo = log_uniform(&mut rng, 1e-12, 1e-6);
        op.pl = log_uniform(&mut rng, 1e-6, 1e-1);
        let p1 = p1_of_lo(&op, &sys)?;
        if chain.alpha * (1.001 * op.pl + p1) > chain.i_sat {
            continue;
        }
        tested += 1;
        let w = normalized_noise(&op, &weights, &sys, &chain)?;
        let wider = OperatingPoint {
            pl: 1.001 * op.pl,
            ..op.clone()
        };
        let w_wider = normalized_noise(&wider, &weights, &sys, &chain)?;
        let slope = normalized_noise_gradient(&op, &weights, &sys, &chain)?.d_pl;
        if !(w_wider < w && slope < 0.0) {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} of {tested} feasible points not decreasing"),
    )
}

fn synthetic_link() -> Link {
    Link {
        rho: 1.5,
        phi: Complex64::from_polar(0.7, 0.3),
        rho_sn: 0.8,
        phi_sn: Complex64::from_polar(1.0, -0.4),
        varsigma_sq: 0.4,
        sigma_sq: 0.3,
    }
}

fn moment_oracles() -> Result<Outcome> {
    let link = synthetic_link();
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, k) in [(32, 4), (100, 10)] {
        let mut sc = MimoScenario::uniform(m, k, 6.9458e9, 1.0, 1.0);
        sc.beta = (0..k)
            .map(|i| 0.4 + 0.8 * i as f64 / (k - 1) as f64)
            .collect();
        sc.p = (0..k).map(|i| 1.0 + 0.5 * (i % 3) as f64).collect();
        sc.n_realizations = 100_000;
        sc.seed = 7;
        for method in [Method::Mrc, Method::Zf] {
            let mc = monte_carlo_rate(&sc, &link, method)?;
            let cf = match method {
                Method::Mrc => mrc_moments(&sc, &link)?,
                Method::Zf => zf_moments(&sc, &link)?,
            };
            let mut worst: f64 = 0.0;
            let mut worst_sn: f64 = 0.0;
            for (u, c) in mc.users.iter().zip(&cf) {
                let e: &TermMoments = &u.moments;
                for (a, b) in [(e.ds, c.ds), (e.noise, c.noise)] {
                    worst = worst.max(rel(a, b));
                }
                match method {
                    Method::Mrc => {
                        for (a, b) in [
                            (e.ls, c.ls),
                            (e.ui, c.ui),
                            (e.sn_self, c.sn_self),
                            (e.sn_cross, c.sn_cross),
                        ] {
                            worst = worst.max(rel(a, b));
                        }
                    }
                    Method::Zf => {
                        worst = worst.max((e.ls + e.ui) / e.ds);
                        for (a, b) in [(e.sn_self, c.sn_self), (e.sn_cross, c.sn_cross)] {
                            worst_sn = worst_sn.max(rel(a, b));
                        }
                    }
                }
            }
            pass &= worst <= 0.03 && worst_sn <= 0.05;
            let sn = if method == Method::Zf {
                format!(", SN {worst_sn:.2e}")
            } else {
                String::new()
            };
            parts.push(format!("({m},{k}) {method} {worst:.2e}{sn}"));
        }
    }
    outcome(pass, parts.join("; ") + " (limit 3e-2, ZF SN 5e-2)")
}

fn scenario(cfg: &ExperimentConfig, sensors: usize, beta: &[f64], power: f64) -> MimoScenario {
    let ms = cfg.mimo.as_ref().expect("mimo block");
    let lambda = SPEED_OF_LIGHT / cfg.op.f_lo;
    MimoScenario {
        m: sensors,
        k: ms.users,
        d_s: ms.spacing_wavelengths * lambda,
        lambda_lo: lambda,
        theta_arrival: ms.arrival_angle,
        beta: beta.to_vec(),
        p: vec![power; ms.users],
        seed: cfg.seed,
        n_realizations: ms.realizations,
    }
}

fn physical_link(cfg: &ExperimentConfig) -> Result<(Link, Vec<f64>, f64)> {
    let ms = cfg.mimo.as_ref().expect("mimo block");
    let gains = baseband_gains(&cfg.op, &cfg.chain, &cfg.system)?;
    let budget = noise_budget(&cfg.op, &cfg.chain, &cfg.system, &gains)?;
    let drop = drop_users(
        ms.users,
        ms.disc_distance,
        ms.disc_radius,
        cfg.carrier * 1e-9,
        cfg.seed,
    )?;
    let floor = noise_floor(&gains, &cfg.chain, &cfg.system);
    Ok((Link::new(&gains, &budget), drop.beta, floor))
}

fn rate_bounds() -> Result<Outcome> {
    let cfg = config("default.toml")?;
    let (link, beta, _) = physical_link(&cfg)?;
    let ms = cfg.mimo.as_ref().expect("mimo block");
    ensure!(
        ms.users == 10 && ms.realizations == 10_000,
        "default config drifted"
    );
    let mut violations = Vec::new();
    let mut gaps = BTreeMap::new();
    for m in [16, 32, 64, 100, 128, 256] {
        let sc = scenario(&cfg, m, &beta, ms.user_power);
        for method in [Method::Mrc, Method::Zf] {
            let r = monte_carlo_rate(&sc, &link, method)?;
            for (k, u) in r.users.iter().enumerate() {
                if u.rate_mc + 3.0 * u.rate_se < u.bound_rate {
                    violations.push(format!("{method} M={m} user {k}"));
                }
            }
            if m == 100 {
                gaps.insert(
                    method.to_string(),
                    (r.mean_rate - r.mean_bound_rate) / r.mean_rate,
                );
            }
        }
    }
    let gap_ok = gaps.values().all(|g| *g <= 0.15);
    let gap_text: Vec<String> = gaps.iter().map(|(k, g)| format!("{k} {g:.2e}")).collect();
    outcome(
        violations.is_empty() && gap_ok,
        format!(
            "{} bound violations; gap at M=100 {} (limit 0.15)",
            violations.len(),
            gap_text.join(", ")
        ),
    )
}

fn power_scaling() -> Result<Outcome> {
    let cfg = config("power-scaling.toml")?;
    let (link, beta, floor) = physical_link(&cfg)?;
    let energy = cfg.mimo.as_ref().expect("mimo block").total_energy;
    let limits: Vec<f64> = beta
        .iter()
        .map(|&b| asymptotic_rate(floor, b, energy))
        .collect();
    let mut previous: Option<Vec<f64>> = None;
    let mut monotone = true;
    let mut last_gap: f64 = 0.0;
    for m in [64, 256, 1024, 4096] {
        let sc = scenario(&cfg, m, &beta, energy / m as f64);
        let rates: Vec<f64> = sinr_lb_mrc(&sc, &link)?.into_iter().map(rate_of).collect();
        if let Some(prev) = &previous {
            monotone &= rates
                .iter()
                .zip(prev)
                .zip(&limits)
                .all(|((r, p), l)| r > p && r <= l);
        }
        last_gap = rates
            .iter()
            .zip(&limits)
            .map(|(r, l)| rel(*r, *l))
            .fold(0.0, f64::max);
        previous = Some(rates);
    }
    outcome(
        monotone && last_gap <= 0.05,
        format!("gap to the limit at M=4096 {last_gap:.2e} (limit 5e-2), monotone {monotone}"),
    )
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Result<Vec<f64>> {
    let i = header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| anyhow!("missing column {name}"))?;
    rows.iter().map(|r| Ok(r[i].parse::<f64>()?)).collect()
}

fn crossover() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["crossover-lo.toml", "crossover-p0.toml"] {
        let cfg = config(name)?;
        let out = tmp.path().join(name);
        let artifacts = run_recipe(&cfg.with_overrides(None, None, Some(&out))?)?;
        let roots: Vec<f64> =
            serde_json::from_value(artifacts.summary["results"]["crossover"].clone())?;
        let (header, rows) = read_table(&out.join("rate_vs_parameter.csv"))?;
        let x = column(&header, &rows, &header[0])?;
        let raq = column(&header, &rows, "raq_asymptotic_rate_bps_hz")?;
        let rf = column(&header, &rows, "rf_asymptotic_rate_bps_hz")?;
        let mut crossings = Vec::new();
        for i in 1..x.len() {
            let (a, b) = (raq[i - 1] - rf[i - 1], raq[i] - rf[i]);
            if a.signum() != b.signum() {
                let t = a / (a - b);
                crossings.push((x[i - 1] + t * (x[i] - x[i - 1]), (x[i] - x[i - 1]).abs()));
            }
        }
        let matched = crossings.len() == roots.len()
            && !roots.is_empty()
            && crossings
                .iter()
                .zip(&roots)
                .all(|((c, step), r)| (c - r).abs() <= *step);
        pass &= matched;
        parts.push(format!(
            "{}: roots {:?}, curve crossings {:?}",
            header[0],
            roots.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            crossings
                .iter()
                .map(|(c, _)| format!("{c:.3}"))
                .collect::<Vec<_>>()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn csv_bytes(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path
                .file_name()
                .expect("file")
                .to_string_lossy()
                .into_owned();
            files.insert(name, fs::read(&path)?);
        }
    }
    Ok(files)
}

fn determinism() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let quick = configs_dir().join("quick");
    let mut names: Vec<PathBuf> = fs::read_dir(&quick)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    names.sort();
    let mut differing = Vec::new();
    let mut compared = 0;
    for path in &names {
        let cfg = load_config(path)?;
        let stem = path
            .file_stem()
            .expect("file")
            .to_string_lossy()
            .into_owned();
        let mut outputs = Vec::new();
        for threads in [1, 4] {
            let out = tmp.path().join(format!("{stem}-{threads}"));
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()?;
            let run = cfg.with_overrides(None, None, Some(&out))?;
            pool.install(|| run_recipe(&run))?;
            outputs.push(csv_bytes(&out)?);
        }
        ensure!(!outputs[0].is_empty(), "{stem} wrote no CSV");
        compared += outputs[0].len();
        if outputs[0] != outputs[1] {
            differing.push(stem);
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{compared} CSV files from {} recipes at 1 and 4 threads, differing: {differing:?}",
            names.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, f64, Check); 11] = [
        (
            1,
            "closed-form coherence vs null space",
            10.0,
            closed_form_vs_null_space,
        ),
        (
            2,
            "derivative chain vs finite differences",
            5.0,
            derivative_chain,
        ),
        (
            3,
            "waveform approximation deviation",
            60.0,
            waveform_deviation,
        ),
        (4, "signal-dependent noise variance", 60.0, sn_variance),
        (5, "closed-form stationary points", 120.0, stationary_points),
        (6, "local beam monotonicity", 5.0, local_beam_monotone),
        (7, "combiner term moments", 300.0, moment_oracles),
        (8, "Monte-Carlo rates vs lower bounds", 600.0, rate_bounds),
        (9, "power scaling limit", 120.0, power_scaling),
        (10, "RAQ vs RF crossover", 300.0, crossover),
        (11, "thread-count determinism", f64::INFINITY, determinism),
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (n, name, budget, check) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && secs < budget, o.detail),
            Err(e) => (false, format!("error: {e:#}")),
        };
        let budget_text = if budget.is_finite() {
            format!("{secs:.1}s < {budget:.0}s")
        } else {
            format!("{secs:.1}s")
        };
        println!(
            "criterion {n:>2} {} [{budget_text}] {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
