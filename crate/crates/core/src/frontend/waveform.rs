// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain photodetector voltage with signal-dependent shot noise.
//!
//! The exact chain solves the master equation at the instantaneous envelope
//! `U_z = √(U_LO² + 2U_LO·U_x·cos(2πf_δt + θ_δ) + U_x²)` for every sample.
//! The approximate chain keeps first order in `U_x`.
//!
//! Shot noise ξ is white with per-sample variance `ς²·f_s/(2B)`, so its
//! variance inside the detection band `[−B, B]` equals ς².

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{
    baseband_gains, demodulate_iq, BasebandGains, DetectionChain, OperatingPoint, Scheme,
    UserSignal,
};
use crate::atomic::AtomicSystem;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::rng::NormalPairs;

const WEAK_LO_DB: f64 = 10.0;
const MIN_OVERSAMPLING: f64 = 16.0;
const CHUNK: usize = 2048;

/// Timing and seeding of a waveform run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformRequest {
    /// Record length (s).
    pub duration: f64,
    /// Sample rate (Hz).
    pub sample_rate: f64,
    pub seed: u64,
}

/// Sampled voltages (V) of both chains.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Waveform {
    pub sample_rate: f64,
    pub f_delta: f64,
    /// 20·log10(U_LO/U_x).
    pub ratio_db: f64,
    /// LO less than 10 dB above the user field.
    pub weak_lo: bool,
    pub time: Vec<f64>,
    /// Exact chain, signal plus noise.
    pub exact: Vec<f64>,
    /// Approximate chain, signal plus noise.
    pub approx: Vec<f64>,
    pub signal_exact: Vec<f64>,
    pub signal_approx: Vec<f64>,
    /// Exact noise minus the DC-dependent part.
    pub sn_exact: Vec<f64>,
    /// First-order user-signal-dependent noise.
    pub sn_approx: Vec<f64>,
    /// DC-dependent shot noise.
    pub cn: Vec<f64>,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// RMS(exact − approx)/RMS(exact) of the noiseless voltages.
    pub fn rms_deviation(&self) -> f64 {
        relative_rms(&self.signal_exact, &self.signal_approx, false)
    }

    /// Same as [`Self::rms_deviation`] with each record's mean removed.
    pub fn ac_rms_deviation(&self) -> f64 {
        relative_rms(&self.signal_exact, &self.signal_approx, true)
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn relative_rms(exact: &[f64], approx: &[f64], ac: bool) -> f64 {
    let (me, ma) = if ac {
        (mean(exact), mean(approx))
    } else {
        (0.0, 0.0)
    };
    let num: f64 = exact
        .iter()
        .zip(approx)
        .map(|(e, a)| ((e - me) - (a - ma)).powi(2))
        .sum();
    let den: f64 = exact.iter().map(|e| (e - me).powi(2)).sum();
    (num / den).sqrt()
}

/// Probe power and phase behind the cell for an RF Rabi frequency `omega`.
///
/// Without RF drive the undamped ladder has a degenerate steady state; the
/// continuous limit is taken at the smallest resolvable Rabi frequency.
fn probe_at(
    op: &OperatingPoint,
    system: &AtomicSystem,
    omega: f64,
    omega_lo: f64,
) -> Result<(f64, f64)> {
    let mut w = omega;
    let floor = 1e-6 * omega_lo;
    loop {
        match super::probe_numeric(op, system, w) {
            Err(Error::DegenerateNullSpace { .. }) if w < 1e-2 * omega_lo => {
                w = if w < floor { floor } else { 2.0 * w };
            }
            other => return other,
        }
    }
}

/// Simulates `V(t)` for both detection schemes.
///
/// The user field must sit at least 10 dB below the LO for the first-order
/// chain to be meaningful; weaker LOs still run and set `weak_lo`.
pub fn simulate_waveform(
    op: &OperatingPoint,
    chain: &DetectionChain,
    user: &UserSignal,
    system: &AtomicSystem,
    request: &WaveformRequest,
) -> Result<Waveform> {
    op.validate()?;
    chain.validate()?;
    system.validate()?;
    let f_delta = user.f_c - op.f_lo;
    let fs = request.sample_rate;
    if !(f_delta > 0.0) {
        return Err(Error::invalid(
            "f_c",
            "user carrier must lie above the LO frequency",
        ));
    }
    if !(fs >= MIN_OVERSAMPLING * f_delta) {
        return Err(Error::invalid(
            "sample_rate",
            format!("must be >= 16·f_delta = {}", MIN_OVERSAMPLING * f_delta),
        ));
    }
    if !(user.u_x >= 0.0 && user.u_x.is_finite()) {
        return Err(Error::invalid("u_x", "must be finite and >= 0"));
    }
    let n = (request.duration * fs).round() as usize;
    if n == 0 {
        return Err(Error::invalid("duration", "must cover at least one sample"));
    }

    let u_lo = op.lo_amplitude();
    let ratio_db = 20.0 * (u_lo / user.u_x).log10();
    let weak_lo = ratio_db < WEAK_LO_DB;
    if weak_lo {
        log::warn!(
            "LO is only {ratio_db:.1} dB above the user field; first-order model is inaccurate"
        );
    }

    let gains = baseband_gains(op, chain, system)?;
    let omega_lo = system.mu34 * u_lo / HBAR;
    let theta_delta = user.theta_x - op.theta_lo;
    let (g, a) = (chain.gain, chain.alpha);
    let noise_std = (chain.sigma_sq_sn * fs / (2.0 * chain.bandwidth)).sqrt();
    let ux = user.u_x;
    let pairs = NormalPairs::new(request.seed, 0);

    let rows: Vec<Result<Vec<[f64; 8]>>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(n - start);
            let noise = pairs.pairs(start as u64, len);
            let mut out = Vec::with_capacity(len);
            for (k, &(x1, x2)) in noise.iter().enumerate() {
                let i = start + k;
                let t = i as f64 / fs;
                let cs = (std::f64::consts::TAU * f_delta * t + theta_delta).cos();
                let uz = (u_lo * u_lo + 2.0 * u_lo * ux * cs + ux * ux)
                    .max(0.0)
                    .sqrt();
                let (p1_t, phi_p_t) = probe_at(op, system, system.mu34 * uz / HBAR, omega_lo)?;
                let (xi, cn_total_t, sig_exact, sig_approx, cn_total0) = match op.scheme {
                    Scheme::Diod => (
                        x1 * noise_std,
                        p1_t,
                        g.sqrt() * a * p1_t,
                        g.sqrt() * a * gains.p1 * (1.0 - 2.0 * gains.kappa * ux * cs),
                        gains.p1,
                    ),
                    Scheme::Bcod => {
                        let amp0 = 2.0 * a * (g * op.pl * gains.p1).sqrt();
                        (
                            (x1 - x2) * std::f64::consts::FRAC_1_SQRT_2 * noise_std,
                            op.pl + p1_t,
                            2.0 * a * (g * op.pl * p1_t).sqrt() * (op.phi_l - phi_p_t).cos(),
                            amp0 * ((op.phi_l - gains.phi_p).cos()
                                - gains.kappa2 * ux * cs * gains.varphi.cos()),
                            op.pl + gains.p1,
                        )
                    }
                };
                let current = a * cn_total_t;
                if current > chain.i_sat {
                    return Err(Error::Saturation {
                        current,
                        limit: chain.i_sat,
                    });
                }
                let noise_exact = xi * (g * a * cn_total_t).sqrt();
                let cn = xi * (g * a * cn_total0).sqrt();
                let sn_approx = -xi * (g * a).sqrt() * gains.p_sn_bar * gains.kappa * ux * cs;
                out.push([
                    t,
                    sig_exact + noise_exact,
                    sig_approx + cn + sn_approx,
                    sig_exact,
                    sig_approx,
                    noise_exact - cn,
                    sn_approx,
                    cn,
                ]);
            }
            Ok(out)
        })
        .collect();

    let mut w = Waveform {
        sample_rate: fs,
        f_delta,
        ratio_db,
        weak_lo,
        ..Waveform::default()
    };
    for chunk in rows {
        for r in chunk? {
            w.time.push(r[0]);
            w.exact.push(r[1]);
            w.approx.push(r[2]);
            w.signal_exact.push(r[3]);
            w.signal_approx.push(r[4]);
            w.sn_exact.push(r[5]);
            w.sn_approx.push(r[6]);
            w.cn.push(r[7]);
        }
    }
    Ok(w)
}

/// Variance of `x` after an ideal brick-wall filter passing `|f| ≤ bandwidth`.
pub fn band_limited_variance(x: &[f64], sample_rate: f64, bandwidth: f64) -> f64 {
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let mut energy = 0.0;
    for (k, z) in buf.iter().enumerate().skip(1) {
        let f = k.min(n - k) as f64 * sample_rate / n as f64;
        if f <= bandwidth {
            energy += z.norm_sqr();
        }
    }
    energy / (n as f64 * n as f64)
}

/// Predicted in-band variance of the user-signal-dependent noise,
/// `½·ς²·G·α·P̄_SN²·κ1²·U_x²` (V²).
pub fn sn_variance_prediction(
    gains: &BasebandGains,
    chain: &DetectionChain,
    user: &UserSignal,
) -> f64 {
    0.5 * chain.sigma_sq_sn
        * chain.gain
        * chain.alpha
        * gains.p_sn_bar.powi(2)
        * gains.kappa.powi(2)
        * user.u_x.powi(2)
}

/// Complex baseband amplitude of a detected voltage record: the mean is
/// removed, the polarity inverted (the probe dims as the field grows) and
/// the beat note demodulated and averaged after settling.
pub fn recover_baseband(v: &[f64], f_delta: f64, sample_rate: f64) -> Result<Complex64> {
    let m = if v.is_empty() { 0.0 } else { mean(v) };
    let centered: Vec<f64> = v.iter().map(|x| m - x).collect();
    Ok(demodulate_iq(&centered, f_delta, sample_rate)?.mean())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::power_of_field;

    const FD: f64 = 75e3;

    fn request(n: usize, seed: u64) -> WaveformRequest {
        WaveformRequest {
            duration: n as f64 / (16.0 * FD),
            sample_rate: 16.0 * FD,
            seed,
        }
    }

    fn sys() -> AtomicSystem {
        AtomicSystem::cesium_47d()
    }

    #[test]
    fn silent_diod_is_flat() {
        let op = OperatingPoint::diod_default();
        let chain = DetectionChain {
            sigma_sq_sn: 0.0,
            ..DetectionChain::default()
        };
        let user = UserSignal::below_lo(&op, f64::INFINITY, FD, 0.0);
        let w = simulate_waveform(&op, &chain, &user, &sys(), &request(64, 1)).unwrap();
        let p1 = super::super::p1_of_lo(&op, &sys()).unwrap();
        let level = chain.gain.sqrt() * chain.alpha * p1;
        for v in &w.exact {
            assert!((v - level).abs() < 1e-6 * level);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let op = OperatingPoint::diod_default();
        let user = UserSignal::below_lo(&op, 20.0, FD, 0.3);
        let a = simulate_waveform(
            &op,
            &DetectionChain::default(),
            &user,
            &sys(),
            &request(3000, 9),
        )
        .unwrap();
        let b = simulate_waveform(
            &op,
            &DetectionChain::default(),
            &user,
            &sys(),
            &request(3000, 9),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weak_lo_is_flagged_and_saturation_is_fatal() {
        let op = OperatingPoint::diod_default();
        let user = UserSignal::below_lo(&op, 0.0, FD, 0.0);
        let w = simulate_waveform(
            &op,
            &DetectionChain::default(),
            &user,
            &sys(),
            &request(200, 1),
        )
        .unwrap();
        assert!(w.weak_lo);
        let chain = DetectionChain {
            i_sat: 1e-6,
            ..DetectionChain::default()
        };
        let err = simulate_waveform(&op, &chain, &user, &sys(), &request(200, 1)).unwrap_err();
        assert!(matches!(err, Error::Saturation { .. }));
    }

    #[test]
    fn undersampling_is_rejected() {
        let op = OperatingPoint::diod_default();
        let user = UserSignal::below_lo(&op, 20.0, FD, 0.0);
        let mut r = request(200, 1);
        r.sample_rate = 8.0 * FD;
        assert!(simulate_waveform(&op, &DetectionChain::default(), &user, &sys(), &r).is_err());
    }

    #[test]
    fn end_to_end_amplitude_and_phase() {
        let chain = DetectionChain::default();
        for op in [
            OperatingPoint::diod_default(),
            OperatingPoint::bcod_default(),
        ] {
            let gains = baseband_gains(&op, &chain, &sys()).unwrap();
            let theta = 1.1;
            let user = UserSignal::below_lo(&op, 20.0, FD, theta);
            let w = simulate_waveform(&op, &chain, &user, &sys(), &request(4000, 1)).unwrap();
            let z = recover_baseband(&w.signal_exact, FD, w.sample_rate).unwrap();
            let expected = (gains.rho / op.a_e * power_of_field(user.u_x, op.a_e)).sqrt();
            assert!(
                (z.norm() - expected).abs() / expected < 0.01,
                "{:?}",
                op.scheme
            );
            let err = (z.arg() + op.theta_lo - theta).abs().to_degrees();
            assert!(err < 1.0);
        }
    }

    #[test]
    fn band_limited_variance_of_white_noise() {
        let xs = NormalPairs::new(2, 0).pairs(0, 1 << 15);
        let x: Vec<f64> = xs.iter().map(|p| p.0).collect();
        let v = band_limited_variance(&x, 1.0, 0.125);
        assert!((v - 0.25).abs() < 0.02);
    }
}
