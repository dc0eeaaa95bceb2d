// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quadrature down-conversion of the beat note.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Stopband attenuation of the low-pass filter (dB).
const STOPBAND_DB: f64 = 80.0;
/// Beat periods discarded while the filter settles.
const SETTLING_PERIODS: f64 = 4.0;
/// Minimum record length in beat periods.
const MIN_PERIODS: f64 = 8.0;

/// Settled complex baseband samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DemodOutput {
    /// `(I + jQ)/√2` after settling.
    pub samples: Vec<Complex64>,
    /// Input index of the first output sample.
    pub start: usize,
    /// FIR length.
    pub taps: usize,
}

impl DemodOutput {
    pub fn mean(&self) -> Complex64 {
        let n = self.samples.len() as f64;
        self.samples.iter().sum::<Complex64>() / n
    }
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Kaiser-windowed linear-phase low-pass FIR with −6 dB cutoff at `f_delta/2`
/// and the stopband starting at `f_delta`. Taps sum to one.
pub fn lowpass_taps(f_delta: f64, sample_rate: f64) -> Vec<f64> {
    let transition = std::f64::consts::TAU * f_delta / sample_rate;
    let beta = 0.1102 * (STOPBAND_DB - 8.7);
    let mut n = ((STOPBAND_DB - 7.95) / (2.285 * transition)).ceil() as usize + 1;
    if n % 2 == 0 {
        n += 1;
    }
    let fc = 0.5 * f_delta / sample_rate;
    let mid = (n - 1) as f64 / 2.0;
    let norm = bessel_i0(beta);
    let mut h: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 - mid;
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                (std::f64::consts::TAU * fc * x).sin() / (std::f64::consts::PI * x)
            };
            let r = x / mid;
            sinc * bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / norm
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

/// Mixes with `2cos` and `−2sin` at `f_delta`, low-pass filters both rails
/// and returns `(I + jQ)/√2`, so `A·cos(2πf_δt + θ)` maps to `A·e^{jθ}/√2`.
pub fn demodulate_iq(v: &[f64], f_delta: f64, sample_rate: f64) -> Result<DemodOutput> {
    if !(f_delta > 0.0 && sample_rate > 0.0 && f_delta < sample_rate / 4.0) {
        return Err(Error::invalid(
            "f_delta",
            "must satisfy 0 < f_delta < sample_rate/4",
        ));
    }
    let period = sample_rate / f_delta;
    let taps = lowpass_taps(f_delta, sample_rate);
    let settle = (taps.len() - 1).max((SETTLING_PERIODS * period).ceil() as usize);
    let required = ((MIN_PERIODS * period).ceil() as usize).max(settle + 1);
    if v.len() < required {
        return Err(Error::InsufficientLength {
            len: v.len(),
            required,
        });
    }
    let w = std::f64::consts::TAU * f_delta / sample_rate;
    let (i_rail, q_rail): (Vec<f64>, Vec<f64>) = v
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let (s, c) = (w * n as f64).sin_cos();
            (2.0 * x * c, -2.0 * x * s)
        })
        .unzip();
    let filter = |rail: &[f64], n: usize| -> f64 {
        taps.iter().enumerate().map(|(k, h)| h * rail[n - k]).sum()
    };
    let samples = (settle..v.len())
        .map(|n| {
            Complex64::new(filter(&i_rail, n), filter(&q_rail, n)) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    Ok(DemodOutput {
        samples,
        start: settle,
        taps: taps.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FD: f64 = 75e3;
    const FS: f64 = 16.0 * FD;

    fn tone(a: f64, theta: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a * (std::f64::consts::TAU * FD * i as f64 / FS + theta).cos())
            .collect()
    }

    #[test]
    fn taps_are_odd_and_normalized() {
        let h = lowpass_taps(FD, FS);
        assert_eq!(h.len() % 2, 1);
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for (a, b) in h.iter().zip(h.iter().rev()) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn cosine_maps_to_amplitude_over_root_two() {
        let out = demodulate_iq(&tone(2.0, 0.0, 4000), FD, FS).unwrap();
        let target = Complex64::new(2.0 * std::f64::consts::FRAC_1_SQRT_2, 0.0);
        for z in &out.samples {
            assert!((z - target).norm() < 1e-3 * target.norm());
        }
    }

    #[test]
    fn dc_is_rejected() {
        let out = demodulate_iq(&vec![1.0; 4000], FD, FS).unwrap();
        let worst = out.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(20.0 * worst.log10() < -60.0);
    }

    #[test]
    fn phase_is_recovered() {
        for k in 0..12 {
            let theta = k as f64 * std::f64::consts::TAU / 12.0;
            let out = demodulate_iq(&tone(1.0, theta, 4000), FD, FS).unwrap();
            let err = (out.mean().arg() - theta + std::f64::consts::PI)
                .rem_euclid(std::f64::consts::TAU)
                - std::f64::consts::PI;
            assert!(err.abs().to_degrees() < 0.01);
        }
    }

    #[test]
    fn short_series_is_rejected() {
        let err = demodulate_iq(&tone(1.0, 0.0, 50), FD, FS).unwrap_err();
        assert!(matches!(err, Error::InsufficientLength { len: 50, .. }));
        assert!(demodulate_iq(&tone(1.0, 0.0, 500), FS / 3.0, FS).is_err());
    }
}
