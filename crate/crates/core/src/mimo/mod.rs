// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Multi-user RAQ-MIMO uplink.
//!
//! ```text
//! y = √ρ·Φ·D·H·P·s + √ρ_SN·Φ_SN·B·D·H·P·s + w
//! ```
//!
//! `D = diag(e^{−j2π·m·d_s·sinϑ/λ})` is the LO phase progression across the
//! sensors, `B = diag(ξ_1..ξ_M)` holds real shot-noise draws `N(0, ς²)`
//! renewed every symbol and `w ~ CN(0, σ²I)`.

mod bounds;
mod geometry;
mod montecarlo;

pub use bounds::{
    asymptotic_rate, crossover_threshold, mrc_moments, noise_floor, rate_of, rf_baseline,
    sinr_lb_mrc, sinr_lb_zf, sinr_lb_zf_printed, zf_moments, SweepVariable, TermMoments,
};
pub use geometry::{drop_users, path_loss_db, UserDrop};
pub use montecarlo::{monte_carlo_rate, RateResult, UserRate};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::{BasebandGains, NoiseBudget};
use crate::rng;

/// Array, users and Monte-Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MimoScenario {
    /// Sensor count M.
    pub m: usize,
    /// User count K.
    pub k: usize,
    /// Sensor spacing (m).
    pub d_s: f64,
    /// LO wavelength (m).
    pub lambda_lo: f64,
    /// LO angle of arrival ϑ (rad).
    pub theta_arrival: f64,
    /// Large-scale fading β_k (linear).
    pub beta: Vec<f64>,
    /// Transmit powers p_k (W).
    pub p: Vec<f64>,
    pub seed: u64,
    pub n_realizations: usize,
}

impl MimoScenario {
    /// Half-wavelength array with identical users.
    pub fn uniform(m: usize, k: usize, f_c: f64, beta: f64, p: f64) -> Self {
        let lambda = crate::constants::SPEED_OF_LIGHT / f_c;
        Self {
            m,
            k,
            d_s: lambda / 2.0,
            lambda_lo: lambda,
            theta_arrival: 0.0,
            beta: vec![beta; k],
            p: vec![p; k],
            seed: 0,
            n_realizations: 10_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::invalid("m", "need at least one sensor"));
        }
        if self.k < 1 {
            return Err(Error::invalid("k", "need at least one user"));
        }
        if self.beta.len() != self.k || self.p.len() != self.k {
            return Err(Error::invalid("beta", "beta and p must have K entries"));
        }
        if self.beta.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::invalid(
                "beta",
                "large-scale fading must be finite and >= 0",
            ));
        }
        if self.p.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::invalid(
                "p",
                "transmit powers must be finite and >= 0",
            ));
        }
        if !(self.d_s > 0.0 && self.lambda_lo > 0.0) {
            return Err(Error::invalid("d_s", "spacing and wavelength must be > 0"));
        }
        Ok(())
    }

    /// Diagonal of D.
    pub fn steering(&self) -> Vec<Complex64> {
        let step = -std::f64::consts::TAU * self.d_s * self.theta_arrival.sin() / self.lambda_lo;
        (0..self.m)
            .map(|m| Complex64::from_polar(1.0, step * m as f64))
            .collect()
    }
}

/// Baseband link parameters seen by the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub rho: f64,
    pub phi: Complex64,
    pub rho_sn: f64,
    pub phi_sn: Complex64,
    /// Shot-noise variance ς².
    pub varsigma_sq: f64,
    /// AWGN variance σ².
    pub sigma_sq: f64,
}

impl Link {
    pub fn new(gains: &BasebandGains, budget: &NoiseBudget) -> Self {
        Self {
            rho: gains.rho,
            phi: gains.phi,
            rho_sn: gains.rho_sn,
            phi_sn: gains.phi_sn,
            varsigma_sq: budget.varsigma_sq,
            sigma_sq: budget.sigma_sq,
        }
    }

    /// Conventional RF array: unit gain, no signal-dependent noise.
    pub fn rf(sigma_rf_sq: f64) -> Self {
        Self {
            rho: 1.0,
            phi: Complex64::new(1.0, 0.0),
            rho_sn: 0.0,
            phi_sn: Complex64::new(1.0, 0.0),
            varsigma_sq: 0.0,
            sigma_sq: sigma_rf_sq,
        }
    }
}

/// Linear detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mrc,
    Zf,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Mrc => "mrc",
            Method::Zf => "zf",
        })
    }
}

/// M×K Rayleigh channel with column variances β_k.
pub fn gen_channel<R: Rng + ?Sized>(scenario: &MimoScenario, rng: &mut R) -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(scenario.m, scenario.k);
    for k in 0..scenario.k {
        let s = scenario.beta[k].sqrt();
        for m in 0..scenario.m {
            h[(m, k)] = rng::complex_normal(rng) * s;
        }
    }
    h
}

/// Draws of one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub y: DVector<Complex64>,
    pub s: Vec<Complex64>,
    /// Diagonal of B.
    pub b: Vec<f64>,
    pub w: DVector<Complex64>,
}

/// Diagonal of B for one symbol.
pub fn draw_shot<R: Rng + ?Sized>(m: usize, link: &Link, rng: &mut R) -> Vec<f64> {
    let sd = link.varsigma_sq.sqrt();
    (0..m).map(|_| sd * rng::normal(rng)).collect()
}

/// AWGN vector for one symbol.
pub fn draw_awgn<R: Rng + ?Sized>(m: usize, link: &Link, rng: &mut R) -> DVector<Complex64> {
    let ss = link.sigma_sq.sqrt();
    DVector::from_fn(m, |_, _| ss * rng::complex_normal(rng))
}

/// Received vector for symbols `s`; B and w are drawn from `rng`.
pub fn build_received<R: Rng + ?Sized>(
    h: &DMatrix<Complex64>,
    scenario: &MimoScenario,
    link: &Link,
    s: &[Complex64],
    rng: &mut R,
) -> Received {
    let b = draw_shot(scenario.m, link, rng);
    let w = draw_awgn(scenario.m, link, rng);
    let dvec = scenario.steering();
    let mut y = w.clone();
    let (sr, ssn) = (link.rho.sqrt(), link.rho_sn.sqrt());
    for m in 0..scenario.m {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..scenario.k {
            acc += h[(m, k)] * scenario.p[k].sqrt() * s[k];
        }
        let dh = dvec[m] * acc;
        y[m] += sr * link.phi * dh + ssn * link.phi_sn * b[m] * dh;
    }
    Received {
        y,
        s: s.to_vec(),
        b,
        w,
    }
}

const RANK_TOLERANCE: f64 = 1e-12;

/// Combining matrix C (M×K).
pub fn combiner(
    h: &DMatrix<Complex64>,
    scenario: &MimoScenario,
    link: &Link,
    method: Method,
) -> Result<DMatrix<Complex64>> {
    let dvec = scenario.steering();
    let a = DMatrix::from_fn(scenario.m, scenario.k, |m, k| {
        link.phi * dvec[m] * h[(m, k)]
    });
    match method {
        Method::Mrc => Ok(a),
        Method::Zf => {
            if scenario.m <= scenario.k {
                return Err(Error::DimensionError {
                    sensors: scenario.m,
                    users: scenario.k,
                });
            }
            let gram = a.adjoint() * &a;
            let scale = (0..scenario.k).map(|i| gram[(i, i)].re).fold(0.0, f64::max);
            let chol = gram.cholesky().ok_or(Error::RankDeficient)?;
            let pivot = chol
                .l_dirty()
                .diagonal()
                .iter()
                .map(|z| z.norm_sqr())
                .fold(f64::INFINITY, f64::min);
            if !(pivot > RANK_TOLERANCE * scale) {
                return Err(Error::RankDeficient);
            }
            Ok(a * chol.inverse())
        }
    }
}

/// Per-user decomposition of the decision statistic
/// `r_k = g_k·s_k + Σ_{k'≠k} UI_{k,k'}·s_k' + Σ_{k'} SN_{k,k'}·s_k' + N_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Terms {
    /// Effective gain g_k = √(ρp_k)·Φ·c_kᴴDh_k.
    pub gain: Complex64,
    /// Interference coefficients, zero at index k.
    pub ui: Vec<Complex64>,
    /// Shot-noise coefficients √(ρ_SN p_k')·Φ_SN·c_kᴴBDh_k'.
    pub sn: Vec<Complex64>,
    /// Filtered AWGN c_kᴴw.
    pub noise: Complex64,
    /// E_B|SN|² summed over k' given the channel.
    pub sn_conditional: f64,
    /// E_w|N|² = σ²‖c_k‖².
    pub noise_conditional: f64,
}

/// Decision statistics and their decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub r: Vec<Complex64>,
    pub terms: Vec<Terms>,
}

/// Decomposes every user's statistic for given B and w.
pub fn decompose(
    h: &DMatrix<Complex64>,
    c: &DMatrix<Complex64>,
    scenario: &MimoScenario,
    link: &Link,
    b: &[f64],
    w: &DVector<Complex64>,
) -> Vec<Terms> {
    let (m_n, k_n) = (scenario.m, scenario.k);
    let dvec = scenario.steering();
    let dh = DMatrix::from_fn(m_n, k_n, |m, k| dvec[m] * h[(m, k)]);
    let (sr, ssn) = (link.rho.sqrt(), link.rho_sn.sqrt());
    (0..k_n)
        .map(|k| {
            let mut ui = vec![Complex64::new(0.0, 0.0); k_n];
            let mut sn = vec![Complex64::new(0.0, 0.0); k_n];
            let mut gain = Complex64::new(0.0, 0.0);
            let mut sn_conditional = 0.0;
            for kp in 0..k_n {
                let (mut lin, mut shot, mut shot_var) =
                    (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
                for m in 0..m_n {
                    let prod = c[(m, k)].conj() * dh[(m, kp)];
                    lin += prod;
                    shot += prod * b[m];
                    shot_var += prod.norm_sqr();
                }
                let amp = scenario.p[kp].sqrt();
                if kp == k {
                    gain = sr * link.phi * amp * lin;
                } else {
                    ui[kp] = sr * link.phi * amp * lin;
                }
                sn[kp] = ssn * link.phi_sn * amp * shot;
                sn_conditional += link.rho_sn
                    * scenario.p[kp]
                    * link.phi_sn.norm_sqr()
                    * link.varsigma_sq
                    * shot_var;
            }
            let col = c.column(k);
            let noise = col
                .iter()
                .zip(w.iter())
                .map(|(ci, wi)| ci.conj() * wi)
                .sum();
            let noise_conditional = link.sigma_sq * col.iter().map(|z| z.norm_sqr()).sum::<f64>();
            Terms {
                gain,
                ui,
                sn,
                noise,
                sn_conditional,
                noise_conditional,
            }
        })
        .collect()
}

/// Applies the detector to a received vector.
pub fn detect(
    received: &Received,
    h: &DMatrix<Complex64>,
    scenario: &MimoScenario,
    link: &Link,
    method: Method,
) -> Result<Detection> {
    let c = combiner(h, scenario, link, method)?;
    let r = (c.adjoint() * &received.y).iter().copied().collect();
    let terms = decompose(h, &c, scenario, link, &received.b, &received.w);
    Ok(Detection { r, terms })
}
