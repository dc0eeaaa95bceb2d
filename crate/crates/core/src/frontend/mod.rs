// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! RF to optical to voltage chain of the receiver.
//!
//! Resonant quantities are written in terms of the power-to-Rabi coefficients
//!
//! ```text
//! Ωp² = a12·P0,   a12 = μ12²/ħ² · 8ln2/(πcε0Fp²)
//! Ωc² = a23·Pc,   a23 = μ23²/ħ² · 8ln2/(πcε0Fc²)
//! Ω_LO² = a34·P_LO, a34 = μ34²/ħ² · 2/(cε0Ae)
//! ```

mod demod;
mod dump;
mod gains;
mod waveform;

pub use demod::{demodulate_iq, lowpass_taps, DemodOutput};
pub use dump::{read_waveform_dump, write_waveform_dump, WaveformDump};
pub use gains::{baseband_gains, baseband_gains_numeric, noise_budget, BasebandGains, NoiseBudget};
pub use waveform::{
    band_limited_variance, recover_baseband, simulate_waveform, sn_variance_prediction, Waveform,
    WaveformRequest,
};

use serde::{Deserialize, Serialize};

use crate::atomic::{self, AtomicSystem, Detuning, DriveConfig};
use crate::constants::{
    BOLTZMANN, ELEMENTARY_CHARGE, EPSILON_0, FREE_SPACE_IMPEDANCE, HBAR, SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Optical detection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Direct incoherent optical detection.
    Diod,
    /// Balanced coherent optical detection.
    Bcod,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Diod => "diod",
            Scheme::Bcod => "bcod",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "diod" => Ok(Scheme::Diod),
            "bcod" => Ok(Scheme::Bcod),
            other => Err(Error::invalid(
                "scheme",
                format!("unknown scheme `{other}`"),
            )),
        }
    }
}

/// Controllable powers, phases and beam geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Probe power (W).
    pub p0: f64,
    /// Coupling power (W).
    pub pc: f64,
    /// Local optical power (W), zero for DIOD.
    pub pl: f64,
    /// LO RF power collected by the aperture (W).
    pub p_lo: f64,
    pub scheme: Scheme,
    /// Probe phase (rad).
    pub phi0: f64,
    /// Local optical phase (rad).
    pub phi_l: f64,
    /// LO RF phase (rad).
    pub theta_lo: f64,
    /// LO frequency (Hz).
    pub f_lo: f64,
    /// Probe beam FWHM (m).
    pub fwhm_p: f64,
    /// Coupling beam FWHM (m).
    pub fwhm_c: f64,
    /// Effective RF aperture (m²).
    pub a_e: f64,
    pub detuning: Detuning,
}

impl OperatingPoint {
    /// Representative resonant DIOD point.
    pub fn diod_default() -> Self {
        Self {
            p0: 50e-6,
            pc: 60e-3,
            pl: 0.0,
            p_lo: 1e-10,
            scheme: Scheme::Diod,
            phi0: 0.0,
            phi_l: 0.0,
            theta_lo: 0.0,
            f_lo: 6.9458e9 - 75e3,
            fwhm_p: 1e-3,
            fwhm_c: 0.5e-3,
            a_e: 1e-4,
            detuning: Detuning::default(),
        }
    }

    /// Same point read out with a 50 mW local optical beam.
    pub fn bcod_default() -> Self {
        Self {
            pl: 50e-3,
            scheme: Scheme::Bcod,
            ..Self::diod_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p0", self.p0),
            ("pc", self.pc),
            ("pl", self.pl),
            ("p_lo", self.p_lo),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("power must be finite and >= 0, got {v}"),
                ));
            }
        }
        for (name, v) in [
            ("fwhm_p", self.fwhm_p),
            ("fwhm_c", self.fwhm_c),
            ("a_e", self.a_e),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if self.scheme == Scheme::Diod && self.pl != 0.0 {
            return Err(Error::invalid("pl", "must be 0 for DIOD"));
        }
        for (name, v) in [
            ("phi0", self.phi0),
            ("phi_l", self.phi_l),
            ("theta_lo", self.theta_lo),
            ("f_lo", self.f_lo),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Probe field amplitude U0 (V/m) at the cell input.
    pub fn probe_amplitude(&self) -> f64 {
        (8.0 * std::f64::consts::LN_2 * self.p0
            / (std::f64::consts::PI * SPEED_OF_LIGHT * EPSILON_0 * self.fwhm_p.powi(2)))
        .sqrt()
    }

    /// Power of a probe-profile beam with field amplitude `u`.
    pub fn probe_power_of(&self, u: f64) -> f64 {
        std::f64::consts::PI * SPEED_OF_LIGHT * EPSILON_0 * self.fwhm_p.powi(2) * u * u
            / (8.0 * std::f64::consts::LN_2)
    }

    /// LO field amplitude U_LO (V/m).
    pub fn lo_amplitude(&self) -> f64 {
        field_of_power(self.p_lo, self.a_e)
    }

    /// Rabi frequencies at the LO level.
    pub fn drive(&self, system: &AtomicSystem) -> DriveConfig {
        let c = Coefficients::new(system, self);
        DriveConfig {
            omega_p: (c.a12 * self.p0).sqrt(),
            omega_c: (c.a23 * self.pc).sqrt(),
            omega_rf: (c.a34 * self.p_lo).sqrt(),
            detuning: self.detuning,
        }
    }
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self::diod_default()
    }
}

/// Plane-wave field amplitude collected as power `p` over aperture `a_e`.
pub fn field_of_power(p: f64, a_e: f64) -> f64 {
    (2.0 * p / (SPEED_OF_LIGHT * EPSILON_0 * a_e)).sqrt()
}

/// Power `½cε0·A_e·U²` of a plane wave with amplitude `u`.
pub fn power_of_field(u: f64, a_e: f64) -> f64 {
    0.5 * SPEED_OF_LIGHT * EPSILON_0 * a_e * u * u
}

/// Photodetection and amplification chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    /// Amplifier power gain.
    pub gain: f64,
    /// Responsivity (A/W).
    pub alpha: f64,
    /// Load impedance (Ω).
    pub z0: f64,
    /// Detection bandwidth (Hz).
    pub bandwidth: f64,
    /// Temperature (K).
    pub temperature: f64,
    /// Photodetector saturation current (A).
    pub i_sat: f64,
    /// Shot-noise factor ς².
    pub sigma_sq_sn: f64,
}

impl DetectionChain {
    /// Responsivity `ηq/(2πħf_p)` of a detector with quantum efficiency `eta`.
    pub fn responsivity(eta: f64, lambda_p: f64) -> f64 {
        eta * ELEMENTARY_CHARGE * lambda_p / (2.0 * std::f64::consts::PI * HBAR * SPEED_OF_LIGHT)
    }

    /// Schottky factor 2qB.
    pub fn schottky(bandwidth: f64) -> f64 {
        2.0 * ELEMENTARY_CHARGE * bandwidth
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gain", self.gain),
            ("alpha", self.alpha),
            ("z0", self.z0),
            ("bandwidth", self.bandwidth),
            ("i_sat", self.i_sat),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::invalid("temperature", "must be finite and >= 0"));
        }
        if !(self.sigma_sq_sn.is_finite() && self.sigma_sq_sn >= 0.0) {
            return Err(Error::invalid("sigma_sq_sn", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Thermal noise k_B·T·B.
    pub fn thermal_power(&self) -> f64 {
        BOLTZMANN * self.temperature * self.bandwidth
    }
}

impl Default for DetectionChain {
    fn default() -> Self {
        let bandwidth = 150e3;
        Self {
            gain: 100.0,
            alpha: Self::responsivity(0.8, 852.35e-9),
            z0: FREE_SPACE_IMPEDANCE,
            bandwidth,
            temperature: 300.0,
            i_sat: 50e-3,
            sigma_sq_sn: Self::schottky(bandwidth),
        }
    }
}

/// Weak user plane wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserSignal {
    /// Field amplitude (V/m).
    pub u_x: f64,
    /// Carrier frequency (Hz).
    pub f_c: f64,
    /// Phase (rad).
    pub theta_x: f64,
}

impl UserSignal {
    /// User field `ratio_db` below the LO of `op`, beating at `f_delta`.
    pub fn below_lo(op: &OperatingPoint, ratio_db: f64, f_delta: f64, theta_x: f64) -> Self {
        Self {
            u_x: op.lo_amplitude() * 10f64.powf(-ratio_db / 20.0),
            f_c: op.f_lo + f_delta,
            theta_x,
        }
    }

    /// Received power `½cε0·A_e·U_x²` (W).
    pub fn power(&self, a_e: f64) -> f64 {
        power_of_field(self.u_x, a_e)
    }
}

/// Power-to-Rabi coefficients a12, a23, a34 ((rad/s)²/W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a12: f64,
    pub a23: f64,
    pub a34: f64,
}

impl Coefficients {
    pub fn new(system: &AtomicSystem, op: &OperatingPoint) -> Self {
        let ce = SPEED_OF_LIGHT * EPSILON_0;
        let gauss = 8.0 * std::f64::consts::LN_2 / (std::f64::consts::PI * ce);
        let h2 = HBAR * HBAR;
        Self {
            a12: system.mu12.powi(2) / h2 * gauss / op.fwhm_p.powi(2),
            a23: system.mu23.powi(2) / h2 * gauss / op.fwhm_c.powi(2),
            a34: system.mu34.powi(2) / h2 * 2.0 / (ce * op.a_e),
        }
    }
}

/// Resonant closed-form building blocks at an operating point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Resonant {
    pub c: Coefficients,
    pub u: f64,
    pub s: f64,
    pub l: f64,
    pub x0: f64,
    pub x1: f64,
    pub c0: f64,
}

impl Resonant {
    pub fn new(system: &AtomicSystem, op: &OperatingPoint) -> Self {
        let c = Coefficients::new(system, op);
        let u = c.a12 * op.p0;
        let s = c.a23 * op.pc + u;
        let l = c.a34 * op.p_lo;
        let g2 = system.gamma2;
        let common = std::f64::consts::PI * system.l_cell * system.n0 * system.mu12.powi(2) * g2
            / (EPSILON_0 * system.lambda_p);
        Self {
            c,
            u,
            s,
            l,
            x0: 4.0 * common / HBAR,
            x1: 2.0 * u * u + 2.0 * u * (l + c.a23 * op.pc) + g2 * g2 * l,
            c0: 8.0 * common * system.mu34 / (HBAR * HBAR),
        }
    }

    pub fn p1(&self, p0: f64) -> f64 {
        if self.l == 0.0 {
            return p0;
        }
        p0 * (-self.x0 * self.l / self.x1).exp()
    }

    pub fn kappa(&self) -> f64 {
        if self.l == 0.0 {
            return 0.0;
        }
        self.c0 * self.l.sqrt() * self.u * self.s / (self.x1 * self.x1)
    }
}

/// Probe field after the cell: `U_p = U0·exp(−(πd/λp)Im χ)`, `φ_p = φ0 + (πd/λp)Re χ`.
pub fn probe_output(
    u0: f64,
    chi: Complex64,
    system: &AtomicSystem,
    phi0: f64,
) -> Result<(f64, f64)> {
    if !(u0.is_finite() && u0 >= 0.0) {
        return Err(Error::invalid("u0", "must be finite and >= 0"));
    }
    let k = system.path_factor();
    Ok((u0 * (-k * chi.im).exp(), phi0 + k * chi.re))
}

/// Transmitted probe power at resonance,
/// `P1 = P0·exp(−X0·a34·P_LO/X1)`.
pub fn p1_of_lo(op: &OperatingPoint, system: &AtomicSystem) -> Result<f64> {
    if !(op.p0 > 0.0) {
        return Err(Error::invalid("p0", "probe power must be > 0"));
    }
    Ok(Resonant::new(system, op).p1(op.p0))
}

/// Transmitted probe power and phase through the numeric steady state.
pub fn probe_numeric(
    op: &OperatingPoint,
    system: &AtomicSystem,
    omega_rf: f64,
) -> Result<(f64, f64)> {
    let drive = op.drive(system).with_rf(omega_rf);
    let chi = atomic::chi_numeric(system, &drive)?;
    let (up, phi) = probe_output(op.probe_amplitude(), chi, system, op.phi0)?;
    Ok((op.probe_power_of(up), phi))
}

/// Partial derivatives of ln P1 with respect to the three powers (1/W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LnP1Gradient {
    pub d_p_lo: f64,
    pub d_pc: f64,
    pub d_p0: f64,
}

/// Analytic gradient of ln P1 at resonance.
pub fn ln_p1_gradient(op: &OperatingPoint, system: &AtomicSystem) -> Result<LnP1Gradient> {
    if !(op.p0 > 0.0) {
        return Err(Error::invalid("p0", "probe power must be > 0"));
    }
    let r = Resonant::new(system, op);
    let (a12, a23, a34) = (r.c.a12, r.c.a23, r.c.a34);
    let x1sq = r.x1 * r.x1;
    let dx1_dp0 = 4.0 * a12 * r.u + 2.0 * a12 * (r.l + a23 * op.pc);
    Ok(LnP1Gradient {
        d_p_lo: -r.x0 * a34 * (2.0 * r.u * r.u + 2.0 * r.u * a23 * op.pc) / x1sq,
        d_pc: r.x0 * r.l * 2.0 * r.u * a23 / x1sq,
        d_p0: 1.0 / op.p0 + r.x0 * r.l * dx1_dp0 / x1sq,
    })
}

/// Slope of the probe amplitude with respect to the RF field at resonance,
/// `κ = C0·√(a34P_LO)·a12P0·(a23Pc + a12P0)/X1²` (per V/m).
pub fn kappa_of_point(op: &OperatingPoint, system: &AtomicSystem) -> Result<f64> {
    if !(op.p0 > 0.0) {
        return Err(Error::invalid("p0", "probe power must be > 0"));
    }
    Ok(Resonant::new(system, op).kappa())
}

/// Normalized L2 error of the first-order envelope `U_LO + U_x cos` against
/// the exact `√(U_LO² + 2U_LO·U_x·cos + U_x²)`, sampled at 1024 points per
/// beat period over `n_periods` periods.
pub fn envelope_approx_error(ratio_db: f64, f_delta: f64, n_periods: usize) -> Result<f64> {
    if !ratio_db.is_finite() && ratio_db != f64::INFINITY {
        return Err(Error::invalid("ratio_db", "must be a number"));
    }
    if n_periods < 1 {
        return Err(Error::invalid("n_periods", "must be >= 1"));
    }
    if !(f_delta > 0.0) {
        return Err(Error::invalid("f_delta", "must be > 0"));
    }
    const PER_PERIOD: usize = 1024;
    let ux = 10f64.powf(-ratio_db / 20.0);
    let n = PER_PERIOD * n_periods;
    let dt = 1.0 / (f_delta * PER_PERIOD as f64);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let c = (std::f64::consts::TAU * f_delta * i as f64 * dt).cos();
        let exact = (1.0 + 2.0 * ux * c + ux * ux).sqrt();
        let approx = 1.0 + ux * c;
        num += (exact - approx).powi(2);
        den += exact * exact;
    }
    Ok((num / den).sqrt())
}
