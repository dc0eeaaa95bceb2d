// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Complex-baseband gains and the noise budget.
//!
//! | scheme | P_G      | P̄_SN           | P̄_CN    |
//! |--------|----------|-----------------|---------|
//! | DIOD   | P1       | √P1             | P1      |
//! | BCOD   | √(Pl·P1) | P1/√(Pl + P1)   | Pl + P1 |
//!
//! with `ρ = 4GZ0α²P_G²κ²` and `ρ_SN = GZ0α·P̄_SN²·κ1²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{probe_numeric, DetectionChain, OperatingPoint, Resonant, Scheme};
use crate::atomic::{self, AtomicSystem};
use crate::constants::{BOLTZMANN, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Transfer description of the receiver at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasebandGains {
    pub scheme: Scheme,
    /// Effective power gain ρ.
    pub rho: f64,
    /// Signal-dependent noise gain ρ_SN.
    pub rho_sn: f64,
    /// Signal phase factor Φ.
    pub phi: Complex64,
    /// Shot-noise phase factor Φ_SN.
    pub phi_sn: Complex64,
    /// Amplitude slope κ1 (per V/m).
    pub kappa: f64,
    /// Phase slope of the probe (rad per V/m), zero at resonance.
    pub kappa_phase: f64,
    /// Combined BCOD slope κ2 = √(κ1² + κ_phase²).
    pub kappa2: f64,
    /// ψ = atan2(κ_phase, κ1).
    pub psi: f64,
    pub p_g: f64,
    pub p_sn_bar: f64,
    pub p_cn_bar: f64,
    /// Detection phase φ (0 for DIOD).
    pub varphi: f64,
    /// Transmitted probe power at the LO level (W).
    pub p1: f64,
    /// Probe phase at the LO level (rad).
    pub phi_p: f64,
    /// Local optical power (W).
    pub pl: f64,
}

impl BasebandGains {
    /// Slope entering ρ: κ1 for DIOD, κ2 for BCOD.
    pub fn signal_kappa(&self) -> f64 {
        match self.scheme {
            Scheme::Diod => self.kappa,
            Scheme::Bcod => self.kappa2,
        }
    }
}

fn assemble(
    op: &OperatingPoint,
    chain: &DetectionChain,
    p1: f64,
    phi_p: f64,
    kappa: f64,
    kappa_phase: f64,
) -> Result<BasebandGains> {
    let g = chain.gain;
    let a = chain.alpha;
    let z0 = chain.z0;
    let rot = Complex64::from_polar(1.0, -op.theta_lo);
    let kappa2 = kappa.hypot(kappa_phase);
    let psi = kappa_phase.atan2(kappa);
    let (p_g, p_sn_bar, p_cn_bar, varphi, k_sig) = match op.scheme {
        Scheme::Diod => (p1, p1.sqrt(), p1, 0.0, kappa),
        Scheme::Bcod => {
            if !(op.pl > 0.0) {
                return Err(Error::MissingLocalBeam);
            }
            let tot = op.pl + p1;
            (
                (op.pl * p1).sqrt(),
                p1 / tot.sqrt(),
                tot,
                op.phi_l - phi_p + psi,
                kappa2,
            )
        }
    };
    Ok(BasebandGains {
        scheme: op.scheme,
        rho: 4.0 * g * z0 * a * a * p_g * p_g * k_sig * k_sig,
        rho_sn: g * z0 * a * p_sn_bar * p_sn_bar * kappa * kappa,
        phi: rot * varphi.cos(),
        phi_sn: rot,
        kappa,
        kappa_phase,
        kappa2,
        psi,
        p_g,
        p_sn_bar,
        p_cn_bar,
        varphi,
        p1,
        phi_p,
        pl: op.pl,
    })
}

/// Baseband gains; resonant closed forms at zero detuning, numeric
/// steady state otherwise.
pub fn baseband_gains(
    op: &OperatingPoint,
    chain: &DetectionChain,
    system: &AtomicSystem,
) -> Result<BasebandGains> {
    if !op.detuning.is_resonant() {
        return baseband_gains_numeric(op, chain, system);
    }
    op.validate()?;
    chain.validate()?;
    if !(op.p0 > 0.0) {
        return Err(Error::invalid("p0", "probe power must be > 0"));
    }
    let r = Resonant::new(system, op);
    assemble(op, chain, r.p1(op.p0), op.phi0, r.kappa(), 0.0)
}

/// Baseband gains from the numeric master-equation solution, with the
/// slopes taken by central differences in the RF Rabi frequency.
pub fn baseband_gains_numeric(
    op: &OperatingPoint,
    chain: &DetectionChain,
    system: &AtomicSystem,
) -> Result<BasebandGains> {
    op.validate()?;
    chain.validate()?;
    let drive = op.drive(system);
    let (p1, phi_p) = probe_numeric(op, system, drive.omega_rf)?;
    let dchi = atomic::chi_prime_numeric(system, &drive, 1e-4)?;
    let scale = system.path_factor() * system.mu34 / HBAR;
    assemble(op, chain, p1, phi_p, scale * dchi.im, scale * dchi.re)
}

/// Noise powers at baseband (V²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    /// DC-dependent shot noise ς²GαP̄_CN.
    pub n_cn: f64,
    /// Thermal noise k_B·T·B·G.
    pub n_tn: f64,
    /// Quantum projection noise.
    pub n_qpn: f64,
    /// (N_CN + N_QPN + N_TN)/2.
    pub n_sum: f64,
    /// Complex AWGN variance σ², equal to `n_sum`.
    pub sigma_sq: f64,
    /// Shot-noise factor ς².
    pub varsigma_sq: f64,
    /// User-signal-dependent variance per unit received power, ς²ρ_SN.
    pub sn_coefficient: f64,
}

pub fn noise_budget(
    op: &OperatingPoint,
    chain: &DetectionChain,
    system: &AtomicSystem,
    gains: &BasebandGains,
) -> Result<NoiseBudget> {
    op.validate()?;
    chain.validate()?;
    system.validate()?;
    let n_cn = chain.sigma_sq_sn * chain.gain * chain.alpha * gains.p_cn_bar;
    let n_tn = BOLTZMANN * chain.temperature * chain.bandwidth * chain.gain;
    let n_qpn = gains.rho
        * SPEED_OF_LIGHT
        * EPSILON_0
        * gains.varphi.cos().powi(2)
        * chain.bandwidth
        * HBAR
        * HBAR
        / (system.n_atoms * system.t2 * system.mu34 * system.mu34);
    let n_sum = (n_cn + n_qpn + n_tn) / 2.0;
    Ok(NoiseBudget {
        n_cn,
        n_tn,
        n_qpn,
        n_sum,
        sigma_sq: n_sum,
        varsigma_sq: chain.sigma_sq_sn,
        sn_coefficient: chain.sigma_sq_sn * gains.rho_sn,
    })
}
