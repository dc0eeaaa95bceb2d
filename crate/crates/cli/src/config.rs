// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration.
//!
//! Configs are TOML. Every physical quantity carries its unit in the key
//! name (`probe_power_uw`, `lo_power_dbm`, `carrier_ghz`, ...) and unknown
//! keys are rejected. Omitted atomic and chain keys fall back to the cesium
//! 47D ladder and the default detection chain.

use std::path::{Path, PathBuf};

use raqr_core::atomic::{AtomicSystem, Detuning};
use raqr_core::constants::{angular, BOLTZMANN, E_A0, FREE_SPACE_IMPEDANCE};
use raqr_core::frontend::{DetectionChain, OperatingPoint, Scheme};
use raqr_core::mimo::Method;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::recipes::Recipe;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl ConfigError {
    fn field(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Offending field of a validation error.
    pub fn field_name(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { field, .. } => Some(field),
            _ => None,
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub recipe: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: Option<String>,
    pub atomic: Option<RawAtomic>,
    pub operating_point: Option<RawOperatingPoint>,
    pub chain: Option<RawChain>,
    pub mimo: Option<RawMimo>,
    pub sweep: Option<RawSweep>,
    pub waveform: Option<RawWaveform>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAtomic {
    pub mu12_ea0: Option<f64>,
    pub mu23_ea0: Option<f64>,
    pub mu34_ea0: Option<f64>,
    pub gamma2_mhz: Option<f64>,
    pub gamma3_mhz: Option<f64>,
    pub gamma4_mhz: Option<f64>,
    pub gamma_mhz: Option<f64>,
    pub gamma_c_mhz: Option<f64>,
    pub density_per_m3: Option<f64>,
    pub cell_length_cm: Option<f64>,
    pub probe_wavelength_nm: Option<f64>,
    pub t2_us: Option<f64>,
    pub atom_count: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOperatingPoint {
    pub scheme: Option<String>,
    pub probe_power_uw: Option<f64>,
    pub coupling_power_mw: Option<f64>,
    pub local_optical_power_mw: Option<f64>,
    pub lo_power_dbm: Option<f64>,
    pub carrier_ghz: Option<f64>,
    pub beat_khz: Option<f64>,
    pub probe_fwhm_mm: Option<f64>,
    pub coupling_fwhm_mm: Option<f64>,
    pub effective_area_cm2: Option<f64>,
    pub probe_phase_deg: Option<f64>,
    pub local_phase_deg: Option<f64>,
    pub lo_phase_deg: Option<f64>,
    pub probe_detuning_mhz: Option<f64>,
    pub coupling_detuning_mhz: Option<f64>,
    pub rf_detuning_mhz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChain {
    pub gain: Option<f64>,
    pub quantum_efficiency: Option<f64>,
    pub impedance_ohm: Option<f64>,
    pub bandwidth_khz: Option<f64>,
    pub temperature_k: Option<f64>,
    pub saturation_ma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMimo {
    pub sensors: Option<usize>,
    pub users: Option<usize>,
    pub spacing_wavelengths: Option<f64>,
    pub arrival_angle_deg: Option<f64>,
    pub user_power_dbm: Option<f64>,
    pub total_energy_dbm: Option<f64>,
    pub disc_distance_m: Option<f64>,
    pub disc_radius_m: Option<f64>,
    pub realizations: Option<usize>,
    pub detectors: Option<Vec<String>>,
    pub rf_noise_dbm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub variable: Option<String>,
    pub scale: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWaveform {
    pub ratio_db: Option<f64>,
    pub duration_ms: Option<f64>,
    pub sample_rate_mhz: Option<f64>,
    pub user_phase_deg: Option<f64>,
    pub plot_periods: Option<f64>,
}

/// Swept quantity, in the unit named by its key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Sensors,
    RatioDb,
    ProbePowerUw,
    CouplingPowerMw,
    LoPowerDbm,
    LocalOpticalPowerMw,
    ProbeDetuningMhz,
    CouplingDetuningMhz,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 8] = [
        SweepVariable::Sensors,
        SweepVariable::RatioDb,
        SweepVariable::ProbePowerUw,
        SweepVariable::CouplingPowerMw,
        SweepVariable::LoPowerDbm,
        SweepVariable::LocalOpticalPowerMw,
        SweepVariable::ProbeDetuningMhz,
        SweepVariable::CouplingDetuningMhz,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SweepVariable::Sensors => "sensors",
            SweepVariable::RatioDb => "ratio_db",
            SweepVariable::ProbePowerUw => "probe_power_uw",
            SweepVariable::CouplingPowerMw => "coupling_power_mw",
            SweepVariable::LoPowerDbm => "lo_power_dbm",
            SweepVariable::LocalOpticalPowerMw => "local_optical_power_mw",
            SweepVariable::ProbeDetuningMhz => "probe_detuning_mhz",
            SweepVariable::CouplingDetuningMhz => "coupling_detuning_mhz",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepVariable::Sensors => "",
            SweepVariable::RatioDb => "dB",
            SweepVariable::ProbePowerUw => "uW",
            SweepVariable::CouplingPowerMw | SweepVariable::LocalOpticalPowerMw => "mW",
            SweepVariable::LoPowerDbm => "dBm",
            SweepVariable::ProbeDetuningMhz | SweepVariable::CouplingDetuningMhz => "MHz",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.key() == s)
    }

    /// Applies a swept value to the operating point.
    pub fn apply(self, op: &OperatingPoint, value: f64) -> OperatingPoint {
        let mut out = op.clone();
        match self {
            SweepVariable::ProbePowerUw => out.p0 = value * 1e-6,
            SweepVariable::CouplingPowerMw => out.pc = value * 1e-3,
            SweepVariable::LoPowerDbm => out.p_lo = dbm_to_w(value),
            SweepVariable::LocalOpticalPowerMw => out.pl = value * 1e-3,
            SweepVariable::ProbeDetuningMhz => out.detuning.delta_p = angular(value * 1e6),
            SweepVariable::CouplingDetuningMhz => out.detuning.delta_c = angular(value * 1e6),
            SweepVariable::Sensors | SweepVariable::RatioDb => {}
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub scale: Scale,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect()
    }

    /// Sweep values rounded to distinct integers, for array sizes.
    pub fn integer_values(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .values()
            .iter()
            .map(|x| x.round().max(1.0) as usize)
            .collect();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MimoSettings {
    pub sensors: usize,
    pub users: usize,
    pub spacing_wavelengths: f64,
    /// LO angle of arrival (rad).
    pub arrival_angle: f64,
    /// Per-user transmit power (W).
    pub user_power: f64,
    /// Total transmit energy E for power scaling (W).
    pub total_energy: f64,
    pub disc_distance: f64,
    pub disc_radius: f64,
    pub realizations: usize,
    pub detectors: Vec<Method>,
    /// RF-array noise variance σ²_RF (W).
    pub rf_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSettings {
    pub ratio_db: f64,
    /// Record length (s).
    pub duration: f64,
    /// Sample rate (Hz).
    pub sample_rate: f64,
    /// User phase θ_x (rad).
    pub user_phase: f64,
    /// Beat periods written to the overlay table.
    pub plot_periods: f64,
}

/// Validated experiment with SI units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub recipe: Recipe,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub system: AtomicSystem,
    pub op: OperatingPoint,
    pub chain: DetectionChain,
    /// User carrier f_c (Hz).
    pub carrier: f64,
    /// Beat frequency f_δ = f_c − f_LO (Hz).
    pub beat: f64,
    pub mimo: Option<MimoSettings>,
    pub sweep: Option<Sweep>,
    pub waveform: WaveformSettings,
    raw: RawConfig,
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

/// Parses TOML text into the raw schema.
pub fn parse_raw(src: &str) -> Result<RawConfig> {
    toml::from_str(src).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(src, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_toml(&src)
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::field(
            field,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::field(
            field,
            format!("must be finite and >= 0, got {v}"),
        ))
    }
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::field(field, "must be finite"))
    }
}

fn core_error(prefix: &str, e: raqr_core::Error) -> ConfigError {
    match e {
        raqr_core::Error::InvalidParameter { name, reason } => {
            ConfigError::field(&format!("{prefix}.{name}"), reason)
        }
        other => ConfigError::field(prefix, other.to_string()),
    }
}

fn resolve_atomic(raw: &RawAtomic) -> Result<AtomicSystem> {
    let d = AtomicSystem::cesium_47d();
    let mhz = |field: &str, v: Option<f64>, default: f64| -> Result<f64> {
        v.map_or(Ok(default), |x| {
            non_negative(field, x).map(|x| angular(x * 1e6))
        })
    };
    let dipole = |field: &str, v: Option<f64>, default: f64| -> Result<f64> {
        v.map_or(Ok(default), |x| positive(field, x).map(|x| x * E_A0))
    };
    let s = AtomicSystem {
        mu12: dipole("atomic.mu12_ea0", raw.mu12_ea0, d.mu12)?,
        mu23: dipole("atomic.mu23_ea0", raw.mu23_ea0, d.mu23)?,
        mu34: dipole("atomic.mu34_ea0", raw.mu34_ea0, d.mu34)?,
        gamma2: mhz("atomic.gamma2_mhz", raw.gamma2_mhz, d.gamma2)?,
        gamma3: mhz("atomic.gamma3_mhz", raw.gamma3_mhz, d.gamma3)?,
        gamma4: mhz("atomic.gamma4_mhz", raw.gamma4_mhz, d.gamma4)?,
        gamma: mhz("atomic.gamma_mhz", raw.gamma_mhz, d.gamma)?,
        gamma_c: mhz("atomic.gamma_c_mhz", raw.gamma_c_mhz, d.gamma_c)?,
        n0: raw
            .density_per_m3
            .map_or(Ok(d.n0), |x| positive("atomic.density_per_m3", x))?,
        l_cell: raw.cell_length_cm.map_or(Ok(d.l_cell), |x| {
            positive("atomic.cell_length_cm", x).map(|x| x * 1e-2)
        })?,
        lambda_p: raw.probe_wavelength_nm.map_or(Ok(d.lambda_p), |x| {
            positive("atomic.probe_wavelength_nm", x).map(|x| x * 1e-9)
        })?,
        t2: raw
            .t2_us
            .map_or(Ok(d.t2), |x| positive("atomic.t2_us", x).map(|x| x * 1e-6))?,
        n_atoms: raw
            .atom_count
            .map_or(Ok(d.n_atoms), |x| positive("atomic.atom_count", x))?,
    };
    s.validate().map_err(|e| core_error("atomic", e))?;
    Ok(s)
}

fn resolve_chain(raw: &RawChain, lambda_p: f64) -> Result<DetectionChain> {
    let eta = raw.quantum_efficiency.unwrap_or(0.8);
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(ConfigError::field(
            "chain.quantum_efficiency",
            "must lie in (0, 1]",
        ));
    }
    let bandwidth = raw
        .bandwidth_khz
        .map_or(Ok(150.0), |x| positive("chain.bandwidth_khz", x))?
        * 1e3;
    let c = DetectionChain {
        gain: raw.gain.map_or(Ok(100.0), |x| positive("chain.gain", x))?,
        alpha: DetectionChain::responsivity(eta, lambda_p),
        z0: raw.impedance_ohm.map_or(Ok(FREE_SPACE_IMPEDANCE), |x| {
            positive("chain.impedance_ohm", x)
        })?,
        bandwidth,
        temperature: raw
            .temperature_k
            .map_or(Ok(300.0), |x| non_negative("chain.temperature_k", x))?,
        i_sat: raw
            .saturation_ma
            .map_or(Ok(50.0), |x| positive("chain.saturation_ma", x))?
            * 1e-3,
        sigma_sq_sn: DetectionChain::schottky(bandwidth),
    };
    c.validate().map_err(|e| core_error("chain", e))?;
    Ok(c)
}

fn resolve_operating_point(raw: &RawOperatingPoint) -> Result<(OperatingPoint, f64, f64)> {
    let scheme: Scheme = raw
        .scheme
        .as_deref()
        .ok_or_else(|| ConfigError::field("scheme", "missing; expected \"diod\" or \"bcod\""))?
        .parse()
        .map_err(|_| ConfigError::field("scheme", "expected \"diod\" or \"bcod\""))?;
    let d = OperatingPoint::diod_default();
    let carrier = raw
        .carrier_ghz
        .map_or(Ok(6.9458), |x| positive("operating_point.carrier_ghz", x))?
        * 1e9;
    let beat = raw
        .beat_khz
        .map_or(Ok(75.0), |x| positive("operating_point.beat_khz", x))?
        * 1e3;
    if beat >= carrier {
        return Err(ConfigError::field(
            "operating_point.beat_khz",
            "must be below the carrier",
        ));
    }
    let pl_default = match scheme {
        Scheme::Diod => 0.0,
        Scheme::Bcod => 50.0,
    };
    let deg = |field: &str, v: Option<f64>| -> Result<f64> {
        v.map_or(Ok(0.0), |x| finite(field, x).map(f64::to_radians))
    };
    let det = |field: &str, v: Option<f64>| -> Result<f64> {
        v.map_or(Ok(0.0), |x| finite(field, x).map(|x| angular(x * 1e6)))
    };
    let op = OperatingPoint {
        p0: raw
            .probe_power_uw
            .map_or(Ok(50.0), |x| positive("operating_point.probe_power_uw", x))?
            * 1e-6,
        pc: raw.coupling_power_mw.map_or(Ok(60.0), |x| {
            non_negative("operating_point.coupling_power_mw", x)
        })? * 1e-3,
        pl: raw.local_optical_power_mw.map_or(Ok(pl_default), |x| {
            non_negative("operating_point.local_optical_power_mw", x)
        })? * 1e-3,
        p_lo: dbm_to_w(
            raw.lo_power_dbm
                .map_or(Ok(-70.0), |x| finite("operating_point.lo_power_dbm", x))?,
        ),
        scheme,
        phi0: deg("operating_point.probe_phase_deg", raw.probe_phase_deg)?,
        phi_l: deg("operating_point.local_phase_deg", raw.local_phase_deg)?,
        theta_lo: deg("operating_point.lo_phase_deg", raw.lo_phase_deg)?,
        f_lo: carrier - beat,
        fwhm_p: raw.probe_fwhm_mm.map_or(Ok(d.fwhm_p * 1e3), |x| {
            positive("operating_point.probe_fwhm_mm", x)
        })? * 1e-3,
        fwhm_c: raw.coupling_fwhm_mm.map_or(Ok(d.fwhm_c * 1e3), |x| {
            positive("operating_point.coupling_fwhm_mm", x)
        })? * 1e-3,
        a_e: raw.effective_area_cm2.map_or(Ok(d.a_e * 1e4), |x| {
            positive("operating_point.effective_area_cm2", x)
        })? * 1e-4,
        detuning: Detuning {
            delta_p: det("operating_point.probe_detuning_mhz", raw.probe_detuning_mhz)?,
            delta_c: det(
                "operating_point.coupling_detuning_mhz",
                raw.coupling_detuning_mhz,
            )?,
            delta_rf: det("operating_point.rf_detuning_mhz", raw.rf_detuning_mhz)?,
        },
    };
    if scheme == Scheme::Bcod && op.pl == 0.0 {
        return Err(ConfigError::field(
            "operating_point.local_optical_power_mw",
            "BCOD needs a local optical beam",
        ));
    }
    op.validate()
        .map_err(|e| core_error("operating_point", e))?;
    Ok((op, carrier, beat))
}

fn resolve_mimo(raw: &RawMimo, chain: &DetectionChain) -> Result<MimoSettings> {
    let sensors = raw.sensors.unwrap_or(100);
    let users = raw.users.unwrap_or(10);
    if sensors == 0 {
        return Err(ConfigError::field("mimo.sensors", "must be >= 1"));
    }
    if users == 0 {
        return Err(ConfigError::field("mimo.users", "must be >= 1"));
    }
    let disc_distance = raw
        .disc_distance_m
        .map_or(Ok(1500.0), |x| positive("mimo.disc_distance_m", x))?;
    let disc_radius = raw
        .disc_radius_m
        .map_or(Ok(50.0), |x| non_negative("mimo.disc_radius_m", x))?;
    if disc_radius >= disc_distance {
        return Err(ConfigError::field(
            "mimo.disc_radius_m",
            "disc must not contain the array",
        ));
    }
    let realizations = raw.realizations.unwrap_or(10_000);
    if realizations < 2 {
        return Err(ConfigError::field("mimo.realizations", "need at least 2"));
    }
    let names = raw
        .detectors
        .clone()
        .unwrap_or_else(|| vec!["mrc".into(), "zf".into()]);
    let mut detectors = Vec::new();
    for n in &names {
        let m = match n.as_str() {
            "mrc" => Method::Mrc,
            "zf" => Method::Zf,
            other => {
                return Err(ConfigError::field(
                    "mimo.detectors",
                    format!("unknown detector `{other}`"),
                ))
            }
        };
        if !detectors.contains(&m) {
            detectors.push(m);
        }
    }
    Ok(MimoSettings {
        sensors,
        users,
        spacing_wavelengths: raw
            .spacing_wavelengths
            .map_or(Ok(0.5), |x| positive("mimo.spacing_wavelengths", x))?,
        arrival_angle: raw
            .arrival_angle_deg
            .map_or(Ok(0.0), |x| finite("mimo.arrival_angle_deg", x))?
            .to_radians(),
        user_power: dbm_to_w(
            raw.user_power_dbm
                .map_or(Ok(20.0), |x| finite("mimo.user_power_dbm", x))?,
        ),
        total_energy: dbm_to_w(
            raw.total_energy_dbm
                .map_or(Ok(20.0), |x| finite("mimo.total_energy_dbm", x))?,
        ),
        disc_distance,
        disc_radius,
        realizations,
        detectors,
        rf_noise: raw.rf_noise_dbm.map_or_else(
            || Ok(BOLTZMANN * chain.temperature * chain.bandwidth),
            |x| finite("mimo.rf_noise_dbm", x).map(dbm_to_w),
        )?,
    })
}

fn resolve_sweep(raw: &RawSweep) -> Result<Sweep> {
    let name = raw
        .variable
        .as_deref()
        .ok_or_else(|| ConfigError::field("sweep.variable", "missing"))?;
    let variable = SweepVariable::parse(name).ok_or_else(|| {
        let known: Vec<&str> = SweepVariable::ALL.iter().map(|v| v.key()).collect();
        ConfigError::field(
            "sweep.variable",
            format!("unknown `{name}`, expected one of {known:?}"),
        )
    })?;
    let scale = match raw.scale.as_deref().unwrap_or("linear") {
        "linear" => Scale::Linear,
        "log" => Scale::Log,
        other => {
            return Err(ConfigError::field(
                "sweep.scale",
                format!("expected linear or log, got `{other}`"),
            ))
        }
    };
    let start = finite(
        "sweep.start",
        raw.start
            .ok_or_else(|| ConfigError::field("sweep.start", "missing"))?,
    )?;
    let stop = finite(
        "sweep.stop",
        raw.stop
            .ok_or_else(|| ConfigError::field("sweep.stop", "missing"))?,
    )?;
    if scale == Scale::Log {
        if !(start > 0.0) {
            return Err(ConfigError::field(
                "sweep.start",
                "log sweeps need a positive lower bound",
            ));
        }
        if !(stop > 0.0) {
            return Err(ConfigError::field(
                "sweep.stop",
                "log sweeps need a positive upper bound",
            ));
        }
    }
    if variable == SweepVariable::Sensors && !(start >= 1.0 && stop >= 1.0) {
        return Err(ConfigError::field(
            "sweep.start",
            "sensor counts must be >= 1",
        ));
    }
    Ok(Sweep {
        variable,
        scale,
        start,
        stop,
        points: raw.points.unwrap_or(11),
    })
}

fn resolve_waveform(raw: &RawWaveform, beat: f64) -> Result<WaveformSettings> {
    let sample_rate = raw.sample_rate_mhz.map_or(Ok(16.0 * beat * 1e-6), |x| {
        positive("waveform.sample_rate_mhz", x)
    })? * 1e6;
    Ok(WaveformSettings {
        ratio_db: raw
            .ratio_db
            .map_or(Ok(20.0), |x| finite("waveform.ratio_db", x))?,
        duration: raw.duration_ms.map_or(Ok(1e5 / sample_rate * 1e3), |x| {
            positive("waveform.duration_ms", x)
        })? * 1e-3,
        sample_rate,
        user_phase: raw
            .user_phase_deg
            .map_or(Ok(0.0), |x| finite("waveform.user_phase_deg", x))?
            .to_radians(),
        plot_periods: raw
            .plot_periods
            .map_or(Ok(8.0), |x| positive("waveform.plot_periods", x))?,
    })
}

impl ExperimentConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        Self::from_raw(parse_raw(src)?)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let recipe = match raw.recipe.as_deref() {
            Some(name) => name
                .parse()
                .map_err(|reason: String| ConfigError::field("recipe", reason))?,
            None => return Err(ConfigError::field("recipe", "missing")),
        };
        Self::with_recipe(raw, recipe)
    }

    fn with_recipe(mut raw: RawConfig, recipe: Recipe) -> Result<Self> {
        raw.recipe = Some(recipe.name().to_string());
        let system = resolve_atomic(&raw.atomic.clone().unwrap_or_default())?;
        let chain = resolve_chain(&raw.chain.clone().unwrap_or_default(), system.lambda_p)?;
        let op_raw = raw
            .operating_point
            .as_ref()
            .ok_or_else(|| ConfigError::field("operating_point", "block missing"))?;
        let (op, carrier, beat) = resolve_operating_point(op_raw)?;
        let mimo = raw
            .mimo
            .as_ref()
            .map(|m| resolve_mimo(m, &chain))
            .transpose()?;
        let sweep = raw.sweep.as_ref().map(resolve_sweep).transpose()?;
        let waveform = resolve_waveform(&raw.waveform.clone().unwrap_or_default(), beat)?;
        if recipe.needs_mimo() && mimo.is_none() {
            return Err(ConfigError::field(
                "mimo",
                format!("block required by recipe {}", recipe.name()),
            ));
        }
        match (&sweep, recipe.sweep_variables()) {
            (_, []) => {}
            (None, _) => {
                return Err(ConfigError::field(
                    "sweep",
                    format!("block required by recipe {}", recipe.name()),
                ))
            }
            (Some(s), allowed) => {
                if !allowed.contains(&s.variable) {
                    let names: Vec<&str> = allowed.iter().map(|v| v.key()).collect();
                    return Err(ConfigError::field(
                        "sweep.variable",
                        format!("recipe {} sweeps one of {names:?}", recipe.name()),
                    ));
                }
            }
        }
        Ok(Self {
            recipe,
            seed: raw.seed.unwrap_or(0),
            output_dir: PathBuf::from(raw.output_dir.clone().unwrap_or_else(|| "out".into())),
            system,
            op,
            chain,
            carrier,
            beat,
            mimo,
            sweep,
            waveform,
            raw,
        })
    }

    /// Replaces the recipe, seed or output directory and re-validates.
    pub fn with_overrides(
        &self,
        recipe: Option<Recipe>,
        seed: Option<u64>,
        out: Option<&Path>,
    ) -> Result<Self> {
        let mut raw = self.raw.clone();
        if let Some(s) = seed {
            raw.seed = Some(s);
        }
        if let Some(o) = out {
            raw.output_dir = Some(o.to_string_lossy().into_owned());
        }
        Self::with_recipe(raw, recipe.unwrap_or(self.recipe))
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }

    /// Canonical TOML text of the config.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.raw).expect("raw config is always serializable")
    }

    /// 64-bit fingerprint of the canonical config, as 16 hex digits. The
    /// output directory does not enter the hash.
    pub fn fingerprint(&self) -> String {
        let mut raw = self.raw.clone();
        raw.output_dir = None;
        let canonical = serde_json::to_string(&raw).expect("raw config is always serializable");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut word = [0u8; 8];
        word.copy_from_slice(&digest[..8]);
        format!("{:016x}", u64::from_be_bytes(word))
    }
}
