// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resonant coherence undefined: probe and RF Rabi frequencies are both zero")]
    ZeroDenominator,

    #[error("susceptibility undefined for a zero probe Rabi frequency")]
    ZeroProbe,

    #[error("Liouvillian null space has dimension {dimension}, expected 1")]
    DegenerateNullSpace { dimension: usize },

    #[error("steady state is not a physical density matrix (min eigenvalue {min_eigenvalue:.3e})")]
    NonPhysical { min_eigenvalue: f64 },

    #[error("steady-state residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    SolverResidual { residual: f64, tolerance: f64 },

    #[error("photocurrent {current:.3e} A exceeds detector saturation {limit:.3e} A")]
    Saturation { current: f64, limit: f64 },

    #[error("balanced coherent detection requires a non-zero local optical beam")]
    MissingLocalBeam,

    #[error("series of {len} samples is shorter than the required {required}")]
    InsufficientLength { len: usize, required: usize },

    #[error("normalized noise diverges: slope is zero while D2 + D3 > 0")]
    DivergentNoise,

    #[error(
        "detector already saturated by the probe: I_sat/alpha = {limit:.3e} W <= P1 = {p1:.3e} W"
    )]
    SaturatedAtZero { limit: f64, p1: f64 },

    #[error("zero-forcing needs more sensors than users (M = {sensors}, K = {users})")]
    DimensionError { sensors: usize, users: usize },

    #[error("channel Gram matrix is singular")]
    RankDeficient,

    #[error("noise floor does not cross the RF-MIMO threshold on [{lo:.3e}, {hi:.3e}]")]
    NoCrossing { lo: f64, hi: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
