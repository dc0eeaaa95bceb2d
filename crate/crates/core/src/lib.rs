// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Link-level model of a superheterodyne Rydberg atomic quantum receiver.
//!
//! The crate is split bottom-up:
//!
//! - [`atomic`]: four-level master equation, numeric steady state and the
//!   resonant closed forms for the probe coherence and susceptibility.
//! - [`frontend`]: RF to optical to voltage chain for direct (DIOD) and
//!   balanced coherent (BCOD) optical detection, waveform simulation with
//!   signal-dependent shot noise, baseband gains and the noise budget.
//! - [`design`]: normalized-noise functional and optimal operating points.
//! - [`mimo`]: multi-user RAQ-MIMO baseband model, MRC/ZF detection,
//!   Monte-Carlo rates and closed-form lower bounds.
//!
//! All Rabi frequencies, detunings and decay rates are angular (rad/s).

pub mod atomic;
pub mod constants;
pub mod design;
pub mod error;
pub mod frontend;
pub mod mimo;
pub mod rng;

pub use error::{Error, Result};
