// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! CODATA 2018 physical constants (SI).

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr radius (m).
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Atomic unit of dipole moment e·a0 (C·m).
pub const E_A0: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS;

/// Impedance of free space 1/(c·ε0), about 376.73 Ω.
pub const FREE_SPACE_IMPEDANCE: f64 = 1.0 / (SPEED_OF_LIGHT * EPSILON_0);

/// Converts a frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn angular(hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * hz
}
