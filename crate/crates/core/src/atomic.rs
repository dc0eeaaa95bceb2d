// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Four-level ladder atom |1⟩→|2⟩→|3⟩→|4⟩ driven by probe, coupling and RF fields.
//!
//! The master equation is
//!
//! ```text
//! dρ/dt = −j[H, ρ] − ½{Γ, ρ} + Λ
//! H = [[0, Ωp/2, 0, 0], [Ωp/2, Δp, Ωc/2, 0], [0, Ωc/2, Δp+Δc, Ω_RF/2],
//!      [0, 0, Ω_RF/2, Δp+Δc+Δ_RF]]
//! Γ = diag(γ, γ+γ2, γ+γ3+γc, γ+γ4)
//! Λ = diag(γ·tr ρ + γ2ρ22 + γ4ρ44, γ3ρ33, γc·ρ33, 0)
//! ```
//!
//! Density matrices are vectorized column-major, `vec(ρ)[m + 4n] = ρ[m][n]`.
//! The transit term γ repumps every level back to |1⟩ and γc acts as pure
//! dephasing of |3⟩, so the generator is exactly trace preserving.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{EPSILON_0, E_A0, HBAR};
use crate::error::{Error, Result};

/// 16×16 superoperator acting on column-major vectorized density matrices.
pub type Liouvillian = SMatrix<Complex64, 16, 16>;

const DIM: usize = 4;
/// Relative singular-value threshold for counting null-space directions.
const NULL_TOL: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-10;
const NONPHYSICAL_TOL: f64 = 1e-6;
/// Iterative-refinement passes after the LU solve.
const REFINE_STEPS: usize = 2;

#[inline]
fn vidx(m: usize, n: usize) -> usize {
    m + DIM * n
}

/// Atomic constants of the four-level scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicSystem {
    /// Probe transition dipole |1⟩→|2⟩ (C·m).
    pub mu12: f64,
    /// Coupling transition dipole |2⟩→|3⟩ (C·m).
    pub mu23: f64,
    /// RF transition dipole |3⟩→|4⟩ (C·m).
    pub mu34: f64,
    /// Spontaneous decay of |2⟩ (rad/s).
    pub gamma2: f64,
    /// Spontaneous decay of |3⟩ (rad/s).
    pub gamma3: f64,
    /// Spontaneous decay of |4⟩ (rad/s).
    pub gamma4: f64,
    /// Transit relaxation (rad/s).
    pub gamma: f64,
    /// Collisional dephasing of |3⟩ (rad/s).
    pub gamma_c: f64,
    /// Atomic density (m⁻³).
    pub n0: f64,
    /// Vapor-cell length (m).
    pub l_cell: f64,
    /// Probe wavelength (m).
    pub lambda_p: f64,
    /// EIT coherence time (s).
    pub t2: f64,
    /// Number of uncorrelated atoms in the probe volume.
    pub n_atoms: f64,
}

impl AtomicSystem {
    /// Representative cesium 6S1/2→6P3/2→47D5/2→48P3/2 constants.
    ///
    /// Only γ2 is kept; the small Rydberg and collisional rates are zero.
    pub fn cesium_47d() -> Self {
        Self {
            mu12: 2.5875 * E_A0,
            mu23: 0.0151 * E_A0,
            mu34: 1443.4554 * E_A0,
            gamma2: crate::constants::angular(5.2e6),
            gamma3: 0.0,
            gamma4: 0.0,
            gamma: 0.0,
            gamma_c: 0.0,
            n0: 4.89e16,
            l_cell: 0.02,
            lambda_p: 852.35e-9,
            t2: 1.4e-7,
            n_atoms: 7.7e8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("mu12", self.mu12),
            ("mu23", self.mu23),
            ("mu34", self.mu34),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
            ("gamma", self.gamma),
            ("gamma_c", self.gamma_c),
            ("n0", self.n0),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        for (name, v) in [
            ("l_cell", self.l_cell),
            ("lambda_p", self.lambda_p),
            ("t2", self.t2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.n_atoms.is_finite() && self.n_atoms >= 1.0) {
            return Err(Error::invalid(
                "n_atoms",
                format!("must be >= 1, got {}", self.n_atoms),
            ));
        }
        Ok(())
    }

    /// Prefactor 2N0μ12²/(ε0ħ) of the susceptibility.
    pub fn chi_scale(&self) -> f64 {
        2.0 * self.n0 * self.mu12 * self.mu12 / (EPSILON_0 * HBAR)
    }

    /// Propagation factor πd/λp.
    pub fn path_factor(&self) -> f64 {
        std::f64::consts::PI * self.l_cell / self.lambda_p
    }
}

impl Default for AtomicSystem {
    fn default() -> Self {
        Self::cesium_47d()
    }
}

/// Detunings of the three drives (rad/s).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Detuning {
    pub delta_p: f64,
    pub delta_c: f64,
    pub delta_rf: f64,
}

impl Detuning {
    pub fn is_resonant(&self) -> bool {
        self.delta_p == 0.0 && self.delta_c == 0.0 && self.delta_rf == 0.0
    }
}

/// Rabi frequencies and detunings (rad/s).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub omega_p: f64,
    pub omega_c: f64,
    pub omega_rf: f64,
    pub detuning: Detuning,
}

impl DriveConfig {
    pub fn resonant(omega_p: f64, omega_c: f64, omega_rf: f64) -> Self {
        Self {
            omega_p,
            omega_c,
            omega_rf,
            detuning: Detuning::default(),
        }
    }

    pub fn with_rf(mut self, omega_rf: f64) -> Self {
        self.omega_rf = omega_rf;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_p", self.omega_p),
            ("omega_c", self.omega_c),
            ("omega_rf", self.omega_rf),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        let d = self.detuning;
        if !(d.delta_p.is_finite() && d.delta_c.is_finite() && d.delta_rf.is_finite()) {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Matrix4<Complex64> {
        let r = |x: f64| Complex64::new(x, 0.0);
        let d = self.detuning;
        let (hp, hc, hr) = (self.omega_p / 2.0, self.omega_c / 2.0, self.omega_rf / 2.0);
        Matrix4::new(
            r(0.0),
            r(hp),
            r(0.0),
            r(0.0),
            r(hp),
            r(d.delta_p),
            r(hc),
            r(0.0),
            r(0.0),
            r(hc),
            r(d.delta_p + d.delta_c),
            r(hr),
            r(0.0),
            r(0.0),
            r(hr),
            r(d.delta_p + d.delta_c + d.delta_rf),
        )
    }
}

/// Steady-state density matrix, zero-based (`rho[(1, 0)]` is ρ21).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub rho: Matrix4<Complex64>,
}

impl DensityMatrix {
    pub fn ground() -> Self {
        let mut rho = Matrix4::zeros();
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { rho }
    }

    pub fn from_vec(v: &SVector<Complex64, 16>) -> Self {
        let mut rho = Matrix4::zeros();
        for n in 0..DIM {
            for m in 0..DIM {
                rho[(m, n)] = v[vidx(m, n)];
            }
        }
        Self { rho }
    }

    pub fn to_vec(&self) -> SVector<Complex64, 16> {
        let mut v = SVector::zeros();
        for n in 0..DIM {
            for m in 0..DIM {
                v[vidx(m, n)] = self.rho[(m, n)];
            }
        }
        v
    }

    /// Probe coherence ρ21.
    pub fn rho21(&self) -> Complex64 {
        self.rho[(1, 0)]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| self.rho[(k, k)].re)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let herm = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(self.rho - self.rho.adjoint()))
    }
}

/// Builds the superoperator `L` with `vec(dρ/dt) = L·vec(ρ)`.
pub fn build_liouvillian(system: &AtomicSystem, drive: &DriveConfig) -> Liouvillian {
    let h = drive.hamiltonian();
    let g = system.gamma;
    let decay = [
        g,
        g + system.gamma2,
        g + system.gamma3 + system.gamma_c,
        g + system.gamma4,
    ];
    let j = Complex64::new(0.0, 1.0);
    let mut l = Liouvillian::zeros();
    for n in 0..DIM {
        for m in 0..DIM {
            let row = vidx(m, n);
            for k in 0..DIM {
                // −j(Hρ)_mn
                l[(row, vidx(k, n))] -= j * h[(m, k)];
                // +j(ρH)_mn
                l[(row, vidx(m, k))] += j * h[(k, n)];
            }
            l[(row, row)] -= Complex64::new(0.5 * (decay[m] + decay[n]), 0.0);
        }
    }
    let feed = |l: &mut Liouvillian, to: usize, from: usize, rate: f64| {
        l[(vidx(to, to), vidx(from, from))] += Complex64::new(rate, 0.0);
    };
    for k in 0..DIM {
        feed(&mut l, 0, k, g);
    }
    feed(&mut l, 0, 1, system.gamma2);
    feed(&mut l, 0, 3, system.gamma4);
    feed(&mut l, 1, 2, system.gamma3);
    feed(&mut l, 2, 2, system.gamma_c);
    l
}

fn max_abs(m: &Matrix4<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn frobenius(l: &Liouvillian) -> f64 {
    l.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Sum of terms carried as an unevaluated pair `hi + lo`.
#[derive(Default)]
struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let s = self.hi + v;
        let bp = s - self.hi;
        self.lo += (self.hi - (s - bp)) + (v - bp);
        self.hi = s;
    }

    /// Adds the product `a·b` without rounding it first.
    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.add(p);
        self.lo += a.mul_add(b, -p);
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// `b − A·x` with products and sums evaluated in doubled precision.
fn compensated_residual(
    a: &Liouvillian,
    x: &SVector<Complex64, 16>,
    b: &SVector<Complex64, 16>,
) -> SVector<Complex64, 16> {
    SVector::from_fn(|i, _| {
        let (mut re, mut im) = (Compensated::default(), Compensated::default());
        re.add(b[i].re);
        im.add(b[i].im);
        for k in 0..16 {
            let (ar, ai, xr, xi) = (a[(i, k)].re, a[(i, k)].im, x[k].re, x[k].im);
            re.add_product(-ar, xr);
            re.add_product(ai, xi);
            im.add_product(-ar, xi);
            im.add_product(-ai, xr);
        }
        Complex64::new(re.value(), im.value())
    })
}

/// Dimension of the numerical null space of `L`.
pub fn null_space_dimension(l: &Liouvillian) -> usize {
    let sv = l.svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return 16;
    }
    sv.iter().filter(|&&s| s <= NULL_TOL * smax).count()
}

/// Unique physical steady state of the master equation.
///
/// One population row of `L` is replaced by the trace constraint and the
/// resulting square system is solved by LU; the result is symmetrized.
pub fn steady_state_numeric(system: &AtomicSystem, drive: &DriveConfig) -> Result<DensityMatrix> {
    system.validate()?;
    drive.validate()?;
    let l = build_liouvillian(system, drive);
    let dimension = null_space_dimension(&l);
    if dimension != 1 {
        return Err(Error::DegenerateNullSpace { dimension });
    }
    let mut a = l;
    let mut b = SVector::<Complex64, 16>::zeros();
    let row = vidx(0, 0);
    for c in 0..16 {
        a[(row, c)] = Complex64::new(0.0, 0.0);
    }
    for k in 0..DIM {
        a[(row, vidx(k, k))] = Complex64::new(1.0, 0.0);
    }
    b[row] = Complex64::new(1.0, 0.0);
    let lu = a.lu();
    let mut x = lu
        .solve(&b)
        .ok_or(Error::DegenerateNullSpace { dimension: 2 })?;
    for _ in 0..REFINE_STEPS {
        let r = compensated_residual(&a, &x, &b);
        match lu.solve(&r) {
            Some(d) => x += d,
            None => break,
        }
    }

    let mut dm = DensityMatrix::from_vec(&x);
    dm.rho = (dm.rho + dm.rho.adjoint()) * Complex64::new(0.5, 0.0);

    let scale = frobenius(&l);
    let residual = (l * dm.to_vec()).norm();
    let tolerance = RESIDUAL_TOL * scale;
    if residual > tolerance {
        return Err(Error::SolverResidual {
            residual,
            tolerance,
        });
    }
    let min_eigenvalue = dm.eigenvalues()[0];
    if min_eigenvalue < -NONPHYSICAL_TOL {
        return Err(Error::NonPhysical { min_eigenvalue });
    }
    Ok(dm)
}

/// Resonant probe coherence
/// `ρ21 = −jγ2ΩpΩ²/[(2Ωp² + γ2²)Ω² + 2Ωc²Ωp² + 2Ωp⁴]`.
pub fn rho21_resonant(omega_p: f64, omega_c: f64, omega_rf: f64, gamma2: f64) -> Result<Complex64> {
    if omega_p == 0.0 && omega_rf == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let (p2, r2) = (omega_p * omega_p, omega_rf * omega_rf);
    let den = (2.0 * p2 + gamma2 * gamma2) * r2 + 2.0 * omega_c * omega_c * p2 + 2.0 * p2 * p2;
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(Complex64::new(0.0, -gamma2 * omega_p * r2 / den))
}

/// Probe susceptibility `χ = −2N0μ12²ρ21/(ε0ħΩp)`.
pub fn susceptibility(rho21: Complex64, system: &AtomicSystem, omega_p: f64) -> Result<Complex64> {
    if omega_p == 0.0 {
        return Err(Error::ZeroProbe);
    }
    Ok(-rho21 * (system.chi_scale() / omega_p))
}

/// Resonant susceptibility as a function of the RF Rabi frequency.
pub fn chi_resonant(
    system: &AtomicSystem,
    omega_p: f64,
    omega_c: f64,
    omega_rf: f64,
) -> Result<Complex64> {
    let rho21 = rho21_resonant(omega_p, omega_c, omega_rf, system.gamma2)?;
    susceptibility(rho21, system, omega_p)
}

/// Derivative χ′ = dχ/dΩ_RF at resonance, returned as `(im, re)`.
///
/// `Im χ′ = (4N0μ12²/ε0ħ)·Ωγ2C2/(C1Ω² + C2)²` with `C1 = 2Ωp² + γ2²` and
/// `C2 = 2Ωc²Ωp² + 2Ωp⁴`; the real part vanishes.
pub fn chi_prime_resonant(
    system: &AtomicSystem,
    omega_p: f64,
    omega_c: f64,
    omega_lo: f64,
) -> Result<(f64, f64)> {
    if omega_p == 0.0 {
        return Err(Error::ZeroProbe);
    }
    let p2 = omega_p * omega_p;
    let c1 = 2.0 * p2 + system.gamma2 * system.gamma2;
    let c2 = 2.0 * omega_c * omega_c * p2 + 2.0 * p2 * p2;
    let den = c1 * omega_lo * omega_lo + c2;
    let im = 2.0 * system.chi_scale() * omega_lo * system.gamma2 * c2 / (den * den);
    Ok((im, 0.0))
}

/// Susceptibility from the numeric steady state, valid off resonance.
pub fn chi_numeric(system: &AtomicSystem, drive: &DriveConfig) -> Result<Complex64> {
    let rho = steady_state_numeric(system, drive)?;
    susceptibility(rho.rho21(), system, drive.omega_p)
}

/// Central-difference dχ/dΩ_RF from the numeric steady state.
pub fn chi_prime_numeric(
    system: &AtomicSystem,
    drive: &DriveConfig,
    rel_step: f64,
) -> Result<Complex64> {
    let h = rel_step * drive.omega_rf.max(f64::MIN_POSITIVE);
    let up = chi_numeric(system, &drive.with_rf(drive.omega_rf + h))?;
    let down = chi_numeric(system, &drive.with_rf((drive.omega_rf - h).max(0.0)))?;
    let span = drive.omega_rf + h - (drive.omega_rf - h).max(0.0);
    Ok((up - down) / span)
}
