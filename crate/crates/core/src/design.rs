// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Operating-point design at resonance.
//!
//! The normalized noise
//!
//! ```text
//! 𝒲 = D1·P̄_SN²/P_G² + D2·P̄_CN/(P_G²κ²) + D3/(P_G²κ²) + D4
//! ```
//!
//! is four times the SINR denominator divided by the desired-signal gain, so
//! `SINR = 4·β·p/𝒲` for a single interference-free link.
//!
//! Single-noise optima solve `Γ·∂lnP1/∂x + 2·∂lnκ/∂x = 0` with
//! `Γ = 1` (DIOD, DC shot noise), `Γ = 2` (DIOD, thermal),
//! `Γ = Pl/(Pl + P1)` (BCOD, DC shot noise) and `Γ = 1` (BCOD, thermal).
//! With `u = a12P0`, `S = a23Pc + u`, `L = a34P_LO`, `X2 = 2u + γ2²`:
//!
//! ```text
//! Pc*   = L(ΓX0 + √(Γ²X0² + 16X2²))/(8u·a23) − u/a23
//! P_LO* = 2uS(√X3 − ΓX0 − 2X2)/(6a34X2²),  X3 = Γ²X0² + 4ΓX0X2 + 16X2²
//! ```

use serde::{Deserialize, Serialize};

use crate::atomic::AtomicSystem;
use crate::constants::{BOLTZMANN, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::frontend::{
    baseband_gains, ln_p1_gradient, noise_budget, p1_of_lo, DetectionChain, NoiseBudget,
    OperatingPoint, Resonant, Scheme,
};

const GAMMA_TOL: f64 = 1e-8;
const GAMMA_MAX_ITER: usize = 50;
const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-10;
const MIXED_DB: f64 = 3.0;

/// Coefficients of the normalized-noise functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseWeights {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl NoiseWeights {
    /// Weights of the physical noise budget.
    ///
    /// `sn_power` is the received power driving the user-signal-dependent
    /// shot noise, in the units of the baseband signal model (2pβ for a
    /// single user on a single sensor).
    pub fn derived(chain: &DetectionChain, system: &AtomicSystem, sn_power: f64) -> Self {
        let (s2, a, z0) = (chain.sigma_sq_sn, chain.alpha, chain.z0);
        Self {
            d1: s2 / a * sn_power,
            d2: s2 / (2.0 * z0 * a),
            d3: BOLTZMANN * chain.temperature * chain.bandwidth / (2.0 * z0 * a * a),
            d4: 2.0 * SPEED_OF_LIGHT * EPSILON_0 * chain.bandwidth * HBAR * HBAR
                / (system.n_atoms * system.t2 * system.mu34 * system.mu34),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("d4", self.d4),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    name,
                    "noise weights must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            d1: self.d1 * c,
            d2: self.d2 * c,
            d3: self.d3 * c,
            d4: self.d4,
        }
    }
}

/// Scheme-dependent noise factors `(P̄_SN²/P_G², P̄_CN/(P_G²κ²), 1/(P_G²κ²))`.
fn factors(scheme: Scheme, p1: f64, pl: f64, kappa: f64) -> [f64; 3] {
    let k2 = kappa * kappa;
    match scheme {
        Scheme::Diod => [1.0 / p1, 1.0 / (p1 * k2), 1.0 / (p1 * p1 * k2)],
        Scheme::Bcod => [
            p1 / (pl * (pl + p1)),
            (pl + p1) / (pl * p1 * k2),
            1.0 / (pl * p1 * k2),
        ],
    }
}

/// 𝒲 from the scheme power factors and the signal slope κ.
pub fn noise_functional(
    weights: &NoiseWeights,
    p_g: f64,
    p_sn_bar: f64,
    p_cn_bar: f64,
    kappa: f64,
) -> Result<f64> {
    let pg2 = p_g * p_g;
    let sn = weights.d1 * p_sn_bar * p_sn_bar / pg2;
    if kappa == 0.0 {
        if weights.d2 + weights.d3 > 0.0 {
            return Err(Error::DivergentNoise);
        }
        return Ok(sn + weights.d4);
    }
    let denom = pg2 * kappa * kappa;
    Ok(sn + weights.d2 * p_cn_bar / denom + weights.d3 / denom + weights.d4)
}

/// Evaluates 𝒲 at a resonant operating point.
pub fn normalized_noise(
    op: &OperatingPoint,
    weights: &NoiseWeights,
    system: &AtomicSystem,
    chain: &DetectionChain,
) -> Result<f64> {
    weights.validate()?;
    let g = baseband_gains(op, chain, system)?;
    noise_functional(weights, g.p_g, g.p_sn_bar, g.p_cn_bar, g.signal_kappa())
}

/// Partial derivatives of 𝒲 with respect to the four powers (1/W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseGradient {
    pub d_p0: f64,
    pub d_pc: f64,
    pub d_p_lo: f64,
    /// Zero for DIOD.
    pub d_pl: f64,
}

/// Partial derivatives of ln κ with respect to (P0, Pc, P_LO).
fn ln_kappa_gradient(op: &OperatingPoint, r: &Resonant, gamma2: f64) -> [f64; 3] {
    let (a12, a23, a34) = (r.c.a12, r.c.a23, r.c.a34);
    let dx1_dp0 = 4.0 * a12 * r.u + 2.0 * a12 * (r.l + a23 * op.pc);
    let dx1_dpc = 2.0 * r.u * a23;
    let dx1_dplo = 2.0 * r.u * a34 + gamma2 * gamma2 * a34;
    [
        1.0 / op.p0 + a12 / r.s - 2.0 * dx1_dp0 / r.x1,
        a23 / r.s - 2.0 * dx1_dpc / r.x1,
        0.5 / op.p_lo - 2.0 * dx1_dplo / r.x1,
    ]
}

/// Analytic gradient of 𝒲 at a resonant operating point.
pub fn normalized_noise_gradient(
    op: &OperatingPoint,
    weights: &NoiseWeights,
    system: &AtomicSystem,
    chain: &DetectionChain,
) -> Result<NoiseGradient> {
    weights.validate()?;
    op.validate()?;
    chain.validate()?;
    if !(op.p0 > 0.0 && op.p_lo > 0.0) {
        return Err(Error::DivergentNoise);
    }
    if op.scheme == Scheme::Bcod && !(op.pl > 0.0) {
        return Err(Error::MissingLocalBeam);
    }
    let r = Resonant::new(system, op);
    let p1 = r.p1(op.p0);
    let kappa = r.kappa();
    let f = factors(op.scheme, p1, op.pl, kappa);
    let dl = ln_p1_gradient(op, system)?;
    let dlp1 = [dl.d_p0, dl.d_pc, dl.d_p_lo];
    let dlk = ln_kappa_gradient(op, &r, system.gamma2);
    let w = [weights.d1, weights.d2, weights.d3];
    let mut grad = [0.0; 3];
    for i in 0..3 {
        let dlog = match op.scheme {
            Scheme::Diod => [
                -dlp1[i],
                -dlp1[i] - 2.0 * dlk[i],
                -2.0 * dlp1[i] - 2.0 * dlk[i],
            ],
            Scheme::Bcod => {
                let share = op.pl / (op.pl + p1);
                [
                    dlp1[i] * share,
                    -dlp1[i] * share - 2.0 * dlk[i],
                    -dlp1[i] - 2.0 * dlk[i],
                ]
            }
        };
        grad[i] = (0..3).map(|t| w[t] * f[t] * dlog[t]).sum();
    }
    let d_pl = match op.scheme {
        Scheme::Diod => 0.0,
        Scheme::Bcod => {
            let (pl, tot) = (op.pl, op.pl + p1);
            w[0] * f[0] * (-1.0 / pl - 1.0 / tot)
                + w[1] * f[1] * (1.0 / tot - 1.0 / pl)
                + w[2] * f[2] * (-1.0 / pl)
        }
    };
    Ok(NoiseGradient {
        d_p0: grad[0],
        d_pc: grad[1],
        d_p_lo: grad[2],
        d_pl,
    })
}

/// Optimal local optical power `min(Pl_max, I_sat/α − P1)`.
pub fn optimal_pl(chain: &DetectionChain, p1_at_lo: f64, pl_max: f64) -> Result<f64> {
    let limit = chain.i_sat / chain.alpha;
    if limit <= p1_at_lo {
        return Err(Error::SaturatedAtZero {
            limit,
            p1: p1_at_lo,
        });
    }
    Ok(pl_max.min(limit - p1_at_lo))
}

/// Closed-form stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormOptimum {
    /// Optimal power (W), clamped at zero.
    pub power: f64,
    /// The unclamped formula was negative.
    pub boundary: bool,
    /// Γ used in the formula.
    pub gamma: f64,
    /// Γ fixed-point iterations (0 when Γ is fixed).
    pub iterations: usize,
}

/// Which single-noise objective a stationary point targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseTarget {
    /// DC-dependent shot noise, maximize P_G²κ²/P̄_CN.
    DcShot,
    /// Thermal noise, maximize P_G²κ².
    Thermal,
}

/// Objective maximized by the closed forms: `P_G²κ²/P̄_CN` or `P_G²κ²`.
pub fn single_noise_objective(
    op: &OperatingPoint,
    system: &AtomicSystem,
    target: NoiseTarget,
) -> f64 {
    let r = Resonant::new(system, op);
    let p1 = r.p1(op.p0);
    let k2 = r.kappa().powi(2);
    let pg2 = match op.scheme {
        Scheme::Diod => p1 * p1,
        Scheme::Bcod => op.pl * p1,
    };
    match (target, op.scheme) {
        (NoiseTarget::Thermal, _) => pg2 * k2,
        (NoiseTarget::DcShot, Scheme::Diod) => pg2 * k2 / p1,
        (NoiseTarget::DcShot, Scheme::Bcod) => pg2 * k2 / (op.pl + p1),
    }
}

fn pc_formula(op: &OperatingPoint, system: &AtomicSystem, gamma: f64) -> f64 {
    let r = Resonant::new(system, op);
    let x2 = 2.0 * r.u + system.gamma2.powi(2);
    let gx = gamma * r.x0;
    r.l * (gx + (gx * gx + 16.0 * x2 * x2).sqrt()) / (8.0 * r.u * r.c.a23) - r.u / r.c.a23
}

fn plo_formula(op: &OperatingPoint, system: &AtomicSystem, gamma: f64) -> f64 {
    let r = Resonant::new(system, op);
    let x2 = 2.0 * r.u + system.gamma2.powi(2);
    let gx = gamma * r.x0;
    let x3 = gx * gx + 4.0 * gx * x2 + 16.0 * x2 * x2;
    let w = 2.0 * r.u * r.s;
    w * (x3.sqrt() - gx - 2.0 * x2) / (6.0 * r.c.a34 * x2 * x2)
}

fn solve_gamma(
    op: &OperatingPoint,
    system: &AtomicSystem,
    target: NoiseTarget,
    formula: fn(&OperatingPoint, &AtomicSystem, f64) -> f64,
    apply: fn(&mut OperatingPoint, f64),
) -> Result<ClosedFormOptimum> {
    op.validate()?;
    if !(op.p0 > 0.0) {
        return Err(Error::invalid("p0", "probe power must be > 0"));
    }
    let finish = |raw: f64, gamma: f64, iterations: usize| ClosedFormOptimum {
        power: raw.max(0.0),
        boundary: raw < 0.0,
        gamma,
        iterations,
    };
    match (op.scheme, target) {
        (Scheme::Diod, NoiseTarget::DcShot) | (Scheme::Bcod, NoiseTarget::Thermal) => {
            Ok(finish(formula(op, system, 1.0), 1.0, 0))
        }
        (Scheme::Diod, NoiseTarget::Thermal) => Ok(finish(formula(op, system, 2.0), 2.0, 0)),
        (Scheme::Bcod, NoiseTarget::DcShot) => {
            if !(op.pl > 0.0) {
                return Err(Error::MissingLocalBeam);
            }
            let mut gamma = 1.0;
            let mut trial = op.clone();
            for it in 1..=GAMMA_MAX_ITER {
                let raw = formula(op, system, gamma);
                apply(&mut trial, raw.max(0.0));
                let p1 = p1_of_lo(&trial, system)?;
                let next = op.pl / (op.pl + p1);
                let done = (next - gamma).abs() <= GAMMA_TOL * gamma;
                gamma = next;
                if done || it == GAMMA_MAX_ITER {
                    if !done {
                        log::warn!("Γ fixed point stopped after {it} iterations");
                    }
                    return Ok(finish(formula(op, system, gamma), gamma, it));
                }
            }
            unreachable!("loop returns on its last iteration")
        }
    }
}

/// Optimal coupling power for the DC-shot-noise objective.
pub fn optimal_pc_cn(op: &OperatingPoint, system: &AtomicSystem) -> Result<ClosedFormOptimum> {
    solve_gamma(op, system, NoiseTarget::DcShot, pc_formula, |o, v| o.pc = v)
}

/// Optimal LO power for the DC-shot-noise objective.
pub fn optimal_plo_cn(op: &OperatingPoint, system: &AtomicSystem) -> Result<ClosedFormOptimum> {
    solve_gamma(op, system, NoiseTarget::DcShot, plo_formula, |o, v| {
        o.p_lo = v
    })
}

/// Optimal coupling power for the thermal-noise objective.
pub fn optimal_pc_tn(op: &OperatingPoint, system: &AtomicSystem) -> Result<ClosedFormOptimum> {
    solve_gamma(op, system, NoiseTarget::Thermal, pc_formula, |o, v| {
        o.pc = v
    })
}

/// Optimal LO power for the thermal-noise objective.
pub fn optimal_plo_tn(op: &OperatingPoint, system: &AtomicSystem) -> Result<ClosedFormOptimum> {
    solve_gamma(op, system, NoiseTarget::Thermal, plo_formula, |o, v| {
        o.p_lo = v
    })
}

/// Outcome of a one-dimensional stationary-point search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationary {
    pub x: f64,
    pub value: f64,
    pub derivative: f64,
    pub iterations: usize,
    /// The bracket held no sign change and an endpoint was returned.
    pub boundary: bool,
    /// Newton steps were replaced by bisection at least once.
    pub bisected: bool,
}

/// Minimizes `f` on `[lo, hi]` by driving its derivative to zero.
///
/// `f(x)` returns `(value, derivative)`. Newton iterates in `ln x` with a
/// finite-difference second derivative and falls back to bisection whenever
/// a step leaves the sign-change bracket. Converges when
/// `|x·f′(x)| ≤ 1e−10·|f(x)|`.
pub fn minimize_stationary<F>(f: F, lo: f64, hi: f64) -> Result<Stationary>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid("bracket", "need 0 < lo < hi"));
    }
    // g(s) = x·f′(x) with x = e^s.
    let g = |s: f64| -> Result<(f64, f64)> {
        let x = s.exp();
        let (v, d) = f(x)?;
        Ok((x * d, v))
    };
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (ga, va) = g(a)?;
    let (gb, vb) = g(b)?;
    if ga.signum() == gb.signum() {
        let (s, v) = if va <= vb { (a, va) } else { (b, vb) };
        let x = s.exp();
        return Ok(Stationary {
            x,
            value: v,
            derivative: f(x)?.1,
            iterations: 0,
            boundary: true,
            bisected: false,
        });
    }
    let increasing = gb > 0.0;
    let mut s = 0.5 * (a + b);
    let mut bisected = false;
    for it in 1..=NEWTON_MAX_ITER {
        let (gs, vs) = g(s)?;
        if gs.abs() <= NEWTON_TOL * vs.abs() {
            let x = s.exp();
            return Ok(Stationary {
                x,
                value: vs,
                derivative: gs / x,
                iterations: it,
                boundary: false,
                bisected,
            });
        }
        if (gs > 0.0) == increasing {
            b = s;
        } else {
            a = s;
        }
        let h = 1e-6 * (b - a).max(1e-9);
        let slope = (g(s + h)?.0 - g(s - h)?.0) / (2.0 * h);
        let step = s - gs / slope;
        s = if slope.is_finite() && slope != 0.0 && step > a && step < b {
            step
        } else {
            bisected = true;
            0.5 * (a + b)
        };
    }
    let x = s.exp();
    let (v, d) = f(x)?;
    log::warn!("stationary search hit {NEWTON_MAX_ITER} iterations");
    Ok(Stationary {
        x,
        value: v,
        derivative: d,
        iterations: NEWTON_MAX_ITER,
        boundary: false,
        bisected: true,
    })
}

/// Dominant noise contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    UserSignalDependent,
    DcShot,
    Thermal,
    Mixed,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::UserSignalDependent => "user-signal-dependent",
            Regime::DcShot => "dc-shot",
            Regime::Thermal => "thermal",
            Regime::Mixed => "mixed",
        })
    }
}

/// Classifies the dominant baseband noise term.
///
/// Compares `sn_term` with the shot and thermal shares `N_CN/2` and `N_TN/2`
/// of σ²; the result is `Mixed` when the two largest are within 3 dB.
pub fn classify_regime(budget: &NoiseBudget, sn_term: f64) -> Regime {
    let mut terms = [
        (sn_term, Regime::UserSignalDependent),
        (budget.n_cn / 2.0, Regime::DcShot),
        (budget.n_tn / 2.0, Regime::Thermal),
    ];
    terms.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (top, second) = (terms[0].0, terms[1].0);
    if top <= 0.0 || top <= second * 10f64.powf(MIXED_DB / 10.0) {
        Regime::Mixed
    } else {
        terms[0].1
    }
}

/// Outcome of the probe-power search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    /// Optimal power (W).
    pub power: f64,
    pub regime: Regime,
    /// 𝒲 at the returned point.
    pub w: f64,
    pub iterations: usize,
    /// |∂𝒲/∂P0| at the returned point.
    pub residual: f64,
    pub boundary: bool,
    pub bisected: bool,
}

/// Default feasible ranges (W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleBox {
    pub optical_min: f64,
    pub optical_max: f64,
    pub lo_min: f64,
    pub lo_max: f64,
}

impl Default for FeasibleBox {
    fn default() -> Self {
        Self {
            optical_min: 1e-6,
            optical_max: 100e-3,
            lo_min: 1e-12,
            lo_max: 1e-6,
        }
    }
}

/// Minimizes 𝒲 over the probe power on `[p0_min, p0_max]` by Newton's method
/// on `∂𝒲/∂P0 = 0`.
pub fn newton_optimal_p0(
    op: &OperatingPoint,
    weights: &NoiseWeights,
    system: &AtomicSystem,
    chain: &DetectionChain,
    p0_min: f64,
    p0_max: f64,
) -> Result<DesignResult> {
    let eval = |p0: f64| -> Result<(f64, f64)> {
        let mut trial = op.clone();
        trial.p0 = p0;
        let w = normalized_noise(&trial, weights, system, chain)?;
        let g = normalized_noise_gradient(&trial, weights, system, chain)?;
        Ok((w, g.d_p0))
    };
    let st = minimize_stationary(eval, p0_min, p0_max)?;
    let mut at = op.clone();
    at.p0 = st.x;
    let regime = regime_at(
        &at,
        system,
        chain,
        weights.d1 * chain.alpha / chain.sigma_sq_sn.max(f64::MIN_POSITIVE),
    )?;
    Ok(DesignResult {
        power: st.x,
        regime,
        w: st.value,
        iterations: st.iterations,
        residual: st.derivative.abs(),
        boundary: st.boundary,
        bisected: st.bisected,
    })
}

/// Regime of an operating point receiving `sn_power` of user signal.
pub fn regime_at(
    op: &OperatingPoint,
    system: &AtomicSystem,
    chain: &DetectionChain,
    sn_power: f64,
) -> Result<Regime> {
    let g = baseband_gains(op, chain, system)?;
    let b = noise_budget(op, chain, system, &g)?;
    Ok(classify_regime(&b, b.sn_coefficient * sn_power))
}

/// One row of the sensitivity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub parameter: String,
    pub w_minus_10pct: f64,
    pub w_nominal: f64,
    pub w_plus_10pct: f64,
}

/// Optima per noise target and scheme-appropriate Pl.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub scheme: Scheme,
    pub regime: Regime,
    pub w: f64,
    pub pc_cn: ClosedFormOptimum,
    pub p_lo_cn: ClosedFormOptimum,
    pub pc_tn: ClosedFormOptimum,
    pub p_lo_tn: ClosedFormOptimum,
    pub pl_opt: Option<f64>,
    pub p0_newton: DesignResult,
    pub sensitivity: Vec<Sensitivity>,
}

/// Collects every design quantity at an operating point.
pub fn design_report(
    op: &OperatingPoint,
    system: &AtomicSystem,
    chain: &DetectionChain,
    sn_power: f64,
    bounds: &FeasibleBox,
) -> Result<DesignReport> {
    let weights = NoiseWeights::derived(chain, system, sn_power);
    let w = normalized_noise(op, &weights, system, chain)?;
    let pl_opt = match op.scheme {
        Scheme::Diod => None,
        Scheme::Bcod => Some(optimal_pl(
            chain,
            p1_of_lo(op, system)?,
            bounds.optical_max,
        )?),
    };
    let mut sensitivity = Vec::new();
    let knobs: [(&str, fn(&mut OperatingPoint) -> &mut f64); 4] = [
        ("p0", |o| &mut o.p0),
        ("pc", |o| &mut o.pc),
        ("p_lo", |o| &mut o.p_lo),
        ("pl", |o| &mut o.pl),
    ];
    for (name, field) in knobs {
        if name == "pl" && op.scheme == Scheme::Diod {
            continue;
        }
        let at = |scale: f64| -> Result<f64> {
            let mut o = op.clone();
            *field(&mut o) *= scale;
            normalized_noise(&o, &weights, system, chain)
        };
        sensitivity.push(Sensitivity {
            parameter: name.to_string(),
            w_minus_10pct: at(0.9)?,
            w_nominal: w,
            w_plus_10pct: at(1.1)?,
        });
    }
    Ok(DesignReport {
        scheme: op.scheme,
        regime: regime_at(op, system, chain, sn_power)?,
        w,
        pc_cn: optimal_pc_cn(op, system)?,
        p_lo_cn: optimal_plo_cn(op, system)?,
        pc_tn: optimal_pc_tn(op, system)?,
        p_lo_tn: optimal_plo_tn(op, system)?,
        pl_opt,
        p0_newton: newton_optimal_p0(
            op,
            &weights,
            system,
            chain,
            bounds.optical_min,
            bounds.optical_max,
        )?,
        sensitivity,
    })
}

/// Log-spaced grid scan followed by golden-section refinement of the best
/// bracket. Returns `(argmax, max)`.
pub fn grid_golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let n = points.max(3);
    let (la, lb) = (lo.ln(), hi.ln());
    let at = |i: usize| la + (lb - la) * i as f64 / (n - 1) as f64;
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f(at(i).exp());
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(n - 1)));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d.exp());
        }
    }
    let x = (0.5 * (a + b)).exp();
    let v = f(x);
    if v >= best_v {
        (x, v)
    } else {
        (at(best).exp(), best_v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::power_of_field;
    use rand::{Rng, SeedableRng};

    fn sys() -> AtomicSystem {
        AtomicSystem::cesium_47d()
    }

    fn weights() -> NoiseWeights {
        NoiseWeights::derived(&DetectionChain::default(), &sys(), 1e-14)
    }

    #[test]
    fn qpn_only_is_constant() {
        let w = NoiseWeights {
            d1: 0.0,
            d2: 0.0,
            d3: 0.0,
            d4: 2.5,
        };
        for op in [
            OperatingPoint::diod_default(),
            OperatingPoint::bcod_default(),
        ] {
            assert_eq!(
                normalized_noise(&op, &w, &sys(), &DetectionChain::default()).unwrap(),
                2.5
            );
        }
    }

    #[test]
    fn homogeneous_in_gain_power() {
        let w = NoiseWeights {
            d4: 0.0,
            ..weights()
        };
        let base = noise_functional(&w, 3e-5, 2e-3, 5e-2, 40.0).unwrap();
        let doubled = noise_functional(&w, 6e-5, 2e-3, 5e-2, 40.0).unwrap();
        assert!((doubled - base / 4.0).abs() < 1e-14 * base);
    }

    #[test]
    fn zero_lo_diverges() {
        let mut op = OperatingPoint::diod_default();
        op.p_lo = 0.0;
        let err =
            normalized_noise(&op, &weights(), &sys(), &DetectionChain::default()).unwrap_err();
        assert_eq!(err, Error::DivergentNoise);
    }

    #[test]
    fn weights_reproduce_single_link_sinr() {
        let chain = DetectionChain::default();
        let s = sys();
        let op = OperatingPoint::diod_default();
        let g = baseband_gains(&op, &chain, &s).unwrap();
        let b = noise_budget(&op, &chain, &s, &g).unwrap();
        let (p, beta) = (0.1, 1e-11);
        let w = NoiseWeights::derived(&chain, &s, 2.0 * p * beta);
        let calw = normalized_noise(&op, &w, &s, &chain).unwrap();
        let phi2 = g.phi.norm_sqr();
        let den = b.varsigma_sq * g.rho_sn * 2.0 * p * beta + b.sigma_sq;
        let sinr = g.rho * p * phi2 * beta / den;
        assert!((sinr - 4.0 * p * beta / calw).abs() < 1e-10 * sinr);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let chain = DetectionChain::default();
        let s = sys();
        let w = weights();
        for op in [
            OperatingPoint::diod_default(),
            OperatingPoint::bcod_default(),
        ] {
            let g = normalized_noise_gradient(&op, &w, &s, &chain).unwrap();
            let fields: [(f64, fn(&mut OperatingPoint) -> &mut f64); 4] = [
                (g.d_p0, |o| &mut o.p0),
                (g.d_pc, |o| &mut o.pc),
                (g.d_p_lo, |o| &mut o.p_lo),
                (g.d_pl, |o| &mut o.pl),
            ];
            for (analytic, field) in fields {
                let x = *field(&mut op.clone());
                if x == 0.0 {
                    assert_eq!(analytic, 0.0);
                    continue;
                }
                let central = |h: f64| {
                    let mut a = op.clone();
                    *field(&mut a) = x + h;
                    let mut b = op.clone();
                    *field(&mut b) = x - h;
                    (normalized_noise(&a, &w, &s, &chain).unwrap()
                        - normalized_noise(&b, &w, &s, &chain).unwrap())
                        / (2.0 * h)
                };
                let h = 1e-3 * x;
                let fd = (4.0 * central(h / 2.0) - central(h)) / 3.0;
                assert!(
                    (fd - analytic).abs() <= 1e-6 * analytic.abs(),
                    "{:?}: {fd} vs {analytic}",
                    op.scheme
                );
            }
        }
    }

    #[test]
    fn local_beam_formula_and_clamp() {
        let chain = DetectionChain::default();
        let p1 = 1e-5;
        let mut c = chain.clone();
        c.i_sat = 2.0 * p1 * c.alpha;
        assert!((optimal_pl(&c, p1, f64::INFINITY).unwrap() - p1).abs() < 1e-18);
        assert_eq!(optimal_pl(&chain, p1, 1e-3).unwrap(), 1e-3);
        c.i_sat = 0.5 * p1 * c.alpha;
        assert!(matches!(
            optimal_pl(&c, p1, 1.0),
            Err(Error::SaturatedAtZero { .. })
        ));
    }

    #[test]
    fn local_beam_monotone_on_grid() {
        let chain = DetectionChain::default();
        let s = sys();
        let mut op = OperatingPoint::bcod_default();
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            op.pl = 1e-6 * 10f64.powf(i as f64 * 4.0 / 99.0);
            let w = normalized_noise(&op, &weights(), &s, &chain).unwrap();
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn closed_forms_match_grid_for_diod() {
        let s = sys();
        let op = OperatingPoint {
            p0: 20e-6,
            ..OperatingPoint::diod_default()
        };
        let cases: [(
            fn(&OperatingPoint, &AtomicSystem) -> Result<ClosedFormOptimum>,
            NoiseTarget,
            bool,
        ); 4] = [
            (optimal_pc_cn, NoiseTarget::DcShot, true),
            (optimal_pc_tn, NoiseTarget::Thermal, true),
            (optimal_plo_cn, NoiseTarget::DcShot, false),
            (optimal_plo_tn, NoiseTarget::Thermal, false),
        ];
        for (solver, target, is_pc) in cases {
            let cf = solver(&op, &s).unwrap();
            assert!(!cf.boundary);
            let obj = |x: f64| {
                let mut o = op.clone();
                if is_pc {
                    o.pc = x;
                } else {
                    o.p_lo = x;
                }
                single_noise_objective(&o, &s, target)
            };
            let (lo, hi) = if is_pc { (1e-9, 10.0) } else { (1e-16, 1e-4) };
            let (x, _) = grid_golden_max(obj, lo, hi, 1000);
            assert!(
                (x - cf.power).abs() / x < 1e-3,
                "{target:?} pc={is_pc}: grid {x} vs {}",
                cf.power
            );
        }
    }

    #[test]
    fn bcod_thermal_uses_unit_gamma() {
        let s = sys();
        let op = OperatingPoint::bcod_default();
        let tn = optimal_plo_tn(&op, &s).unwrap();
        assert_eq!(tn.gamma, 1.0);
        let mut d = op.clone();
        d.scheme = Scheme::Diod;
        d.pl = 0.0;
        assert_eq!(tn.power, optimal_plo_cn(&d, &s).unwrap().power);
        let cn = optimal_plo_cn(&op, &s).unwrap();
        assert!(cn.gamma < 1.0 && cn.gamma > 0.99 && cn.iterations >= 1);
    }

    #[test]
    fn vanishing_lo_pushes_pc_to_boundary() {
        let mut op = OperatingPoint::diod_default();
        op.p_lo = 1e-30;
        let r = optimal_pc_cn(&op, &sys()).unwrap();
        assert!(r.boundary);
        assert_eq!(r.power, 0.0);
    }

    #[test]
    fn synthetic_convex_objective() {
        let target = 3.7e-4;
        let f = |x: f64| Ok((2.0 + (x - target).powi(2) * 1e6, 2e6 * (x - target)));
        let st = minimize_stationary(f, 1e-6, 1e-1).unwrap();
        assert!(!st.boundary);
        assert!((st.x - target).abs() / target < 1e-9);
    }

    #[test]
    fn monotone_objective_returns_boundary() {
        let st = minimize_stationary(|x| Ok((1.0 / x, -1.0 / (x * x))), 1e-3, 1.0).unwrap();
        assert!(st.boundary);
        assert_eq!(st.x, 1.0);
    }

    #[test]
    fn regime_rules() {
        let b = |cn: f64, tn: f64| NoiseBudget {
            n_cn: cn,
            n_tn: tn,
            n_qpn: 0.0,
            n_sum: 0.0,
            sigma_sq: 0.0,
            varsigma_sq: 0.0,
            sn_coefficient: 0.0,
        };
        assert_eq!(classify_regime(&b(2.0, 20.0), 1.0), Regime::Thermal);
        assert_eq!(classify_regime(&b(2.0, 2.0), 0.1), Regime::Mixed);
        assert_eq!(classify_regime(&b(20.0, 1.0), 0.1), Regime::DcShot);
        assert_eq!(
            classify_regime(&b(0.2, 0.2), 5.0),
            Regime::UserSignalDependent
        );
    }

    #[test]
    fn default_regimes() {
        let chain = DetectionChain::default();
        let s = sys();
        let op = OperatingPoint::diod_default();
        let sn = power_of_field(op.lo_amplitude() / 10.0, op.a_e) / op.a_e;
        assert_eq!(regime_at(&op, &s, &chain, sn).unwrap(), Regime::Thermal);
        let op = OperatingPoint::bcod_default();
        assert_eq!(regime_at(&op, &s, &chain, sn).unwrap(), Regime::DcShot);
    }

    #[test]
    fn newton_matches_grid() {
        let chain = DetectionChain::default();
        let s = sys();
        let w = weights();
        let op = OperatingPoint::diod_default();
        let r = newton_optimal_p0(&op, &w, &s, &chain, 1e-6, 0.1).unwrap();
        assert!(!r.boundary);
        let obj = |p0: f64| {
            let mut o = op.clone();
            o.p0 = p0;
            -normalized_noise(&o, &w, &s, &chain).unwrap()
        };
        let (x, _) = grid_golden_max(obj, 1e-6, 0.1, 2000);
        assert!((x - r.power).abs() / x < 5e-3);
    }

    #[test]
    fn local_beam_gradient_negative_at_random_points() {
        let chain = DetectionChain::default();
        let s = sys();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let mut op = OperatingPoint::bcod_default();
            op.p0 = 10f64.powf(rng.random_range(-6.0..-1.0));
            op.pc = 10f64.powf(rng.random_range(-6.0..-1.0));
            op.pl = 10f64.powf(rng.random_range(-6.0..-1.0));
            op.p_lo = 10f64.powf(rng.random_range(-12.0..-6.0));
            let g = normalized_noise_gradient(&op, &weights(), &s, &chain).unwrap();
            assert!(g.d_pl < 0.0);
        }
    }

    #[test]
    fn report_serializes() {
        let chain = DetectionChain::default();
        let r = design_report(
            &OperatingPoint::bcod_default(),
            &sys(),
            &chain,
            1e-14,
            &FeasibleBox::default(),
        )
        .unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"regime\""));
        assert_eq!(r.sensitivity.len(), 4);
    }
}
