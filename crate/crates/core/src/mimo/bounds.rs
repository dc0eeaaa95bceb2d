// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Use-and-then-forget SINR bounds, term moments and the large-array limit.

use serde::{Deserialize, Serialize};

use super::{Link, Method, MimoScenario};
use crate::atomic::AtomicSystem;
use crate::constants::{BOLTZMANN, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::frontend::{baseband_gains, BasebandGains, DetectionChain, OperatingPoint};

/// Second moments of the decision-statistic terms of one user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermMoments {
    /// |E{DS}|².
    pub ds: f64,
    /// E|LS|².
    pub ls: f64,
    /// Σ_{k'≠k} E|UI|².
    pub ui: f64,
    /// E|SN_{k,k}|².
    pub sn_self: f64,
    /// Σ_{k'≠k} E|SN_{k,k'}|².
    pub sn_cross: f64,
    /// E|N|².
    pub noise: f64,
}

impl TermMoments {
    pub fn sinr(&self) -> f64 {
        ratio(
            self.ds,
            self.ls + self.ui + self.sn_self + self.sn_cross + self.noise,
        )
    }
}

pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Achievable rate log2(1 + SINR).
pub fn rate_of(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// Closed-form MRC moments.
pub fn mrc_moments(scenario: &MimoScenario, link: &Link) -> Result<Vec<TermMoments>> {
    scenario.validate()?;
    let m = scenario.m as f64;
    let a2 = link.phi.norm_sqr();
    let sn2 = link.phi_sn.norm_sqr();
    let shot = link.varsigma_sq * link.rho_sn;
    Ok((0..scenario.k)
        .map(|k| {
            let (p, b) = (scenario.p[k], scenario.beta[k]);
            let others: f64 = (0..scenario.k)
                .filter(|&j| j != k)
                .map(|j| scenario.p[j] * scenario.beta[j])
                .sum();
            TermMoments {
                ds: m * m * link.rho * p * a2 * a2 * b * b,
                ls: m * link.rho * p * a2 * a2 * b * b,
                ui: m * link.rho * a2 * a2 * b * others,
                sn_self: 2.0 * m * shot * p * a2 * sn2 * b * b,
                sn_cross: m * shot * a2 * sn2 * b * others,
                noise: m * a2 * link.sigma_sq * b,
            }
        })
        .collect())
}

/// ZF moments; the shot-noise terms use the large-array trace approximation
/// E{tr(B̃B̃ᴴ)} = (M − 1)ς².
pub fn zf_moments(scenario: &MimoScenario, link: &Link) -> Result<Vec<TermMoments>> {
    scenario.validate()?;
    if scenario.m <= scenario.k {
        return Err(Error::DimensionError {
            sensors: scenario.m,
            users: scenario.k,
        });
    }
    let m = scenario.m as f64;
    let mk = (scenario.m - scenario.k) as f64;
    let a2 = link.phi.norm_sqr();
    let sn2 = link.phi_sn.norm_sqr();
    let vs = link.varsigma_sq;
    Ok((0..scenario.k)
        .map(|k| {
            let (p, b) = (scenario.p[k], scenario.beta[k]);
            let scale = link.rho_sn * sn2 / a2;
            let cross: f64 = (0..scenario.k)
                .filter(|&j| j != k)
                .map(|j| scenario.p[j] * scenario.beta[j] / b)
                .sum();
            TermMoments {
                ds: link.rho * p,
                ls: 0.0,
                ui: 0.0,
                sn_self: scale * p * ((m - 1.0) * vs / (m * mk) + vs / m),
                sn_cross: scale * cross * (m - 1.0) * vs / (m * mk),
                noise: link.sigma_sq / (mk * a2 * b),
            }
        })
        .collect())
}

/// Closed-form MRC lower bound per user.
pub fn sinr_lb_mrc(scenario: &MimoScenario, link: &Link) -> Result<Vec<f64>> {
    scenario.validate()?;
    let m = scenario.m as f64;
    let a2 = link.phi.norm_sqr();
    let shot = link.varsigma_sq * link.rho_sn * link.phi_sn.norm_sqr();
    let total: f64 = scenario
        .p
        .iter()
        .zip(&scenario.beta)
        .map(|(p, b)| p * b)
        .sum();
    Ok((0..scenario.k)
        .map(|k| {
            let (p, b) = (scenario.p[k], scenario.beta[k]);
            let num = m * link.rho * p * a2 * b;
            let den = total * (link.rho * a2 + shot) + shot * p * b + link.sigma_sq;
            ratio(num, den)
        })
        .collect())
}

fn zf_bound(scenario: &MimoScenario, link: &Link, numerator_factor: f64) -> Result<Vec<f64>> {
    scenario.validate()?;
    if scenario.m <= scenario.k {
        return Err(Error::DimensionError {
            sensors: scenario.m,
            users: scenario.k,
        });
    }
    let m = scenario.m as f64;
    let mk = (scenario.m - scenario.k) as f64;
    let a2 = link.phi.norm_sqr();
    let shot = link.varsigma_sq * link.rho_sn * link.phi_sn.norm_sqr() / m;
    let total: f64 = scenario
        .p
        .iter()
        .zip(&scenario.beta)
        .map(|(p, b)| p * b)
        .sum();
    Ok((0..scenario.k)
        .map(|k| {
            let (p, b) = (scenario.p[k], scenario.beta[k]);
            let num = numerator_factor * mk * link.rho * p * a2 * b;
            let den = shot * (p * b * mk + total * (m - 1.0)) + link.sigma_sq;
            ratio(num, den)
        })
        .collect())
}

/// ZF lower bound per user, consistent with [`zf_moments`].
pub fn sinr_lb_zf(scenario: &MimoScenario, link: &Link) -> Result<Vec<f64>> {
    zf_bound(scenario, link, 1.0)
}

/// ZF bound in its commonly quoted form, with an extra factor 4 in the
/// numerator. Exceeds the achievable SINR by 6 dB; kept for comparison.
pub fn sinr_lb_zf_printed(scenario: &MimoScenario, link: &Link) -> Result<Vec<f64>> {
    zf_bound(scenario, link, 4.0)
}

/// Asymptotic noise floor with p_k = E/M as M → ∞, in the units of 4Eβ_k:
///
/// ```text
/// floor = [ς²P̄_CN/(2Z0αP_G²κ²) + k_B·T·B/(2Z0α²P_G²κ²)]/|Φ|² + 2cε0·B·ħ²/(N·T2·μ34²)
/// ```
pub fn noise_floor(gains: &BasebandGains, chain: &DetectionChain, system: &AtomicSystem) -> f64 {
    let a2 = gains.phi.norm_sqr();
    let k = gains.signal_kappa();
    let denom = 2.0 * chain.z0 * chain.alpha * gains.p_g * gains.p_g * k * k;
    let electronic = chain.sigma_sq_sn * gains.p_cn_bar / denom
        + BOLTZMANN * chain.temperature * chain.bandwidth / (chain.alpha * denom);
    let qpn = 2.0 * SPEED_OF_LIGHT * EPSILON_0 * chain.bandwidth * HBAR * HBAR
        / (system.n_atoms * system.t2 * system.mu34 * system.mu34);
    if !(a2 > 0.0 && denom > 0.0) {
        return f64::INFINITY;
    }
    electronic / a2 + qpn
}

/// Large-array rate log2(1 + 4Eβ_k/floor).
pub fn asymptotic_rate(floor: f64, beta_k: f64, energy: f64) -> f64 {
    rate_of(ratio(4.0 * energy * beta_k, floor))
}

/// Conventional RF array bounds at noise variance σ²_RF.
pub fn rf_baseline(scenario: &MimoScenario, sigma_rf_sq: f64, method: Method) -> Result<Vec<f64>> {
    let link = Link::rf(sigma_rf_sq);
    match method {
        Method::Mrc => sinr_lb_mrc(scenario, &link),
        Method::Zf => sinr_lb_zf(scenario, &link),
    }
}

/// Operating-point parameter swept by [`crossover_threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    P0,
    Pc,
    PLo,
    Pl,
}

impl SweepVariable {
    pub fn apply(self, op: &OperatingPoint, value: f64) -> OperatingPoint {
        let mut out = op.clone();
        match self {
            SweepVariable::P0 => out.p0 = value,
            SweepVariable::Pc => out.pc = value,
            SweepVariable::PLo => out.p_lo = value,
            SweepVariable::Pl => out.pl = value,
        }
        out
    }
}

/// Values of `var` in `[lo, hi]` where the RAQ floor equals 4σ²_RF, so that
/// the RAQ array and an RF array at σ²_RF share the same large-array rate.
/// The range is scanned on a log grid of `grid` points and every sign change
/// is refined by bisection; roots are returned in increasing order.
#[allow(clippy::too_many_arguments)]
pub fn crossover_threshold(
    op: &OperatingPoint,
    system: &AtomicSystem,
    chain: &DetectionChain,
    sigma_rf_sq: f64,
    var: SweepVariable,
    lo: f64,
    hi: f64,
    grid: usize,
) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid("range", "need 0 < lo < hi < inf"));
    }
    if !(sigma_rf_sq > 0.0) {
        return Err(Error::invalid("sigma_rf_sq", "must be > 0"));
    }
    let grid = grid.max(2);
    let f = |x: f64| -> Result<f64> {
        let point = var.apply(op, x);
        let gains = baseband_gains(&point, chain, system)?;
        Ok(noise_floor(&gains, chain, system) - 4.0 * sigma_rf_sq)
    };
    let (la, lb) = (lo.ln(), hi.ln());
    let xs: Vec<f64> = (0..grid)
        .map(|i| (la + (lb - la) * i as f64 / (grid - 1) as f64).exp())
        .collect();
    let vals = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for i in 0..grid - 1 {
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        let (mut a, mut b, mut ya) = (xs[i].ln(), xs[i + 1].ln(), fa);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let ym = f(mid.exp())?;
            if ym == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if ym.signum() == ya.signum() {
                a = mid;
                ya = ym;
            } else {
                b = mid;
            }
            if b - a < 1e-12 {
                break;
            }
        }
        roots.push((0.5 * (a + b)).exp());
    }
    if vals[grid - 1] == 0.0 {
        roots.push(xs[grid - 1]);
    }
    if roots.is_empty() {
        return Err(Error::NoCrossing { lo, hi });
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{noise_budget, Scheme};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn link() -> Link {
        Link {
            rho: 2.0,
            phi: Complex64::from_polar(0.8, -0.4),
            rho_sn: 0.5,
            phi_sn: Complex64::from_polar(1.0, -0.4),
            varsigma_sq: 0.3,
            sigma_sq: 0.2,
        }
    }

    fn scenario(m: usize, k: usize) -> MimoScenario {
        let mut s = MimoScenario::uniform(m, k, 6.9458e9, 1.0, 1.0);
        s.beta = (0..k).map(|i| 0.5 + 0.25 * i as f64).collect();
        s.p = (0..k).map(|i| 1.0 + 0.1 * i as f64).collect();
        s
    }

    #[test]
    fn mrc_bound_matches_moments() {
        let sc = scenario(32, 4);
        let l = link();
        let b = sinr_lb_mrc(&sc, &l).unwrap();
        for (k, t) in mrc_moments(&sc, &l).unwrap().iter().enumerate() {
            assert!((t.sinr() / b[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zf_bound_matches_moments() {
        let sc = scenario(32, 4);
        let l = link();
        let b = sinr_lb_zf(&sc, &l).unwrap();
        let printed = sinr_lb_zf_printed(&sc, &l).unwrap();
        for (k, t) in zf_moments(&sc, &l).unwrap().iter().enumerate() {
            assert!((t.sinr() / b[k] - 1.0).abs() < 1e-12);
            assert!((printed[k] / b[k] - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zf_needs_more_sensors() {
        assert!(matches!(
            sinr_lb_zf(&scenario(4, 4), &link()),
            Err(Error::DimensionError { .. })
        ));
    }

    #[test]
    fn rf_limit_is_textbook() {
        let sc = scenario(64, 1);
        let s = rf_baseline(&sc, 0.5, Method::Mrc).unwrap()[0];
        let (p, b) = (sc.p[0], sc.beta[0]);
        assert!((s - 64.0 * p * b / (p * b + 0.5)).abs() < 1e-12);
        let z = rf_baseline(&sc, 0.5, Method::Zf).unwrap()[0];
        assert!((z - 63.0 * p * b / 0.5).abs() < 1e-12);
    }

    #[test]
    fn mrc_interference_ratio_scales_inverse_m() {
        let l = link();
        let ratio_at = |m: usize| {
            let sc = scenario(m, 4);
            let t = mrc_moments(&sc, &l).unwrap()[0];
            (t.ls + t.ui) / t.ds
        };
        let r1 = ratio_at(64);
        let r2 = ratio_at(256);
        assert!((r1 / r2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn floor_matches_budget() {
        let sys = AtomicSystem::cesium_47d();
        let chain = DetectionChain::default();
        for op in [
            OperatingPoint::diod_default(),
            OperatingPoint::bcod_default(),
        ] {
            let g = baseband_gains(&op, &chain, &sys).unwrap();
            let nb = noise_budget(&op, &chain, &sys, &g).unwrap();
            let floor = noise_floor(&g, &chain, &sys);
            let expect = 4.0 * nb.sigma_sq / (g.rho * g.phi.norm_sqr());
            assert!((floor / expect - 1.0).abs() < 1e-10, "{:?}", op.scheme);
        }
    }

    #[test]
    fn large_array_approaches_asymptote() {
        let sys = AtomicSystem::cesium_47d();
        let chain = DetectionChain::default();
        let op = OperatingPoint::diod_default();
        let g = baseband_gains(&op, &chain, &sys).unwrap();
        let nb = noise_budget(&op, &chain, &sys, &g).unwrap();
        let l = Link::new(&g, &nb);
        let (energy, beta) = (1.0, 5e-13);
        let m = 1 << 16;
        let sc = MimoScenario::uniform(m, 4, op.f_lo, beta, energy / m as f64);
        let s = sinr_lb_mrc(&sc, &l).unwrap()[0];
        let asym = asymptotic_rate(noise_floor(&g, &chain, &sys), beta, energy);
        assert!((rate_of(s) / asym - 1.0).abs() < 1e-3);
    }

    #[test]
    fn crossover_brackets_sign_change() {
        let sys = AtomicSystem::cesium_47d();
        let chain = DetectionChain::default();
        let op = OperatingPoint::diod_default();
        let floor_at = |p_lo: f64| {
            let g = baseband_gains(&SweepVariable::PLo.apply(&op, p_lo), &chain, &sys).unwrap();
            noise_floor(&g, &chain, &sys)
        };
        let target = floor_at(1e-11) / 4.0;
        let roots = crossover_threshold(
            &op,
            &sys,
            &chain,
            target,
            SweepVariable::PLo,
            1e-13,
            1e-9,
            64,
        )
        .unwrap();
        assert!(
            roots.iter().any(|r| (r / 1e-11 - 1.0).abs() < 1e-6),
            "{roots:?}"
        );
        let err = crossover_threshold(
            &op,
            &sys,
            &chain,
            1e-300,
            SweepVariable::PLo,
            1e-13,
            1e-9,
            16,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoCrossing { .. }));
        assert_eq!(op.scheme, Scheme::Diod);
    }

    proptest! {
        #[test]
        fn bounds_monotone_in_m(m in 12usize..200, k in 1usize..10) {
            let l = link();
            let a = sinr_lb_mrc(&scenario(m, k), &l).unwrap();
            let b = sinr_lb_mrc(&scenario(m + 1, k), &l).unwrap();
            let za = sinr_lb_zf(&scenario(m, k), &l).unwrap();
            let zb = sinr_lb_zf(&scenario(m + 1, k), &l).unwrap();
            for i in 0..k {
                prop_assert!(b[i] >= a[i]);
                prop_assert!(zb[i] >= za[i]);
            }
        }
    }
}
