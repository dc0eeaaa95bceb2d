// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo estimation of the use-and-then-forget terms.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{rate_of, ratio, sinr_lb_mrc, sinr_lb_zf, sinr_lb_zf_printed, TermMoments};
use super::{combiner, decompose, draw_awgn, draw_shot, gen_channel, Link, Method, MimoScenario};
use crate::error::{Error, Result};
use crate::rng::{stream, DrawKind};

/// Rate reported when the estimated SINR is infinite or beyond double
/// precision resolution (bit/s/Hz).
pub const RATE_CAP: f64 = 64.0;

const BATCHES: usize = 20;

/// Per-user estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRate {
    pub sinr_mc: f64,
    pub rate_mc: f64,
    /// Batch-means standard error of `rate_mc`.
    pub rate_se: f64,
    pub bound_sinr: f64,
    pub bound_rate: f64,
    /// ZF only: the factor-4 variant of the bound.
    pub printed_bound_rate: Option<f64>,
    /// E{log2(1 + SINR)} with perfect channel knowledge.
    pub ergodic_rate: f64,
    pub moments: TermMoments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub method: Method,
    pub users: Vec<UserRate>,
    /// Per-user rate averaged over users.
    pub mean_rate: f64,
    pub mean_rate_se: f64,
    pub mean_bound_rate: f64,
    pub mean_ergodic_rate: f64,
    pub samples: usize,
    /// Some SINR estimate hit [`RATE_CAP`].
    pub capped: bool,
    /// The factor-4 ZF bound lies above MC + 3·SE for some user.
    pub bound_alarm: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    g: Complex64,
    g2: f64,
    ui: f64,
    sn_self: f64,
    sn_cross: f64,
    noise: f64,
    ergodic: f64,
    n: usize,
}

impl Sums {
    fn add(&mut self, o: &Sums) {
        self.g += o.g;
        self.g2 += o.g2;
        self.ui += o.ui;
        self.sn_self += o.sn_self;
        self.sn_cross += o.sn_cross;
        self.noise += o.noise;
        self.ergodic += o.ergodic;
        self.n += o.n;
    }

    fn moments(&self) -> TermMoments {
        let n = self.n as f64;
        let mean = self.g / n;
        let ds = mean.norm_sqr();
        TermMoments {
            ds,
            ls: (self.g2 / n - ds).max(0.0),
            ui: self.ui / n,
            sn_self: self.sn_self / n,
            sn_cross: self.sn_cross / n,
            noise: self.noise / n,
        }
    }
}

fn capped_rate(sinr: f64) -> (f64, bool) {
    if sinr < RATE_CAP.exp2() {
        (rate_of(sinr), false)
    } else {
        (RATE_CAP, true)
    }
}

fn realization(
    scenario: &MimoScenario,
    link: &Link,
    method: Method,
    index: u64,
) -> Result<Vec<Sums>> {
    let h = gen_channel(
        scenario,
        &mut stream(scenario.seed, index, DrawKind::Channel),
    );
    let b = draw_shot(
        scenario.m,
        link,
        &mut stream(scenario.seed, index, DrawKind::ShotNoise),
    );
    let w = draw_awgn(
        scenario.m,
        link,
        &mut stream(scenario.seed, index, DrawKind::AdditiveNoise),
    );
    let c = combiner(&h, scenario, link, method)?;
    Ok(decompose(&h, &c, scenario, link, &b, &w)
        .into_iter()
        .enumerate()
        .map(|(k, t)| {
            let ui: f64 = t.ui.iter().map(|z| z.norm_sqr()).sum();
            let sn_self = t.sn[k].norm_sqr();
            let sn_cross = t.sn.iter().map(|z| z.norm_sqr()).sum::<f64>() - sn_self;
            let inst = ratio(
                t.gain.norm_sqr(),
                ui + t.sn_conditional + t.noise_conditional,
            );
            Sums {
                g: t.gain,
                g2: t.gain.norm_sqr(),
                ui,
                sn_self,
                sn_cross,
                noise: t.noise.norm_sqr(),
                ergodic: capped_rate(inst).0,
                n: 1,
            }
        })
        .collect())
}

/// Estimates every user's UatF SINR from `n_realizations` independent
/// channel, shot-noise and AWGN draws. Each realization owns its random
/// streams and the reduction runs in index order, so the result does not
/// depend on the number of worker threads.
pub fn monte_carlo_rate(
    scenario: &MimoScenario,
    link: &Link,
    method: Method,
) -> Result<RateResult> {
    scenario.validate()?;
    let n = scenario.n_realizations;
    if n < 2 {
        return Err(Error::invalid(
            "n_realizations",
            "need at least 2 realizations",
        ));
    }
    let bound = match method {
        Method::Mrc => sinr_lb_mrc(scenario, link)?,
        Method::Zf => sinr_lb_zf(scenario, link)?,
    };
    let printed = match method {
        Method::Mrc => None,
        Method::Zf => Some(sinr_lb_zf_printed(scenario, link)?),
    };
    let samples = (0..n as u64)
        .into_par_iter()
        .map(|i| realization(scenario, link, method, i))
        .collect::<Result<Vec<_>>>()?;

    let k_n = scenario.k;
    let nb = BATCHES.min(n);
    let mut batches = vec![vec![Sums::default(); k_n]; nb];
    for (i, sample) in samples.iter().enumerate() {
        let bi = i * nb / n;
        for (acc, s) in batches[bi].iter_mut().zip(sample) {
            acc.add(s);
        }
    }
    let mut total = vec![Sums::default(); k_n];
    for batch in &batches {
        for (acc, s) in total.iter_mut().zip(batch) {
            acc.add(s);
        }
    }

    let mut capped = false;
    let batch_rates: Vec<Vec<f64>> = batches
        .iter()
        .map(|b| {
            b.iter()
                .map(|s| {
                    let (r, c) = capped_rate(s.moments().sinr());
                    capped |= c;
                    r
                })
                .collect()
        })
        .collect();
    let se = |values: &[f64]| -> f64 {
        let m = values.iter().sum::<f64>() / values.len() as f64;
        let var =
            values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1).max(1) as f64;
        (var / values.len() as f64).sqrt()
    };

    let mut users = Vec::with_capacity(k_n);
    for k in 0..k_n {
        let moments = total[k].moments();
        let sinr_mc = moments.sinr();
        let (rate_mc, c) = capped_rate(sinr_mc);
        capped |= c;
        let per_batch: Vec<f64> = batch_rates.iter().map(|b| b[k]).collect();
        users.push(UserRate {
            sinr_mc,
            rate_mc,
            rate_se: se(&per_batch),
            bound_sinr: bound[k],
            bound_rate: capped_rate(bound[k]).0,
            printed_bound_rate: printed.as_ref().map(|p| capped_rate(p[k]).0),
            ergodic_rate: total[k].ergodic / n as f64,
            moments,
        });
    }
    let kf = k_n as f64;
    let mean_batch: Vec<f64> = batch_rates
        .iter()
        .map(|b| b.iter().sum::<f64>() / kf)
        .collect();
    let bound_alarm = users.iter().any(|u| {
        u.printed_bound_rate
            .is_some_and(|p| u.rate_mc + 3.0 * u.rate_se < p)
    });
    Ok(RateResult {
        method,
        mean_rate: users.iter().map(|u| u.rate_mc).sum::<f64>() / kf,
        mean_rate_se: se(&mean_batch),
        mean_bound_rate: users.iter().map(|u| u.bound_rate).sum::<f64>() / kf,
        mean_ergodic_rate: users.iter().map(|u| u.ergodic_rate).sum::<f64>() / kf,
        users,
        samples: n,
        capped,
        bound_alarm,
    })
}
