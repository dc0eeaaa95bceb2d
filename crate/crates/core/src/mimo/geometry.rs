// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! User placement and large-scale fading.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, DrawKind};

/// β in dB at distance `d_m` metres and carrier `f_ghz` GHz.
pub fn path_loss_db(d_m: f64, f_ghz: f64) -> f64 {
    -32.4 - 20.0 * d_m.log10() - 20.0 * f_ghz.log10()
}

/// Users dropped uniformly in a disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDrop {
    pub distance: Vec<f64>,
    /// Linear β_k.
    pub beta: Vec<f64>,
}

/// Drops `k` users uniformly in a disc of `radius` whose centre is
/// `center_distance` from the array.
pub fn drop_users(
    k: usize,
    center_distance: f64,
    radius: f64,
    f_ghz: f64,
    seed: u64,
) -> Result<UserDrop> {
    if !(radius >= 0.0 && center_distance > radius) {
        return Err(Error::invalid("radius", "disc must not contain the array"));
    }
    if !(f_ghz > 0.0) {
        return Err(Error::invalid("f_ghz", "must be > 0"));
    }
    let mut rng = stream(seed, 0, DrawKind::Placement);
    let distance: Vec<f64> = (0..k)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let t = std::f64::consts::TAU * rng.random::<f64>();
            (center_distance + r * t.cos()).hypot(r * t.sin())
        })
        .collect();
    let beta = distance
        .iter()
        .map(|&d| 10f64.powf(path_loss_db(d, f_ghz) / 10.0))
        .collect();
    Ok(UserDrop { distance, beta })
}
