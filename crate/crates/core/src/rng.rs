// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Counter-addressed random streams.
//!
//! Every draw is keyed by `(seed, index, kind)`: the seed selects the ChaCha8
//! key, `kind` and `index` select one of 2^64 independent streams, and the
//! word position inside a stream is a plain counter. Results therefore do not
//! depend on how work is split across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const INDEX_BITS: u32 = 56;

/// What a stream is used for. Distinct kinds never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum DrawKind {
    Channel = 1,
    Symbols = 2,
    ShotNoise = 3,
    AdditiveNoise = 4,
    Placement = 5,
    Waveform = 6,
}

/// Returns the stream for `(seed, index, kind)` positioned at word 0.
///
/// # Panics
/// If `index` does not fit in 56 bits.
pub fn stream(seed: u64, index: u64, kind: DrawKind) -> ChaCha8Rng {
    assert!(index < (1u64 << INDEX_BITS), "stream index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((kind as u64) << INDEX_BITS) | index);
    rng
}

/// Standard normal draw.
#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Circularly symmetric complex normal with unit total variance.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    num_complex::Complex64::new(s * normal(rng), s * normal(rng))
}

/// Sample-indexed Gaussian pairs for waveform noise.
///
/// Sample `i` consumes words `4i..4i+4` of its stream and yields two
/// independent standard normals through the Box-Muller transform, so any
/// sub-range can be regenerated on its own.
#[derive(Debug, Clone)]
pub struct NormalPairs {
    seed: u64,
    index: u64,
}

impl NormalPairs {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// Fills `out` with the pairs for samples `start..start + out.len()`.
    pub fn fill(&self, start: u64, out: &mut [(f64, f64)]) {
        let mut rng = stream(self.seed, self.index, DrawKind::Waveform);
        rng.set_word_pos(u128::from(start) * 4);
        for slot in out.iter_mut() {
            let u1 = unit_open(rng.next_u64());
            let u2 = unit_open(rng.next_u64());
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
            *slot = (r * c, r * s);
        }
    }

    pub fn pairs(&self, start: u64, len: usize) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); len];
        self.fill(start, &mut out);
        out
    }
}

/// Maps 64 random bits to (0, 1].
#[inline]
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}
