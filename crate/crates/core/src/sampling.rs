//! Seeded, portable random sampling.
//!
//! All randomness goes through SplitMix64 (Vigna's reference `splitmix64.c`,
//! state seeded directly with the `u64` seed). Uniform doubles use the top 53
//! bits of each output: `(next_u64() >> 11) * 2^-53`. Work item `index` under
//! a run seed `seed` draws from its own stream, seeded with the first output of
//! SplitMix64 started at `seed + index * 0xD1B54A32D192ED03` (wrapping). The
//! same `(seed, index)` therefore yields the same draws no matter how work is
//! scheduled across threads.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::geodesic::InitialConditions;
use crate::group::{GroupPoint, TangentVector};

const STREAM_STRIDE: u64 = 0xD1B54A32D192ED03;
const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Seed of the independent stream for work item `index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    SplitMix64::seed_from_u64(seed.wrapping_add(index.wrapping_mul(STREAM_STRIDE))).next_u64()
}

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: SplitMix64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn for_index(seed: u64, index: u64) -> Self {
        Self::new(derive_seed(seed, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * UNIT_SCALE
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn uniform_vec(&mut self, len: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..len).map(|_| self.uniform(lo, hi)).collect()
    }
}

/// Point with every coordinate uniform in `[-half_width, half_width)`.
pub fn random_point(rng: &mut SeededRng, p: usize, half_width: f64) -> GroupPoint {
    let x = rng.uniform_vec(p, -half_width, half_width);
    let y = rng.uniform_vec(p, -half_width, half_width);
    let z = rng.uniform(-half_width, half_width);
    GroupPoint::from_parts(x, y, z)
}

/// Tangent vector with every component uniform in `[-half_width, half_width)`.
pub fn random_vector(rng: &mut SeededRng, p: usize, half_width: f64) -> TangentVector {
    let ux = rng.uniform_vec(p, -half_width, half_width);
    let uy = rng.uniform_vec(p, -half_width, half_width);
    let uz = rng.uniform(-half_width, half_width);
    TangentVector::from_parts(ux, uy, uz)
}

/// `uz` that gives the first integral `uz + sum x_i uy_i` the value `alpha`.
pub fn uz_for_alpha(point: &GroupPoint, uy: &[f64], alpha: f64) -> f64 {
    alpha - point.x().iter().zip(uy).map(|(x, v)| x * v).sum::<f64>()
}

/// Random initial conditions: point and `(ux, uy)` uniform in `[-1, 1)`, and
/// `uz` chosen so the first integral is uniform in `[-alpha_bound, alpha_bound)`.
///
/// Bounding the first integral keeps `exp(|alpha t|)` moderate on the time
/// windows the verification sweeps use.
pub fn random_ic(rng: &mut SeededRng, p: usize, alpha_bound: f64) -> InitialConditions {
    let point = random_point(rng, p, 1.0);
    let ux = rng.uniform_vec(p, -1.0, 1.0);
    let uy = rng.uniform_vec(p, -1.0, 1.0);
    let alpha = rng.uniform(-alpha_bound, alpha_bound);
    let uz = uz_for_alpha(&point, &uy, alpha);
    InitialConditions::from_parts(point, TangentVector::from_parts(ux, uy, uz))
}
