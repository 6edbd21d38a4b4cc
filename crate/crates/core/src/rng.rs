//! Seeded random numbers.
//!
//! All randomness in the crate comes from `ChaCha8Rng::seed_from_u64`, which
//! is portable across platforms. Normal variates use the Box–Muller
//! transform, consuming two uniforms per variate and keeping the cosine
//! branch only, so the stream position after `k` normals is always `2k`.

use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One standard normal variate.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // u1 in (0, 1] keeps the logarithm finite
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}
