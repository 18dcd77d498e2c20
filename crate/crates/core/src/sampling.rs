//! Deterministic random streams and geometric samplers.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by
//! `(seed, stream tag, index)`, so results do not depend on how work is
//! split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a stream tag and an index into a fresh seed.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
}

pub fn stream_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform point on the unit sphere in `R^dim`.
pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vector(rng, dim);
        let n = crate::numlin::norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Uniform point on the sphere of the given radius around `center`.
pub fn on_sphere<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let u = unit_sphere(rng, center.len());
    center.iter().zip(u).map(|(c, d)| c + radius * d).collect()
}

/// Uniform point in the closed ball of the given radius around `center`.
pub fn in_ball<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let n = center.len();
    let u = unit_sphere(rng, n);
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    center.iter().zip(u).map(|(c, d)| c + r * d).collect()
}

/// Uniform point in the axis-aligned box `center ± half_width`.
pub fn in_box<R: Rng + ?Sized>(rng: &mut R, center: &[f64], half_width: f64) -> Vec<f64> {
    center
        .iter()
        .map(|c| c + half_width * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}
