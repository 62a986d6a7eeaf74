//! Seed-stream derivation. Every random decision in a run is drawn from a
//! ChaCha8 stream derived from the master seed plus a stable label (and an
//! optional index), so independent stages never share or race a generator.
//!
//! Labels in use: "split", "init", "batch", "balance", "shots",
//! "landscape-dirs", "class".

use crate::fmath;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, label: &str) -> u64 {
    splitmix(master ^ splitmix(fnv1a(label.as_bytes())))
}

pub fn derive_seed_indexed(master: u64, label: &str, index: u64) -> u64 {
    splitmix(derive_seed(master, label) ^ splitmix(index.wrapping_add(1)))
}

pub fn stream(master: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, label))
}

pub fn stream_indexed(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed_indexed(master, label, index))
}

/// Standard normal draw (Box-Muller). `rng.gen::<f64>()` is in [0, 1);
/// the flip keeps the log argument strictly positive.
pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    fmath::sqrt(-2.0 * fmath::log(u1)) * fmath::cos(2.0 * core::f64::consts::PI * u2)
}
