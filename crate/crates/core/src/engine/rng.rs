//! Seeded, counter-based random streams.
//!
//! A stream is ChaCha8 keyed by the master seed (expanded with SplitMix64)
//! and addressed by a 64-bit stream id; nothing is shared between streams,
//! so any path can be generated on any worker in any order.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc_inv;

/// What a stream is used for; each path owns one stream per purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Noise = 0,
    InitialCondition = 1,
    Extension = 2,
    Checker = 3,
}

const PURPOSES: u64 = 4;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(master_seed: u64) -> [u8; 32] {
    let mut s = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    key
}

/// Noise stream of path `path_index`.
pub fn substream(master_seed: u64, path_index: u64) -> NormalStream {
    substream_for(master_seed, path_index, StreamPurpose::Noise)
}

/// Stream of path `path_index` dedicated to `purpose`.
pub fn substream_for(master_seed: u64, path_index: u64, purpose: StreamPurpose) -> NormalStream {
    let mut rng = ChaCha8Rng::from_seed(key_from_seed(master_seed));
    rng.set_stream(path_index.wrapping_mul(PURPOSES).wrapping_add(purpose as u64));
    NormalStream { rng }
}

/// Standard normal quantile `Φ^{-1}(p)` for `p ∈ (0, 1)`.
#[inline]
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Uniforms and standard normals drawn from one stream.
///
/// Every normal consumes exactly one 64-bit word.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    /// Uniform on the open interval `(0, 1)`: `((x >> 11) + 1/2) 2^{-53}`.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inverse CDF.
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        normal_quantile(self.next_uniform())
    }

    pub fn fill_normals(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_normal();
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}
