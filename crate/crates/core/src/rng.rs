//! The user's private randomness.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Seeded ChaCha20 stream. Equal seeds give equal draws on every platform:
/// bounded integers are always sampled from `u32` ranges, never `usize`.
///
/// Not meant to be shared between threads; use [`SeededRandomness::derive`]
/// to hand independent streams to workers.
#[derive(Debug, Clone)]
pub struct SeededRandomness {
    seed: u64,
    rng: ChaCha20Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl SeededRandomness {
    pub fn new(seed: u64) -> Self {
        SeededRandomness { seed, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fresh generator whose seed is a fixed mix of this seed and `stream`.
    /// Does not advance `self`.
    pub fn derive(&self, stream: u64) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(stream)))
    }

    /// Uniform in `0..bound`; `bound` must be nonzero.
    pub fn below(&mut self, bound: u32) -> u32 {
        self.rng.gen_range(0..bound)
    }

    /// Uniform permutation of `0..len` by Fisher–Yates; `perm[i]` is the
    /// image of `i`.
    pub fn permutation(&mut self, len: usize) -> Vec<u32> {
        assert!(len <= u32::MAX as usize, "permutation length exceeds u32");
        let mut perm: Vec<u32> = (0..len as u32).collect();
        for i in (1..len).rev() {
            let j = self.rng.gen_range(0..=i as u32) as usize;
            perm.swap(i, j);
        }
        perm
    }
}

impl RngCore for SeededRandomness {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}
