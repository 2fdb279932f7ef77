//! Splittable, counter-based random streams.
//!
//! A root stream is keyed by a 64-bit seed. Children are derived by mixing the
//! parent key with a label, so the stream handed to replica `i` depends only on
//! `(root seed, i)` and never on scheduling order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    key: [u64; 4],
    lineage: Vec<u64>,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        let mut key = [0u64; 4];
        let mut s = seed;
        for k in key.iter_mut() {
            s = splitmix64(s);
            *k = s;
        }
        Self::with_key(key, vec![seed])
    }

    fn with_key(key: [u64; 4], lineage: Vec<u64>) -> Self {
        let mut bytes = [0u8; 32];
        for (chunk, k) in bytes.chunks_exact_mut(8).zip(key.iter()) {
            chunk.copy_from_slice(&k.to_le_bytes());
        }
        RngStream { key, lineage, inner: ChaCha8Rng::from_seed(bytes) }
    }

    /// Child stream for `label`. Does not advance `self`.
    pub fn split(&self, label: u64) -> Self {
        let mut key = [0u64; 4];
        let mut acc = splitmix64(label ^ 0xD6E8_FEB8_6659_FD93);
        for (i, k) in key.iter_mut().enumerate() {
            acc = splitmix64(acc ^ self.key[i].rotate_left(17 * i as u32 + 5));
            *k = acc;
        }
        let mut lineage = self.lineage.clone();
        lineage.push(label);
        Self::with_key(key, lineage)
    }

    /// Seed path from the root, e.g. `42/7/3`.
    pub fn lineage(&self) -> String {
        self.lineage.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("/")
    }

    pub fn lineage_parts(&self) -> &[u64] {
        &self.lineage
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (rejection sampling, no modulo bias).
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.inner.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
