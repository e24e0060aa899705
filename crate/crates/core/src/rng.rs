//! Keyed, reproducible random streams.
//!
//! Every record gets its own stream so results do not depend on how work is
//! scheduled across threads. A stream is a SplitMix64 generator whose 64-bit
//! starting state is `mix64(seed, key)`:
//!
//! ```text
//! avalanche(z):
//!     z = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9
//!     z = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB
//!     z ^ (z >> 31)
//! mix64(seed, key) = avalanche(seed ^ avalanche(key + 0x9E37_79B9_7F4A_7C15))
//! next():  state += 0x9E37_79B9_7F4A_7C15; avalanche(state)
//! ```
//!
//! String keys (record ids) are hashed with 64-bit FNV-1a
//! (offset `0xCBF2_9CE4_8422_2325`, prime `0x0000_0100_0000_01B3`).
//! All arithmetic wraps.

/// SplitMix64 increment (the 64-bit golden ratio).
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;

/// SplitMix64 / MurmurHash3-style finalizer.
#[inline]
pub fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a global seed with a per-item key.
#[inline]
pub fn mix64(seed: u64, key: u64) -> u64 {
    avalanche(seed ^ avalanche(key.wrapping_add(GOLDEN_GAMMA)))
}

/// 64-bit FNV-1a hash; stable across platforms and releases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn from_state(state: u64) -> Self {
        Self { state }
    }

    /// Stream for a record identified by a string id.
    pub fn for_id(seed: u64, id: &str) -> Self {
        Self::from_state(mix64(seed, fnv1a64(id.as_bytes())))
    }

    /// Stream for the `index`-th item of an indexed generator.
    pub fn for_index(seed: u64, index: u64) -> Self {
        Self::from_state(mix64(seed, index))
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        avalanche(self.state)
    }

    /// Uniform integer in `0..n` (Lemire's multiply-shift with rejection, so
    /// unbiased). Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
            }
        }
        (m >> 64) as u64
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// Uniform permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}
