//! Counter-based deterministic PRNG for reproducible initial data.
//!
//! The generator is a pure function of (seed, counter), so streams can be
//! regenerated in any language from the two integers recorded in a run
//! config. Not suitable for anything security-related.

/// SplitMix64 evaluated at `seed + counter * GOLDEN`; the counter advances
/// by one per draw. Identified in configs as `"splitmix64"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: u64) -> u64 {
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed, counter: 0 }
    }

    /// Jump directly to a counter position (independent substreams).
    pub fn at(seed: u64, counter: u64) -> Self {
        CounterRng { seed, counter }
    }

    pub fn next_u64(&mut self) -> u64 {
        let x = splitmix64(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        x
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform draw in [-a, a].
    pub fn symmetric(&mut self, a: f64) -> f64 {
        self.range(-a, a)
    }

    /// Uniform integer draw in [0, n).
    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
