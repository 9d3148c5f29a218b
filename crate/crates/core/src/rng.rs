//! Portable seeded generator used for instance sampling.
//!
//! Stream `k` of seed `s` is a xoshiro256** generator whose four state words
//! are splitmix64 outputs number `4k+1 ..= 4k+4` of the splitmix64 sequence
//! started from state `s` (equivalently: a splitmix64 with initial state
//! `s + 4k * 0x9E3779B97F4A7C15 (mod 2^64)` yields the four words in order).
//!
//! A value uniform on `1..=m` is drawn from 64-bit outputs `x` by rejecting
//! every `x < (2^64 - m) mod m` and returning `1 + x mod m`. For `m = 1`
//! nothing is rejected, so each value always consumes at least one output.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(state: u64) -> Self {
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

#[derive(Debug, Clone)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn from_state(s: [u64; 4]) -> Self {
        Self { s }
    }

    /// Independent stream `stream` derived from `seed`.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let start = seed.wrapping_add(stream.wrapping_mul(4).wrapping_mul(GOLDEN_GAMMA));
        let mut sm = SplitMix64::new(start);
        let s = [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()];
        Self { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform integer on `1..=m` by unbiased rejection. `m` must be positive.
    pub fn uniform_inclusive(&mut self, m: u64) -> u64 {
        assert!(m >= 1, "uniform range must be non-empty");
        let threshold = m.wrapping_neg() % m;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return 1 + x % m;
            }
        }
    }
}
