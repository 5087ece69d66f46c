//! Counter-based uniform generator (Philox4x32-10).
//!
//! Every draw is a pure function of `(seed, stream, counter)`, so a sample
//! matrix can be materialized in any order, by any number of workers, and
//! still come out bit-identical.

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32-10 block: four 32-bit words for a 128-bit counter.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(W0);
            k[1] = k[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, c[0]);
        let (hi1, lo1) = mulhilo(M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// A keyed family of independent uniform streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: [u32; 2],
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: [seed as u32, (seed >> 32) as u32],
        }
    }

    /// Raw 64 bits for `(stream, index)`.
    #[inline]
    pub fn bits(&self, stream: u64, index: u64) -> u64 {
        let out = philox4x32(
            [index as u32, (index >> 32) as u32, stream as u32, (stream >> 32) as u32],
            self.key,
        );
        (u64::from(out[0]) << 32) | u64::from(out[1])
    }

    /// Uniform draw strictly inside `(0, 1)`.
    #[inline]
    pub fn uniform(&self, stream: u64, index: u64) -> f64 {
        to_open_unit(self.bits(stream, index))
    }

    /// Uniform integer in `0..n` (Lemire's multiply-shift; bias < n / 2^64).
    #[inline]
    pub fn below(&self, stream: u64, index: u64, n: u64) -> u64 {
        ((u128::from(self.bits(stream, index)) * u128::from(n)) >> 64) as u64
    }
}

/// Maps 64 random bits to the open interval `(0, 1)` on a grid of
/// spacing `2^-52`.
#[inline]
pub fn to_open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
