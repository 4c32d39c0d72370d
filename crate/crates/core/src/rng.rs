//! Counter-based random streams.
//!
//! A [`NoiseStream`] is a SplitMix64 sequence addressed by position: draw
//! `n` of the stream with key `k` is `mix64(k + (n + 1) * GAMMA)`, which is
//! exactly the `n`-th output of a SplitMix64 generator seeded with `k`.
//! Random access lets a simulation consume position `k * N + i` for the
//! increment of particle `i` at step `k`, independent of evaluation order.
//!
//! Child streams are derived with [`NoiseStream::derive`]:
//! `key' = mix64(key ^ mix64(index.wrapping_add(GAMMA)))`. Monte-Carlo run
//! `r` uses `NoiseStream::new(seed).derive(r)`, so every run can be
//! reproduced in isolation.

use crate::scalar::Scalar;
use crate::special::normal_quantile;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Source of standard normal draws addressed by stream position.
pub trait GaussianSource<S> {
    fn standard_normal(&self, position: u64) -> S;
}

/// Random-access uniform/normal stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseStream {
    key: u64,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self { key: seed }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Independent child stream number `index`.
    pub fn derive(&self, index: u64) -> Self {
        Self {
            key: mix64(self.key ^ mix64(index.wrapping_add(GAMMA))),
        }
    }

    #[inline]
    pub fn bits(&self, position: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(position.wrapping_add(1).wrapping_mul(GAMMA)),
        )
    }

    /// Uniform on the open interval (0, 1), on the midpoint lattice of the
    /// scalar's significand width so neither endpoint is reachable.
    #[inline]
    pub fn uniform<S: Scalar>(&self, position: u64) -> S {
        let m = S::MANTISSA_DIGITS;
        let k = self.bits(position) >> (64 - m);
        let scale = (-(m as f64)).exp2();
        S::lit((k as f64 + 0.5) * scale)
    }

    /// Standard normal by inverse transform of [`uniform`](Self::uniform).
    #[inline]
    pub fn normal<S: Scalar>(&self, position: u64) -> S {
        normal_quantile(self.uniform::<S>(position))
    }
}

impl<S: Scalar> GaussianSource<S> for NoiseStream {
    #[inline]
    fn standard_normal(&self, position: u64) -> S {
        self.normal(position)
    }
}

/// Degenerate source returning 0 everywhere: the noiseless limit of the
/// particle dynamics.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroNoise;

impl<S: Scalar> GaussianSource<S> for ZeroNoise {
    #[inline]
    fn standard_normal(&self, _position: u64) -> S {
        S::zero()
    }
}
