//! Counter-based SplitMix64 streams.
//!
//! Every draw is a pure function of `(seed, stream, index)`, so random
//! projection rows can be regenerated on demand and results are
//! bit-identical across platforms.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Independent stream families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    SpatialRademacher,
    SpectralRademacher,
    Noise,
    Sampling,
    Phantom,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::SpatialRademacher => 0x5350_4154_0000_0001,
            Stream::SpectralRademacher => 0x5350_4543_0000_0002,
            Stream::Noise => 0x4e4f_4953_0000_0003,
            Stream::Sampling => 0x5341_4d50_0000_0004,
            Stream::Phantom => 0x5048_414e_0000_0005,
        }
    }
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        Self {
            key: splitmix64(seed ^ stream.tag()),
        }
    }

    #[inline]
    pub fn u64_at(&self, index: u64) -> u64 {
        splitmix64(self.key.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// `true` means `+1`.
    #[inline]
    pub fn sign_at(&self, index: u64) -> bool {
        self.u64_at(index) >> 63 == 0
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform_at(&self, index: u64) -> f64 {
        (self.u64_at(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw number `index`, from Box–Muller on the uniform
    /// pair `(2⌊index/2⌋, 2⌊index/2⌋ + 1)`.
    pub fn gaussian_at(&self, index: u64) -> f64 {
        let pair = index / 2;
        let u1 = 1.0 - self.uniform_at(2 * pair); // (0, 1]
        let u2 = self.uniform_at(2 * pair + 1);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        if index % 2 == 0 {
            r * theta.cos()
        } else {
            r * theta.sin()
        }
    }

    /// Uniform integer in `0..n` (`n > 0`), by multiply-shift.
    pub fn below_at(&self, index: u64, n: usize) -> usize {
        ((self.u64_at(index) as u128 * n as u128) >> 64) as usize
    }
}
