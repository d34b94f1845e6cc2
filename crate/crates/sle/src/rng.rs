//! Seeded random number generation with a fixed algorithm.
//!
//! Reproducibility is part of the output contract: the same seed must give
//! the same driving sample on every build and platform. Library generators
//! are free to change between versions, so the generator here is pinned to
//! SplitMix64 (a Weyl sequence stepped by the golden-ratio constant, mixed
//! by two xor-shift-multiply rounds). Gaussian variates come from the
//! Marsaglia polar transform of that stream.

/// SplitMix64 generator. State advances by a fixed odd constant, so every
/// seed yields a full-period 2^64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Derives an independent substream. Splitting keeps consumers (e.g.
    /// increment sampling vs. test-case generation) decoupled: drawing more
    /// from one stream never shifts another.
    pub fn split(&mut self) -> SplitMix64 {
        SplitMix64::new(self.next_u64())
    }
}

/// Standard normal variates via the polar method. Pairs are generated
/// together; the spare is handed out before the underlying stream advances
/// again.
#[derive(Debug, Clone)]
pub struct NormalSource {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(rng: SplitMix64) -> Self {
        NormalSource { rng, spare: None }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(g) = self.spare.take() {
            return g;
        }
        loop {
            let u = 2.0 * self.rng.next_f64() - 1.0;
            let v = 2.0 * self.rng.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }
}
