//! Seeded PRNG and normal sampling.
//!
//! SplitMix64 is small, fast, and fully specified, so identical seeds give
//! identical streams on every platform this crate builds for. Normals come
//! from the Box-Muller transform: each pair of uniforms yields a pair of
//! standard normals, and the second of the pair is cached.

/// SplitMix64 generator. The output config name for this sampler is
/// "splitmix64+box-muller".
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on [0, 1), 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1]; safe as a log argument.
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// One Box-Muller step: two uniforms in, two independent standard normals
/// out.
pub fn box_muller_pair(rng: &mut SplitMix64) -> (f64, f64) {
    let u1 = rng.next_f64_open();
    let u2 = rng.next_f64();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Standard normal stream over SplitMix64.
#[derive(Debug, Clone)]
pub struct NormalSource {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            spare: None,
        }
    }

    pub fn rng_mut(&mut self) -> &mut SplitMix64 {
        &mut self.rng
    }

    /// Next standard normal. Consumes two uniforms per generated pair.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (z0, z1) = box_muller_pair(&mut self.rng);
        self.spare = Some(z1);
        z0
    }
}
