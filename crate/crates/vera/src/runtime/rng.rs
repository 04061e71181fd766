//! Deterministic PRNG behind every sample: xoshiro256** state seeded by a
//! SplitMix64 expansion of a 64-bit value, with rejection-sampled bounded
//! integers so results are identical on every platform.

use sha2::{Digest, Sha256};

/// Derive the 64-bit instance seed for one sample: SHA-256 over the UTF-8
/// bytes of `seed_id`, `generator_id`, and the decimal sample index joined
/// by 0x1F separators, taking the first 8 digest bytes big-endian.
pub fn derive_seed(seed_id: &str, generator_id: &str, sample_idx: u32) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed_id.as_bytes());
    hasher.update([0x1f]);
    hasher.update(generator_id.as_bytes());
    hasher.update([0x1f]);
    hasher.update(sample_idx.to_string().as_bytes());
    let digest = hasher.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("digest is at least 8 bytes"))
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn rol64(x: u64, k: u32) -> u64 {
    x.rotate_left(k)
}

/// xoshiro256** generator exposing the sampling methods available to
/// generator programs.
#[derive(Debug, Clone)]
pub struct SpecRng {
    s: [u64; 4],
}

impl SpecRng {
    pub fn seed(seed: u64) -> Self {
        let mut sm = seed;
        let mut s = [0u64; 4];
        for word in &mut s {
            *word = splitmix64(&mut sm);
        }
        SpecRng { s }
    }

    pub fn next64(&mut self) -> u64 {
        let result = rol64(self.s[1].wrapping_mul(5), 7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = rol64(self.s[3], 45);
        result
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn random(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / 9007199254740992.0; // 2^-53
        (self.next64() >> 11) as f64 * SCALE
    }

    /// Uniform integer in [a, b], both ends inclusive. Unbiased: raw draws
    /// in the tail that does not divide evenly are rejected and redrawn.
    pub fn randint(&mut self, a: i64, b: i64) -> Result<i64, String> {
        if a > b {
            return Err(format!("empty randint range [{a}, {b}]"));
        }
        let span = (b as i128 - a as i128 + 1) as u128;
        if span == 1 << 64 {
            return Ok(a.wrapping_add(self.next64() as i64));
        }
        let n = span as u64;
        let r = ((1u128 << 64) % n as u128) as u64;
        loop {
            let v = self.next64();
            if r == 0 || v < u64::MAX - r + 1 {
                return Ok(a.wrapping_add((v % n) as i64));
            }
        }
    }

    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.random()
    }

    /// Fisher-Yates from the last index down, one bounded draw per swap.
    pub fn shuffle_indices(&mut self, len: usize) -> Vec<(usize, usize)> {
        let mut swaps = Vec::new();
        for i in (1..len).rev() {
            let j = self.randint(0, i as i64).expect("range is non-empty") as usize;
            swaps.push((i, j));
        }
        swaps
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for (i, j) in self.shuffle_indices(xs.len()) {
            xs.swap(i, j);
        }
    }

    /// Box-Muller normal variate; the log argument is redrawn away from 0.
    pub fn gauss(&mut self, mu: f64, sigma: f64) -> f64 {
        let mut u1 = self.random();
        while u1 == 0.0 {
            u1 = self.random();
        }
        let u2 = self.random();
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        mu + sigma * z
    }

    /// Marsaglia-Tsang gamma variate over the same uniform source. Shape
    /// values below 1 are boosted through gamma(alpha + 1) * u^(1/alpha).
    pub fn gammavariate(&mut self, alpha: f64, beta: f64) -> Result<f64, String> {
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(format!("gammavariate requires positive parameters, got ({alpha}, {beta})"));
        }
        if alpha < 1.0 {
            let mut u = self.random();
            while u == 0.0 {
                u = self.random();
            }
            let boosted = self.gammavariate(alpha + 1.0, beta)?;
            return Ok(boosted * u.powf(1.0 / alpha));
        }
        let d = alpha - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.gauss(0.0, 1.0);
            let v = (1.0 + c * x).powi(3);
            if v <= 0.0 {
                continue;
            }
            let u = self.random();
            if u == 0.0 {
                continue;
            }
            if u < 1.0 - 0.0331 * x.powi(4) {
                return Ok(d * v * beta);
            }
            if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
                return Ok(d * v * beta);
            }
        }
    }
}
