//! Seedable pseudo-random number generation.
//!
//! The whole simulation is driven by the xoshiro256++ generator seeded via
//! splitmix64, with Box-Muller for Gaussian variates. Everything here is a
//! pure function of the seed, so Monte Carlo trials can derive independent
//! per-trial generators ([`derive_seed`]) and produce bitwise-identical
//! results no matter how work is scheduled across threads.

/// One step of the splitmix64 sequence starting at `x`.
///
/// Also used as a 64-bit mixing function for seed derivation.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one Monte Carlo trial: `base_seed` XOR a splitmix64 hash of the
/// trial context (purpose stream, SNR bit pattern or other context word,
/// trial index).
///
/// Purpose constants keep calibration, held-out and signal-present trials on
/// disjoint streams; hashing the context rather than a grid position makes
/// the seed for a given SNR independent of where it sits in the grid.
#[inline]
pub fn derive_seed(base_seed: u64, purpose: u64, context: u64, trial: u64) -> u64 {
    base_seed ^ splitmix64(purpose ^ splitmix64(context ^ splitmix64(trial)))
}

/// xoshiro256++ generator.
///
/// State is initialized from a 64-bit seed by four splitmix64 steps, the
/// scheme used by the reference implementation.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
    spare_gaussian: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let mut state = [0u64; 4];
        for s in &mut state {
            *s = splitmix64(x);
            x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        }
        Self {
            state,
            spare_gaussian: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw via the Box-Muller transform.
    ///
    /// Draws come in pairs; the second is cached for the next call.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_gaussian = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn matches_reference_xoshiro256plusplus() {
        // rand_xoshiro's seed_from_u64 uses the same splitmix64 state
        // initialization as the reference implementation.
        for seed in [0u64, 1, 7, 0xdead_beef, u64::MAX] {
            let mut ours = Rng::new(seed);
            let mut reference = Xoshiro256PlusPlus::seed_from_u64(seed);
            for _ in 0..64 {
                assert_eq!(ours.next_u64(), reference.next_u64(), "seed {seed}");
            }
        }
    }

    #[test]
    fn splitmix64_known_values() {
        // First three outputs of the splitmix64 sequence for x = 0: the
        // sequence is x += GOLDEN; output = mix(x).
        let mut x = 0u64;
        let mut outs = Vec::new();
        for _ in 0..3 {
            outs.push(splitmix64(x));
            x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        }
        // Cross-checked against the reference C implementation.
        assert_eq!(outs[0], 0xe220_a839_7b1d_cdaf);
        assert_eq!(outs[1], 0x6e78_9e6a_a1b9_65f4);
        assert_eq!(outs[2], 0x06c4_5d18_8009_454f);
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut rng = Rng::new(42);
        for _ in 0..10_000 {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::new(3);
        let n = 200_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.next_gaussian();
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        // 3-sigma bounds: sd(mean) = 1/sqrt(n), sd(var) ~ sqrt(2/n).
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn derive_seed_disjoint_streams() {
        let base = 99;
        let a = derive_seed(base, 1, 0, 0);
        let b = derive_seed(base, 2, 0, 0);
        let c = derive_seed(base, 1, 1, 0);
        let d = derive_seed(base, 1, 0, 1);
        assert!(a != b && a != c && a != d && b != c);
        // Pure function of its arguments.
        assert_eq!(a, derive_seed(base, 1, 0, 0));
    }
}
