//! Shared fixtures for the criterion benches.

use specsense::rng::Rng;
use specsense::{frame_signal, generate_sinusoid_mix, FrameSet, SymMatrix};

/// Random symmetric matrix with entries in [-1, 1].
pub fn random_sym(n: usize, seed: u64) -> SymMatrix {
    let mut rng = Rng::new(seed);
    SymMatrix::from_fn(n, |_, _| 2.0 * rng.next_f64() - 1.0).expect("valid matrix")
}

/// Random Gaussian frame set.
pub fn random_frames(m: usize, d: usize, seed: u64) -> FrameSet {
    let mut rng = Rng::new(seed);
    FrameSet::from_frames(
        (0..m)
            .map(|_| (0..d).map(|_| rng.next_gaussian()).collect())
            .collect(),
        1,
    )
    .expect("valid frames")
}

/// The three-tone training frames at experiment scale (d = 128, M = 373).
pub fn experiment_frames() -> FrameSet {
    let signal = generate_sinusoid_mix(&[0.1, 0.2, 0.3], &[0.0; 3], 500).expect("signal");
    frame_signal(&signal, 128, 1).expect("frames")
}
