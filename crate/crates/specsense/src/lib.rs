//! Spectrum-sensing detection library.
//!
//! Detects the presence of a primary transmitter in a sampled band by
//! comparing received data against a template learned from clean training
//! signal. Six detectors are provided:
//!
//! | Detector | Template | Statistic |
//! |----------|----------|-----------|
//! | PCA | leading eigenvector of the training covariance | max lag cross-correlation of leading eigenvectors |
//! | kernel PCA | leading Gram eigenvector (feature space) | inner product of feature-space leading eigenvectors |
//! | GLRT | signal subspace of the training covariance | energy / residual-energy ratio |
//! | kernel GLRT | feature-space signal subspace | energy ratio via kernel vectors |
//! | EC | prior signal covariance + noise variance | estimator-correlator quadratic form |
//! | MME | none (blind) | max/min eigenvalue ratio of the received covariance |
//!
//! The [`harness`] module calibrates detection thresholds at a fixed false
//! alarm rate by Monte Carlo and measures detection rates over an SNR grid;
//! all randomness is seeded and runs are bitwise reproducible regardless of
//! worker-thread count.

pub mod detectors;
pub mod eig;
mod error;
pub mod framing;
pub mod harness;
pub mod kernels;
pub mod rng;

pub use detectors::{
    score_ec, score_glrt, score_kglrt, score_kpca, score_mme, score_pca, train_detector,
    train_ec, train_glrt, train_kglrt, train_kpca, train_pca, DetectorSpec, EcModel,
    KglrtTemplate, KpcaTemplate, PcaTemplate, SubspaceTemplate, TrainedDetector,
    DEFAULT_RANK_TOL,
};
pub use eig::{leading_eigvec, sample_covariance, sym_eig, sym_eig_jacobi, SymEig, SymMatrix};
pub use error::{Error, Result};
pub use framing::{
    frame_signal, generate_ar1, generate_gaussian_noise, generate_sinusoid_mix, load_samples,
    mix_at_snr, save_samples, FrameSet, SampleFormat, SampleStream, SnrSpec,
};
pub use harness::{
    calibrate_threshold, roc_curve, run_sweep, segment_similarity, ExperimentConfig, RocCurve,
    SignalSpec, SweepRow, TrialReport,
};
pub use kernels::{
    center_gram, center_kernel_vector, cross_gram, eval_kernel, gram_matrix, KernelSpec,
};
