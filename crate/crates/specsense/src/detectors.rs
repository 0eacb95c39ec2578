//! Detector training and scoring.
//!
//! Each detector learns a template from a clean training frame set and maps a
//! received frame set to a scalar statistic; larger means "signal present".
//! Thresholds are left to the harness, which calibrates them at a fixed false
//! alarm rate.
//!
//! Eigenvector sign ambiguity is resolved by the `eig` module's sign
//! convention, and the PCA / kernel PCA similarities take absolute values, so
//! every statistic is invariant to sign flips of any eigenvector.

use crate::eig::{dot, leading_eigvec, sample_covariance, sym_eig, SymMatrix};
use crate::framing::FrameSet;
use crate::kernels::{center_kernel_vector, cross_gram, gram_matrix, KernelSpec};
use crate::{Error, Result};

/// Relative eigenvalue cut that defines "nonzero eigenvalues" for subspace
/// detectors.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Statistic cap applied when a projection residual collapses to zero.
const STATISTIC_CAP: f64 = 1e12;

/// Relative residual threshold below which the GLRT family caps its ratio.
const RESIDUAL_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

/// Leading eigenvector of the training covariance; the PCA template.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaTemplate {
    v1: Vec<f64>,
}

impl PcaTemplate {
    /// Validates unit norm.
    pub fn new(v1: Vec<f64>) -> Result<Self> {
        if v1.is_empty() {
            return Err(Error::EmptyInput("template vector"));
        }
        let norm_sq = dot(&v1, &v1);
        if (norm_sq.sqrt() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "v1",
                reason: "template must be a unit vector",
            });
        }
        Ok(Self { v1 })
    }

    pub fn vector(&self) -> &[f64] {
        &self.v1
    }

    pub fn dim(&self) -> usize {
        self.v1.len()
    }
}

/// Trains the PCA template: the leading eigenvector of the sample covariance
/// of the training frames.
pub fn train_pca(training: &FrameSet) -> Result<PcaTemplate> {
    let (_, v1) = leading_eigvec(&sample_covariance(training))?;
    PcaTemplate::new(v1)
}

/// PCA statistic: maximum absolute cross-correlation between the template and
/// the leading eigenvector of the received covariance, over one-sided lags
/// `l = 0..=d` with out-of-range indices contributing zero.
pub fn score_pca(t: &PcaTemplate, received: &FrameSet) -> Result<f64> {
    let d = t.dim();
    if received.dim() != d {
        return Err(Error::DimensionMismatch(received.dim(), d));
    }
    let (_, v_recv) = leading_eigvec(&sample_covariance(received))?;
    Ok(lag_scan(&t.v1, &v_recv))
}

fn lag_scan(template: &[f64], received: &[f64]) -> f64 {
    let d = template.len();
    let mut best = 0.0f64;
    for l in 0..=d {
        let mut acc = 0.0;
        for k in 0..(d - l) {
            acc += template[k] * received[k + l];
        }
        best = best.max(acc.abs());
    }
    best
}

// ---------------------------------------------------------------------------
// Kernel PCA
// ---------------------------------------------------------------------------

/// Kernel PCA template: the leading Gram eigenvector rescaled so the implied
/// feature-space eigenvector has unit norm (`mu1 <beta1, beta1> = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct KpcaTemplate {
    kernel: KernelSpec,
    training_frames: FrameSet,
    beta1: Vec<f64>,
    mu1: f64,
}

impl KpcaTemplate {
    pub fn new(
        kernel: KernelSpec,
        training_frames: FrameSet,
        beta1: Vec<f64>,
        mu1: f64,
    ) -> Result<Self> {
        kernel.validate()?;
        if beta1.len() != training_frames.len() {
            return Err(Error::DimensionMismatch(beta1.len(), training_frames.len()));
        }
        if !(mu1.is_finite() && mu1 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "mu1",
                reason: "leading Gram eigenvalue must be positive",
            });
        }
        if (mu1 * dot(&beta1, &beta1) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "beta1",
                reason: "normalization mu1 <beta1, beta1> = 1 violated",
            });
        }
        Ok(Self {
            kernel,
            training_frames,
            beta1,
            mu1,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn training_frames(&self) -> &FrameSet {
        &self.training_frames
    }

    pub fn beta1(&self) -> &[f64] {
        &self.beta1
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }
}

/// Extracts the leading Gram eigenpair and rescales the eigenvector so the
/// feature-space vector it represents has unit norm.
fn leading_feature_coeffs(kernel: &KernelSpec, frames: &FrameSet) -> Result<(f64, Vec<f64>)> {
    let k = gram_matrix(kernel, frames)?;
    let (mu1, v) = leading_eigvec(&k)?;
    if mu1 <= 1e-12 * k.trace().abs() || mu1 <= 0.0 {
        return Err(Error::DegenerateSpectrum(
            "gram matrix has no usable leading eigenvalue",
        ));
    }
    let scale = 1.0 / mu1.sqrt();
    Ok((mu1, v.into_iter().map(|x| x * scale).collect()))
}

/// Trains the kernel PCA template from clean frames. No Gram centering is
/// applied.
pub fn train_kpca(kernel: &KernelSpec, training: &FrameSet) -> Result<KpcaTemplate> {
    kernel.validate()?;
    if training.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "training",
            reason: "kernel PCA needs at least 2 frames",
        });
    }
    let (mu1, beta1) = leading_feature_coeffs(kernel, training)?;
    KpcaTemplate::new(kernel.clone(), training.clone(), beta1, mu1)
}

/// Kernel PCA statistic: absolute inner product of the feature-space leading
/// eigenvectors of training and received data, evaluated through the
/// cross-Gram matrix as `|beta1^T K^t beta1~|`.
pub fn score_kpca(t: &KpcaTemplate, received: &FrameSet) -> Result<f64> {
    if received.dim() != t.training_frames.dim() {
        return Err(Error::DimensionMismatch(
            received.dim(),
            t.training_frames.dim(),
        ));
    }
    let (_, beta_recv) = leading_feature_coeffs(&t.kernel, received)?;
    let kt = cross_gram(&t.kernel, &t.training_frames, received)?;
    Ok(kt.bilinear(&t.beta1, &beta_recv).abs())
}

// ---------------------------------------------------------------------------
// GLRT
// ---------------------------------------------------------------------------

/// Orthonormal basis of the signal subspace: eigenvectors of the training
/// covariance with eigenvalues above the rank cut.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceTemplate {
    // r rows of length d; row k is basis vector k.
    basis: Vec<f64>,
    dim: usize,
    rank: usize,
}

impl SubspaceTemplate {
    pub fn new(basis: Vec<f64>, dim: usize, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::DegenerateSpectrum("empty signal subspace"));
        }
        if basis.len() != dim * rank {
            return Err(Error::DimensionMismatch(basis.len(), dim * rank));
        }
        let t = Self { basis, dim, rank };
        for j in 0..rank {
            for k in j..rank {
                let ip = dot(t.basis_vector(j), t.basis_vector(k));
                let expect = if j == k { 1.0 } else { 0.0 };
                if (ip - expect).abs() > 1e-9 {
                    return Err(Error::InvalidParameter {
                        name: "basis",
                        reason: "columns must be orthonormal",
                    });
                }
            }
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis_vector(&self, k: usize) -> &[f64] {
        &self.basis[k * self.dim..(k + 1) * self.dim]
    }
}

/// Estimates the signal subspace: eigenvectors of the training covariance
/// whose eigenvalues exceed `rank_tol` times the leading one.
pub fn train_glrt(training: &FrameSet, rank_tol: f64) -> Result<SubspaceTemplate> {
    if !(rank_tol.is_finite() && rank_tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "rank_tol",
            reason: "must be finite and non-negative",
        });
    }
    let eig = sym_eig(&sample_covariance(training))?;
    let lambda1 = eig.eigenvalues()[0];
    if lambda1 <= 0.0 {
        return Err(Error::DegenerateSpectrum(
            "training covariance has no positive eigenvalues",
        ));
    }
    let cut = rank_tol * lambda1;
    let rank = eig.eigenvalues().iter().take_while(|&&l| l > cut).count();
    if rank == 0 {
        return Err(Error::DegenerateSpectrum("all eigenvalues below rank cut"));
    }
    let d = training.dim();
    let mut basis = Vec::with_capacity(rank * d);
    for k in 0..rank {
        basis.extend_from_slice(eig.eigenvector(k));
    }
    SubspaceTemplate::new(basis, d, rank)
}

/// GLRT statistic `||y||^2 / ||(I - TT^T) y||^2`, averaged over frames.
///
/// The residual is guarded: when it falls below `1e-12` of the frame energy
/// the per-frame ratio is capped at `1e12`; a zero frame scores 1 (no
/// evidence either way).
pub fn score_glrt(t: &SubspaceTemplate, received: &FrameSet) -> Result<f64> {
    if received.dim() != t.dim {
        return Err(Error::DimensionMismatch(received.dim(), t.dim));
    }
    let mut acc = 0.0;
    for y in received.iter() {
        let energy = dot(y, y);
        if energy == 0.0 {
            acc += 1.0;
            continue;
        }
        let mut projected = 0.0;
        for k in 0..t.rank {
            let p = dot(t.basis_vector(k), y);
            projected += p * p;
        }
        let residual = energy - projected;
        acc += if residual <= RESIDUAL_TOL * energy {
            STATISTIC_CAP
        } else {
            energy / residual
        };
    }
    Ok(acc / received.len() as f64)
}

// ---------------------------------------------------------------------------
// Kernel GLRT
// ---------------------------------------------------------------------------

/// Feature-space signal subspace for the kernel GLRT: rescaled Gram
/// eigenvectors for all eigenvalues above the rank cut.
#[derive(Debug, Clone, PartialEq)]
pub struct KglrtTemplate {
    kernel: KernelSpec,
    training_frames: FrameSet,
    // count rows of length M; row k holds beta_k (rescaled).
    betas: Vec<f64>,
    count: usize,
    centering_enabled: bool,
}

impl KglrtTemplate {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn training_frames(&self) -> &FrameSet {
        &self.training_frames
    }

    /// Number of retained feature-space basis vectors.
    pub fn rank(&self) -> usize {
        self.count
    }

    pub fn beta(&self, k: usize) -> &[f64] {
        let m = self.training_frames.len();
        &self.betas[k * m..(k + 1) * m]
    }

    pub fn centering_enabled(&self) -> bool {
        self.centering_enabled
    }
}

/// Trains the kernel GLRT template. The kernel must be from the Gaussian
/// family so that `k(y, y) = 1` holds for the identity projection term.
pub fn train_kglrt(
    kernel: &KernelSpec,
    training: &FrameSet,
    rank_tol: f64,
    centering: bool,
) -> Result<KglrtTemplate> {
    kernel.validate()?;
    if !kernel.is_gaussian_family() {
        return Err(Error::KernelNotAllowed {
            kind: kernel.kind_name(),
            reason: "kernel GLRT requires a Gaussian-family kernel (k(y, y) = 1)",
        });
    }
    if training.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "training",
            reason: "kernel GLRT needs at least 2 frames",
        });
    }
    if !(rank_tol.is_finite() && rank_tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "rank_tol",
            reason: "must be finite and non-negative",
        });
    }
    let k = gram_matrix(kernel, training)?;
    let eig = sym_eig(&k)?;
    let mu1 = eig.eigenvalues()[0];
    if mu1 <= 1e-12 * k.trace().abs() || mu1 <= 0.0 {
        return Err(Error::DegenerateSpectrum(
            "gram matrix has no usable leading eigenvalue",
        ));
    }
    let cut = rank_tol * mu1;
    let mut betas = Vec::new();
    let mut count = 0;
    for (j, &mu) in eig.eigenvalues().iter().enumerate() {
        if mu <= cut || mu <= 0.0 {
            break;
        }
        let scale = 1.0 / mu.sqrt();
        betas.extend(eig.eigenvector(j).iter().map(|x| x * scale));
        count += 1;
    }
    if count == 0 {
        return Err(Error::DegenerateSpectrum("all eigenvalues below rank cut"));
    }
    Ok(KglrtTemplate {
        kernel: kernel.clone(),
        training_frames: training.clone(),
        betas,
        count,
        centering_enabled: centering,
    })
}

/// Kernel GLRT statistic, averaged over frames.
///
/// Each received frame is normalized to unit length, its kernel vector
/// against the training frames is formed (optionally centered), and the
/// statistic is `1 / (1 - ||B^T k_T||^2)` with the residual guarded exactly
/// like the linear GLRT.
pub fn score_kglrt(t: &KglrtTemplate, received: &FrameSet) -> Result<f64> {
    let d = t.training_frames.dim();
    if received.dim() != d {
        return Err(Error::DimensionMismatch(received.dim(), d));
    }
    let m = t.training_frames.len();
    let mut kt = vec![0.0; m];
    let mut acc = 0.0;
    for y in received.iter() {
        let norm = dot(y, y).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroFrame("kernel GLRT normalizes received frames"));
        }
        let inv = 1.0 / norm;
        let y_hat: Vec<f64> = y.iter().map(|v| v * inv).collect();
        for (slot, x) in kt.iter_mut().zip(t.training_frames.iter()) {
            *slot = t.kernel.eval_unchecked(&y_hat, x);
        }
        if t.centering_enabled {
            kt = center_kernel_vector(&kt)?;
        }
        let mut projected = 0.0;
        for k in 0..t.count {
            let p = dot(t.beta(k), &kt);
            projected += p * p;
        }
        let residual = 1.0 - projected;
        acc += if residual <= RESIDUAL_TOL {
            STATISTIC_CAP
        } else {
            1.0 / residual
        };
    }
    Ok(acc / received.len() as f64)
}

// ---------------------------------------------------------------------------
// Estimator-correlator
// ---------------------------------------------------------------------------

/// Estimator-correlator model: prior signal covariance, noise variance, and
/// the precomputed weight `W = Sigma_x (Sigma_x + sigma^2 I)^-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EcModel {
    sigma_x: SymMatrix,
    noise_var: f64,
    w: SymMatrix,
}

impl EcModel {
    pub fn sigma_x(&self) -> &SymMatrix {
        &self.sigma_x
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn weight(&self) -> &SymMatrix {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.sigma_x.order()
    }
}

/// Builds the EC model from clean training frames and a known noise variance.
///
/// `W` shares the eigenvectors of `Sigma_x` with eigenvalues
/// `lambda / (lambda + sigma^2)`; tiny negative covariance eigenvalues from
/// rounding are clamped to zero so `W` stays in `[0, 1]`.
pub fn train_ec(training: &FrameSet, noise_var: f64) -> Result<EcModel> {
    if !(noise_var.is_finite() && noise_var > 0.0) {
        return Err(Error::InvalidParameter {
            name: "noise_var",
            reason: "must be finite and positive",
        });
    }
    let sigma_x = sample_covariance(training);
    let eig = sym_eig(&sigma_x)?;
    let d = sigma_x.order();
    let mut w = vec![0.0; d * d];
    for k in 0..d {
        let lambda = eig.eigenvalues()[k].max(0.0);
        let shrink = lambda / (lambda + noise_var);
        if shrink == 0.0 {
            continue;
        }
        let v = eig.eigenvector(k);
        for i in 0..d {
            let s = shrink * v[i];
            let row = &mut w[i * d..(i + 1) * d];
            for (j, r) in row.iter_mut().enumerate().skip(i) {
                *r += s * v[j];
            }
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            w[j * d + i] = w[i * d + j];
        }
    }
    Ok(EcModel {
        sigma_x,
        noise_var,
        w: SymMatrix::from_parts(d, w),
    })
}

/// Estimator-correlator statistic `(1/M) sum_i y_i^T W y_i`.
pub fn score_ec(m: &EcModel, received: &FrameSet) -> Result<f64> {
    let d = m.dim();
    if received.dim() != d {
        return Err(Error::DimensionMismatch(received.dim(), d));
    }
    let mut acc = 0.0;
    for y in received.iter() {
        for i in 0..d {
            acc += y[i] * dot(m.w.row(i), y);
        }
    }
    Ok(acc / received.len() as f64)
}

// ---------------------------------------------------------------------------
// MME
// ---------------------------------------------------------------------------

/// Maximum-minimum eigenvalue statistic of the received covariance; totally
/// blind (no training).
///
/// The smallest eigenvalue is floored at `1e-12` of the largest before
/// dividing, which also covers the singular `M < d` case.
pub fn score_mme(received: &FrameSet) -> Result<f64> {
    let eig = sym_eig(&sample_covariance(received))?;
    let max = eig.eigenvalues()[0];
    if max <= 0.0 {
        return Ok(1.0);
    }
    let min = eig.eigenvalues()[eig.order() - 1].max(1e-12 * max);
    Ok(max / min)
}

// ---------------------------------------------------------------------------
// Uniform dispatch
// ---------------------------------------------------------------------------

/// Which detector to run, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectorSpec {
    Pca,
    Kpca {
        kernel: KernelSpec,
    },
    Glrt {
        rank_tol: f64,
    },
    Kglrt {
        kernel: KernelSpec,
        rank_tol: f64,
        centering: bool,
    },
    Ec,
    Mme,
}

impl DetectorSpec {
    pub fn id(&self) -> &'static str {
        match self {
            DetectorSpec::Pca => "pca",
            DetectorSpec::Kpca { .. } => "kpca",
            DetectorSpec::Glrt { .. } => "glrt",
            DetectorSpec::Kglrt { .. } => "kglrt",
            DetectorSpec::Ec => "ec",
            DetectorSpec::Mme => "mme",
        }
    }

    /// True when training needs the per-SNR noise variance (EC only).
    pub fn needs_noise_variance(&self) -> bool {
        matches!(self, DetectorSpec::Ec)
    }

    pub fn validate(&self) -> Result<()> {
        let tol_ok = |rank_tol: f64| {
            if rank_tol.is_finite() && (0.0..1.0).contains(&rank_tol) {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name: "rank_tol",
                    reason: "must be finite and in [0, 1)",
                })
            }
        };
        match self {
            DetectorSpec::Pca | DetectorSpec::Ec | DetectorSpec::Mme => Ok(()),
            DetectorSpec::Kpca { kernel } => kernel.validate(),
            DetectorSpec::Glrt { rank_tol } => tol_ok(*rank_tol),
            DetectorSpec::Kglrt {
                kernel, rank_tol, ..
            } => {
                kernel.validate()?;
                if !kernel.is_gaussian_family() {
                    return Err(Error::KernelNotAllowed {
                        kind: kernel.kind_name(),
                        reason: "kernel GLRT requires a Gaussian-family kernel",
                    });
                }
                tol_ok(*rank_tol)
            }
        }
    }
}

/// Immutable trained state for any detector; shareable across threads.
#[derive(Debug, Clone)]
pub enum TrainedDetector {
    Pca(PcaTemplate),
    Kpca(KpcaTemplate),
    Glrt(SubspaceTemplate),
    Kglrt(KglrtTemplate),
    Ec(EcModel),
    Mme,
}

impl TrainedDetector {
    pub fn score(&self, received: &FrameSet) -> Result<f64> {
        match self {
            TrainedDetector::Pca(t) => score_pca(t, received),
            TrainedDetector::Kpca(t) => score_kpca(t, received),
            TrainedDetector::Glrt(t) => score_glrt(t, received),
            TrainedDetector::Kglrt(t) => score_kglrt(t, received),
            TrainedDetector::Ec(m) => score_ec(m, received),
            TrainedDetector::Mme => score_mme(received),
        }
    }
}

/// Trains a detector from clean frames. `noise_var` is required for EC and
/// ignored by the rest; MME trains no state at all.
pub fn train_detector(
    spec: &DetectorSpec,
    training: &FrameSet,
    noise_var: Option<f64>,
) -> Result<TrainedDetector> {
    spec.validate()?;
    Ok(match spec {
        DetectorSpec::Pca => TrainedDetector::Pca(train_pca(training)?),
        DetectorSpec::Kpca { kernel } => TrainedDetector::Kpca(train_kpca(kernel, training)?),
        DetectorSpec::Glrt { rank_tol } => TrainedDetector::Glrt(train_glrt(training, *rank_tol)?),
        DetectorSpec::Kglrt {
            kernel,
            rank_tol,
            centering,
        } => TrainedDetector::Kglrt(train_kglrt(kernel, training, *rank_tol, *centering)?),
        DetectorSpec::Ec => {
            let nv = noise_var.ok_or(Error::InvalidParameter {
                name: "noise_var",
                reason: "the estimator-correlator needs the noise variance",
            })?;
            TrainedDetector::Ec(train_ec(training, nv)?)
        }
        DetectorSpec::Mme => TrainedDetector::Mme,
    })
}
