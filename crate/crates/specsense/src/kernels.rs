//! Kernel functions, Gram matrices and feature-space centering.
//!
//! A kernel evaluates the inner product of two frames after an implicit
//! mapping into feature space, so detectors can work with feature-space
//! covariance structure through an M x M Gram matrix instead of explicit
//! feature vectors.

use crate::eig::{dot, SymMatrix};
use crate::framing::FrameSet;
use crate::{Error, Result};

/// A closed description of one kernel function and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `k(x, y) = <x, y>`; the feature space is the original space.
    Linear,
    /// `k(x, y) = (<x, y> + c)^degree`, `c >= 0`, `degree >= 1`.
    Polynomial { c: f64, degree: u32 },
    /// `k(x, y) = exp(-||x - y||^2 / (2 sigma^2))`, `sigma > 0`.
    GaussianRbf { sigma: f64 },
    /// `k(x, y) = exp(-gamma ||x - y||^2)`, `gamma > 0`.
    Rbf { gamma: f64 },
    /// `k(x, y) = exp(-gamma ||x^a - y^a||^b)` with elementwise signed power
    /// `x^a = sign(x) |x|^a`; `gamma, a, b > 0`.
    HeavyTailedRbf { gamma: f64, a: f64, b: f64 },
    /// `k(x, y) = tanh(<x, y> + b)`. Only conditionally positive
    /// semidefinite; included for completeness and excluded from the Mercer
    /// property tests.
    TanhNn { b: f64 },
}

impl KernelSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Polynomial { .. } => "polynomial",
            KernelSpec::GaussianRbf { .. } => "gaussian_rbf",
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::HeavyTailedRbf { .. } => "heavy_tailed_rbf",
            KernelSpec::TanhNn { .. } => "tanh_nn",
        }
    }

    /// True for the Gaussian family (`gaussian_rbf`, `rbf`), the kernels with
    /// `k(y, y) = 1`.
    pub fn is_gaussian_family(&self) -> bool {
        matches!(
            self,
            KernelSpec::GaussianRbf { .. } | KernelSpec::Rbf { .. }
        )
    }

    /// Checks the parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let ok = |name: &'static str, cond: bool, reason: &'static str| {
            if cond {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason })
            }
        };
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { c, degree } => {
                ok("c", c.is_finite() && c >= 0.0, "must be finite and >= 0")?;
                ok("degree", degree >= 1, "must be >= 1")
            }
            KernelSpec::GaussianRbf { sigma } => ok(
                "sigma",
                sigma.is_finite() && sigma > 0.0,
                "must be finite and > 0",
            ),
            KernelSpec::Rbf { gamma } => ok(
                "gamma",
                gamma.is_finite() && gamma > 0.0,
                "must be finite and > 0",
            ),
            KernelSpec::HeavyTailedRbf { gamma, a, b } => {
                ok(
                    "gamma",
                    gamma.is_finite() && gamma > 0.0,
                    "must be finite and > 0",
                )?;
                ok("a", a.is_finite() && a > 0.0, "must be finite and > 0")?;
                ok("b", b.is_finite() && b > 0.0, "must be finite and > 0")
            }
            KernelSpec::TanhNn { b } => ok("b", b.is_finite(), "must be finite"),
        }
    }

    /// Kernel evaluation without parameter or dimension checks; callers
    /// validate once up front.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Polynomial { c, degree } => (dot(x, y) + c).powi(degree as i32),
            KernelSpec::GaussianRbf { sigma } => {
                (-sq_dist(x, y) / (2.0 * sigma * sigma)).exp()
            }
            KernelSpec::Rbf { gamma } => (-gamma * sq_dist(x, y)).exp(),
            KernelSpec::HeavyTailedRbf { gamma, a, b } => {
                let mut acc = 0.0;
                for (&xi, &yi) in x.iter().zip(y) {
                    let d = signed_pow(xi, a) - signed_pow(yi, a);
                    acc += d * d;
                }
                (-gamma * acc.sqrt().powf(b)).exp()
            }
            KernelSpec::TanhNn { b } => (dot(x, y) + b).tanh(),
        }
    }
}

#[inline]
fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let d = xi - yi;
        acc += d * d;
    }
    acc
}

/// Elementwise power extended to negative bases: `sign(x) |x|^a`.
#[inline]
fn signed_pow(x: f64, a: f64) -> f64 {
    if x >= 0.0 {
        x.powf(a)
    } else {
        -(-x).powf(a)
    }
}

/// Evaluates one kernel on a pair of equal-dimension vectors.
pub fn eval_kernel(kernel: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    kernel.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("kernel argument"));
    }
    Ok(kernel.eval_unchecked(x, y))
}

/// Gram matrix `K[i][j] = k(x_i, x_j)` over one frame set; symmetric by
/// construction (only the upper triangle is evaluated).
pub fn gram_matrix(kernel: &KernelSpec, frames: &FrameSet) -> Result<SymMatrix> {
    kernel.validate()?;
    let m = frames.len();
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        let xi = frames.frame(i);
        for j in i..m {
            let v = kernel.eval_unchecked(xi, frames.frame(j));
            data[i * m + j] = v;
            data[j * m + i] = v;
        }
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gram matrix entry"));
    }
    Ok(SymMatrix::from_parts(m, data))
}

/// Cross-Gram matrix between two frame sets, entry `(i, j) = k(a_i, b_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossGram {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CrossGram {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Bilinear form `u^T K v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), self.rows);
        assert_eq!(v.len(), self.cols);
        let mut acc = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            acc += ui * dot(self.row(i), v);
        }
        acc
    }
}

/// Kernel matrix between the frames of `a` and the frames of `b`.
pub fn cross_gram(kernel: &KernelSpec, a: &FrameSet, b: &FrameSet) -> Result<CrossGram> {
    kernel.validate()?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let rows = a.len();
    let cols = b.len();
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let ai = a.frame(i);
        for j in 0..cols {
            data.push(kernel.eval_unchecked(ai, b.frame(j)));
        }
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cross-gram entry"));
    }
    Ok(CrossGram { rows, cols, data })
}

/// Centers a Gram matrix in feature space:
/// `K_c = K - 1_M K - K 1_M + 1_M K 1_M` with `(1_M)_ij = 1/M`.
///
/// Row and column sums of the result vanish (up to rounding). Centering is
/// idempotent.
pub fn center_gram(k: &SymMatrix) -> SymMatrix {
    let m = k.order();
    let mut row_mean = vec![0.0; m];
    for i in 0..m {
        row_mean[i] = k.row(i).iter().sum::<f64>() / m as f64;
    }
    let total_mean = row_mean.iter().sum::<f64>() / m as f64;
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            data[i * m + j] = k.get(i, j) - row_mean[i] - row_mean[j] + total_mean;
        }
    }
    SymMatrix::from_parts(m, data)
}

/// Centers a kernel vector in feature space by subtracting its mean from
/// every entry.
pub fn center_kernel_vector(kt: &[f64]) -> Result<Vec<f64>> {
    if kt.is_empty() {
        return Err(Error::EmptyInput("kernel vector"));
    }
    let mean = kt.iter().sum::<f64>() / kt.len() as f64;
    Ok(kt.iter().map(|v| v - mean).collect())
}
