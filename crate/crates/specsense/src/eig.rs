//! Dense symmetric eigendecomposition and sample covariance construction.
//!
//! Every detector in this crate reduces to spectral analysis of a symmetric
//! matrix: covariance matrices of framed signals and Gram matrices of kernel
//! evaluations. [`sym_eig`] is the production solver (Householder
//! tridiagonalization followed by implicit-shift QL); [`sym_eig_jacobi`] is a
//! cyclic Jacobi solver kept as an independent reference for cross-checks and
//! benchmarks. Both return eigenvalues in descending order with a fixed
//! eigenvector sign convention so downstream statistics are deterministic.

use crate::framing::FrameSet;
use crate::{Error, Result};

/// Relative tolerance for accepting a matrix as symmetric.
const SYMMETRY_TOL: f64 = 1e-12;

/// Dense symmetric matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Validates symmetry (`|a_ij - a_ji| <= 1e-12 * max(1, |a_ij|)`) and
    /// finiteness of all entries.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("matrix order"));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(data.len(), n * n));
        }
        for (idx, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                let _ = idx;
                return Err(Error::NonFinite("matrix entry"));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let a = data[i * n + j];
                let b = data[j * n + i];
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(1.0) {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from a closure over (row, col). The closure is only called on
    /// the upper triangle; the lower is mirrored, so the result is symmetric
    /// by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("matrix order"));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::new(n, data)
    }

    /// Internal constructor for matrices that are symmetric by construction.
    pub(crate) fn from_parts(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric
/// matrix. Eigenvector `j` pairs with eigenvalue `j`.
#[derive(Debug, Clone)]
pub struct SymEig {
    n: usize,
    eigenvalues: Vec<f64>,
    // Row j holds eigenvector j (n rows of length n).
    vectors: Vec<f64>,
}

impl SymEig {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Sample covariance `R = (1/M) sum_i x_i x_i^T` of a frame set.
///
/// No mean subtraction is applied; the framing model treats the sample mean
/// as zero.
pub fn sample_covariance(frames: &FrameSet) -> SymMatrix {
    let d = frames.dim();
    let m = frames.len();
    assert!(m >= 1, "frame set is never empty by construction");
    let mut acc = vec![0.0; d * d];
    for x in frames.iter() {
        for i in 0..d {
            let xi = x[i];
            let row = &mut acc[i * d..(i + 1) * d];
            for (j, r) in row.iter_mut().enumerate().skip(i) {
                *r += xi * x[j];
            }
        }
    }
    let inv_m = 1.0 / m as f64;
    for i in 0..d {
        for j in i..d {
            let v = acc[i * d + j] * inv_m;
            acc[i * d + j] = v;
            acc[j * d + i] = v;
        }
    }
    SymMatrix::from_parts(d, acc)
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Householder tridiagonalization followed by implicit-shift QL iteration,
/// with eigenvectors accumulated row-wise for cache locality. Eigenvalues are
/// sorted descending (stable under ties) and each eigenvector is flipped so
/// its largest-magnitude component is positive (ties broken by lowest index).
pub fn sym_eig(a: &SymMatrix) -> Result<SymEig> {
    let n = a.order();
    // Symmetrize the working copy so tiny construction asymmetries cannot
    // leak into the iteration.
    let mut work = a.data.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (work[i * n + j] + work[j * n + i]);
            work[i * n + j] = v;
            work[j * n + i] = v;
        }
    }

    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut hh = vec![0.0; n];
    tridiagonalize(&mut work, n, &mut d, &mut e, &mut hh);

    // Eigenvector accumulator, row j = eigenvector j of the tridiagonal
    // matrix; starts as the identity.
    let mut w = vec![0.0; n * n];
    for j in 0..n {
        w[j * n + j] = 1.0;
    }
    ql_implicit(&mut d, &mut e, &mut w, n)?;
    back_transform(&work, &hh, &mut w, n);

    Ok(finalize(n, d, w))
}

/// Shared post-processing: descending stable sort plus the sign convention.
fn finalize(n: usize, d: Vec<f64>, w: Vec<f64>) -> SymEig {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).expect("finite eigenvalues"));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(d[src]);
        let row = &w[src * n..(src + 1) * n];
        vectors[dst * n..(dst + 1) * n].copy_from_slice(row);
        fix_sign(&mut vectors[dst * n..(dst + 1) * n]);
    }
    SymEig {
        n,
        eigenvalues,
        vectors,
    }
}

/// Sign convention: largest-magnitude component positive, ties broken by the
/// lowest index. Applying it twice is a no-op.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    let mut best_abs = v[0].abs();
    for (i, &x) in v.iter().enumerate().skip(1) {
        let ax = x.abs();
        if ax > best_abs {
            best = i;
            best_abs = ax;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Householder reduction to tridiagonal form.
///
/// On return `d` holds the diagonal, `e[i]` the subdiagonal entry between
/// rows `i-1` and `i` (`e[0] = 0`), the scaled Householder vectors are left
/// in the rows of `a`, and `hh[i]` holds the corresponding `|u|^2 / 2`
/// (zero where the step was skipped).
fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], hh: &mut [f64]) {
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in (2..n).rev() {
        let l = i - 1;
        let (head, tail) = a.split_at_mut(i * n);
        let row_i = &mut tail[..i]; // a[i][0..i         ]
        let scale: f64 = row_i.iter().map(|v| v.abs()).sum();
        if scale == 0.0 {
            e[i] = row_i[l];
            hh[i] = 0.0;
            continue;
        }
        let inv_scale = 1.0 / scale;
        let mut h = 0.0;
        for v in row_i.iter_mut() {
            *v *= inv_scale;
            h += *v * *v;
        }
        let f = row_i[l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        row_i[l] = f - g;
        // p = A u / h on the leading i x i block.
        for j in 0..i {
            p[j] = dot(&head[j * n..j * n + i], row_i) / h;
        }
        let k = dot(row_i, &p[..i]) / (2.0 * h);
        for j in 0..i {
            q[j] = p[j] - k * row_i[j];
        }
        // Rank-two update A <- A - q u^T - u q^T, keeping the block fully
        // symmetric so later row reads stay contiguous.
        for j in 0..i {
            let uj = row_i[j];
            let qj = q[j];
            let row_j = &mut head[j * n..j * n + i];
            for (t, r) in row_j.iter_mut().enumerate() {
                *r -= qj * row_i[t] + uj * q[t];
            }
        }
        hh[i] = h;
    }
    if n > 1 {
        e[1] = a[n];
        hh[1] = 0.0;
    }
    e[0] = 0.0;
    for j in 0..n {
        d[j] = a[j * n + j];
    }
}

/// Implicit-shift QL iteration on a tridiagonal matrix, accumulating the
/// rotations into the rows of `w`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], w: &mut [f64], n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    // Shift the subdiagonal so e[i] sits between d[i] and d[i+1].
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // Rotate eigenvector rows i and i+1.
                let (wi, wj) = w[i * n..(i + 2) * n].split_at_mut(n);
                for (x, y) in wi.iter_mut().zip(wj.iter_mut()) {
                    f = *y;
                    *y = s * *x + c * f;
                    *x = c * *x - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Applies the stored Householder reflectors to every eigenvector row,
/// turning eigenvectors of the tridiagonal matrix into eigenvectors of the
/// original one.
fn back_transform(a: &[f64], hh: &[f64], w: &mut [f64], n: usize) {
    for i in 2..n {
        let h = hh[i];
        if h == 0.0 {
            continue;
        }
        let u = &a[i * n..i * n + i];
        for row in w.chunks_exact_mut(n) {
            let s = dot(&row[..i], u) / h;
            for (x, &uk) in row[..i].iter_mut().zip(u) {
                *x -= s * uk;
            }
        }
    }
}

/// Leading eigenpair: the largest eigenvalue and its (sign-fixed, unit)
/// eigenvector.
pub fn leading_eigvec(a: &SymMatrix) -> Result<(f64, Vec<f64>)> {
    let eig = sym_eig(a)?;
    Ok((eig.eigenvalues[0], eig.eigenvector(0).to_vec()))
}

/// Cyclic Jacobi eigendecomposition, kept as an independent reference
/// implementation for cross-checking [`sym_eig`].
///
/// Sweeps rotate every off-diagonal pair until the off-diagonal Frobenius
/// norm falls below `1e-12 * ||A||_F`, up to 100 sweeps. Accurate and simple,
/// but several times slower than [`sym_eig`] at the Gram-matrix sizes this
/// crate works with.
pub fn sym_eig_jacobi(a: &SymMatrix) -> Result<SymEig> {
    let n = a.order();
    let mut m = a.data.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    let mut w = vec![0.0; n * n];
    for j in 0..n {
        w[j * n + j] = 1.0;
    }
    let fro = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let threshold = 1e-12 * fro;

    let mut converged = fro == 0.0;
    for _sweep in 0..100 {
        if converged {
            break;
        }
        let off: f64 = {
            let mut acc = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    acc += m[i * n + j] * m[i * n + j];
                }
            }
            (2.0 * acc).sqrt()
        };
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rows p and q of A (columns follow by symmetry).
                for j in 0..n {
                    let mpj = m[p * n + j];
                    let mqj = m[q * n + j];
                    m[p * n + j] = c * mpj - s * mqj;
                    m[q * n + j] = s * mpj + c * mqj;
                }
                for j in 0..n {
                    let mjp = m[j * n + p];
                    let mjq = m[j * n + q];
                    m[j * n + p] = c * mjp - s * mjq;
                    m[j * n + q] = s * mjp + c * mjq;
                }
                // Eigenvector rows.
                let (wp, wq) = if p < q {
                    let (head, tail) = w.split_at_mut(q * n);
                    (&mut head[p * n..p * n + n], &mut tail[..n])
                } else {
                    unreachable!()
                };
                for (x, y) in wp.iter_mut().zip(wq.iter_mut()) {
                    let vp = *x;
                    let vq = *y;
                    *x = c * vp - s * vq;
                    *y = s * vp + c * vq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }
    let d: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    Ok(finalize(n, d, w))
}
