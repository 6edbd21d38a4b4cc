//! Small dense matrices and the kernels the factored representation needs:
//! thin Householder QR and a one-sided Jacobi SVD.
//!
//! Everything here is O(rows · cols²) or worse and is meant for the small
//! core matrices produced by recompression and Lanczos projection, and for
//! test oracles. Large operands never pass through this module.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Column-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Mat::from_fn(r, c, |i, j| rows[i][j])
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Keeps the first `k` columns.
    pub fn truncate_cols(&mut self, k: usize) {
        assert!(k <= self.cols);
        self.cols = k;
        self.data.truncate(k * self.rows);
    }

    pub fn columns(&self, idx: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.rows, idx.len());
        for (dst, &src) in idx.iter().enumerate() {
            out.col_mut(dst).copy_from_slice(self.col(src));
        }
        out
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Mat { rows: self.rows, cols: self.cols + other.cols, data }
    }

    pub fn scale_cols(&mut self, s: &[f64]) {
        assert_eq!(s.len(), self.cols);
        for (j, &sj) in s.iter().enumerate() {
            self.col_mut(j).iter_mut().for_each(|x| *x *= sj);
        }
    }

    pub fn scaled(&self, a: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| a * x).collect() }
    }

    /// `self * other`
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (l, &b) in oc.iter().enumerate() {
                if b != 0.0 {
                    axpy(b, self.col(l), dst);
                }
            }
        }
        out
    }

    /// `selfᵀ * other`
    pub fn t_matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.cols, other.cols, |i, j| dot(self.col(i), other.col(j)))
    }

    /// `self * otherᵀ`
    pub fn matmul_t(&self, other: &Mat) -> Mat {
        self.matmul(&other.transpose())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            axpy(xj, self.col(j), &mut y);
        }
        y
    }

    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.shape(), other.shape());
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.shape(), other.shape());
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// `‖selfᵀ self − I‖_max`
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.t_matmul(self);
        let mut err = 0.0f64;
        for j in 0..g.cols {
            for i in 0..g.rows {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((g[(i, j)] - target).abs());
            }
        }
        err
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators; the order is fixed so results are reproducible
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean norm with scaling, safe against overflow.
pub(crate) fn norm2(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let inv = 1.0 / scale;
    let ss: f64 = x.iter().map(|v| (v * inv) * (v * inv)).sum();
    scale * libm::sqrt(ss)
}

/// Thin QR factorization `A = Q R` with `Q` having `p = min(rows, cols)`
/// orthonormal columns and `R` being `p × cols` upper trapezoidal.
///
/// Householder based, so `Q` stays orthonormal when `A` is rank deficient.
pub fn thin_qr(a: &Mat) -> (Mat, Mat) {
    let (m, n) = a.shape();
    let p = m.min(n);
    let mut r = a.clone();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p);

    for k in 0..p {
        let x = &r.col(k)[k..];
        let alpha = norm2(x);
        let mut v: Vec<f64> = x.to_vec();
        if alpha == 0.0 {
            reflectors.push((v, 0.0));
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm2 = dot(&v, &v);
        let beta = 2.0 / vnorm2;
        for j in k..n {
            let col = &mut r.col_mut(j)[k..];
            let s = beta * dot(&v, col);
            axpy(-s, &v, col);
        }
        // clean the annihilated part exactly
        r[(k, k)] = -sign * alpha;
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
        reflectors.push((v, beta));
    }

    let mut q = Mat::zeros(m, p);
    for j in 0..p {
        q[(j, j)] = 1.0;
    }
    for k in (0..p).rev() {
        let (v, beta) = &reflectors[k];
        if *beta == 0.0 {
            continue;
        }
        for j in 0..p {
            let col = &mut q.col_mut(j)[k..];
            let s = beta * dot(v, col);
            axpy(-s, v, col);
        }
    }

    let rr = Mat::from_fn(p, n, |i, j| if i <= j { r[(i, j)] } else { 0.0 });
    (q, rr)
}

/// Full thin SVD `A = U diag(s) Vᵀ` with `s` sorted nonincreasing,
/// `U` of shape `rows × p` and `V` of shape `cols × p`, `p = min(rows, cols)`.
#[derive(Clone, Debug)]
pub struct DenseSvd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

impl DenseSvd {
    pub fn reconstruct(&self) -> Mat {
        let mut us = self.u.clone();
        us.scale_cols(&self.s);
        us.matmul_t(&self.v)
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Works on the tall orientation; wide inputs are transposed first. Columns
/// belonging to zero singular values are completed to an orthonormal set.
pub fn jacobi_svd(a: &Mat) -> DenseSvd {
    let (m, n) = a.shape();
    if m < n {
        let t = jacobi_svd(&a.transpose());
        return DenseSvd { u: t.v, s: t.s, v: t.u };
    }
    let mut w = a.clone();
    let mut v = Mat::identity(n);
    // Pre-scale so that squared norms cannot overflow or underflow badly.
    let amax = w.max_abs();
    let scale = if amax > 0.0 && amax.is_finite() { 1.0 / amax } else { 1.0 };
    if scale != 1.0 {
        w.data.iter_mut().for_each(|x| *x *= scale);
    }

    let mut norms: Vec<f64> = (0..n).map(|j| dot(w.col(j), w.col(j))).collect();
    let eps = f64::EPSILON;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(w.col(p), w.col(q));
                if gamma.abs() <= eps * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate_cols(&mut w, p, q, c, s);
                rotate_cols(&mut v, p, q, c, s);
                norms[p] = dot(w.col(p), w.col(p));
                norms[q] = dot(w.col(q), w.col(q));
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<(f64, usize)> = (0..n).map(|j| (norm2(w.col(j)), j)).collect();
    sv.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let order: Vec<usize> = sv.iter().map(|&(_, j)| j).collect();
    let mut u = w.columns(&order);
    let v = v.columns(&order);
    let mut s: Vec<f64> = sv.iter().map(|&(x, _)| x).collect();

    let smax = s.first().copied().unwrap_or(0.0);
    let mut deficient = Vec::new();
    for (j, sj) in s.iter_mut().enumerate() {
        if *sj > smax * eps * (m as f64) && *sj > 0.0 {
            let inv = 1.0 / *sj;
            u.col_mut(j).iter_mut().for_each(|x| *x *= inv);
        } else {
            deficient.push(j);
        }
    }
    complete_orthonormal(&mut u, &deficient);
    if scale != 1.0 {
        s.iter_mut().for_each(|x| *x /= scale);
    }
    DenseSvd { u, s, v }
}

fn rotate_cols(m: &mut Mat, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows;
    let (lo, hi) = m.data.split_at_mut(q * rows);
    let cp = &mut lo[p * rows..(p + 1) * rows];
    let cq = &mut hi[..rows];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Replaces the listed columns of `u` with unit vectors orthogonal to every
/// other column, drawing candidates from the standard basis.
pub(crate) fn complete_orthonormal(u: &mut Mat, cols: &[usize]) {
    if cols.is_empty() {
        return;
    }
    let m = u.rows;
    let keep: Vec<usize> = (0..u.cols).filter(|j| !cols.contains(j)).collect();
    let mut basis: Vec<Vec<f64>> = keep.iter().map(|&j| u.col(j).to_vec()).collect();
    let mut candidate = 0usize;
    for &j in cols {
        loop {
            assert!(candidate < m, "cannot complete an orthonormal basis");
            let mut x = vec![0.0; m];
            x[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for b in &basis {
                    let h = dot(b, &x);
                    axpy(-h, b, &mut x);
                }
            }
            let nx = norm2(&x);
            if nx > 0.5 {
                x.iter_mut().for_each(|v| *v /= nx);
                u.col_mut(j).copy_from_slice(&x);
                basis.push(x);
                break;
            }
        }
    }
}
