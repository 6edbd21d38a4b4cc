use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{dot, jacobi_svd, norm2, thin_qr, Mat};
use crate::error::{Error, Result};
use crate::observed::ObservedMatrix;

/// Singular values below this fraction of the largest one are dropped when
/// a sum of factored matrices is recompressed.
const RECOMPRESS_DROP: f64 = 1e-14;

/// A matrix held as `U · diag(σ) · Vᵀ` with orthonormal `U`, `V` and
/// nonincreasing, nonnegative `σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredMatrix {
    u: Mat,
    sigma: Vec<f64>,
    v: Mat,
}

impl FactoredMatrix {
    /// Checks shapes and the ordering of `sigma`. Orthonormality of the
    /// factors is the caller's responsibility; see [`Self::orthonormality_error`].
    pub fn new(u: Mat, sigma: Vec<f64>, v: Mat) -> Result<Self> {
        let k = sigma.len();
        if u.ncols() != k {
            return Err(Error::ShapeMismatch { expected: (u.nrows(), k), found: u.shape() });
        }
        if v.ncols() != k {
            return Err(Error::ShapeMismatch { expected: (v.nrows(), k), found: v.shape() });
        }
        if sigma.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::invalid("singular values must be finite and nonnegative"));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("singular values must be nonincreasing"));
        }
        Ok(FactoredMatrix { u, sigma, v })
    }

    pub(crate) fn from_parts_unchecked(u: Mat, sigma: Vec<f64>, v: Mat) -> Self {
        debug_assert_eq!(u.ncols(), sigma.len());
        debug_assert_eq!(v.ncols(), sigma.len());
        debug_assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
        FactoredMatrix { u, sigma, v }
    }

    /// The `m × n` zero matrix (rank 0, no stored triplets).
    pub fn zeros(m: usize, n: usize) -> Self {
        FactoredMatrix { u: Mat::zeros(m, 0), sigma: Vec::new(), v: Mat::zeros(n, 0) }
    }

    /// SVD of a small dense matrix, dropping singular values at rounding level.
    pub fn from_dense(a: &Mat) -> Self {
        let svd = jacobi_svd(a);
        let smax = svd.s.first().copied().unwrap_or(0.0);
        let cutoff = smax * f64::EPSILON * (a.nrows().max(a.ncols()) as f64);
        let keep = svd.s.iter().take_while(|&&s| s > cutoff).count();
        let mut u = svd.u;
        let mut v = svd.v;
        u.truncate_cols(keep);
        v.truncate_cols(keep);
        let mut s = svd.s;
        s.truncate(keep);
        FactoredMatrix { u, sigma: s, v }
    }

    /// Compresses `L · Rᵀ` (with `L` of shape `m × q` and `R` of shape
    /// `n × q`) into SVD form.
    pub fn from_outer(left: &Mat, right: &Mat) -> Result<Self> {
        if left.ncols() != right.ncols() {
            return Err(Error::ShapeMismatch {
                expected: (right.nrows(), left.ncols()),
                found: right.shape(),
            });
        }
        Ok(compress(left, right).0)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    /// Number of stored triplets (including zero singular values).
    #[inline]
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn u(&self) -> &Mat {
        &self.u
    }

    pub fn v(&self) -> &Mat {
        &self.v
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Count of strictly positive singular values.
    pub fn rank(&self) -> usize {
        self.sigma.iter().filter(|&&s| s > 0.0).count()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.sigma)
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.sigma.iter().sum()
    }

    /// Largest of `‖UᵀU − I‖_max` and `‖VᵀV − I‖_max`.
    pub fn orthonormality_error(&self) -> f64 {
        self.u.orthonormality_error().max(self.v.orthonormality_error())
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (0..self.len()).map(|l| self.u[(i, l)] * self.sigma[l] * self.v[(j, l)]).sum()
    }

    pub fn to_dense(&self) -> Mat {
        let mut us = self.u.clone();
        us.scale_cols(&self.sigma);
        us.matmul_t(&self.v)
    }

    /// Keeps the leading `k` triplets.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.len());
        let mut u = self.u.clone();
        let mut v = self.v.clone();
        u.truncate_cols(k);
        v.truncate_cols(k);
        FactoredMatrix { u, sigma: self.sigma[..k].to_vec(), v }
    }

    /// `a · self`
    pub fn scaled(&self, a: f64) -> Self {
        if a == 0.0 {
            return FactoredMatrix::zeros(self.nrows(), self.ncols());
        }
        let mut out = self.clone();
        out.sigma.iter_mut().for_each(|s| *s *= a.abs());
        if a < 0.0 {
            out.u = out.u.scaled(-1.0);
        }
        out
    }

    /// `self · x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut w = self.v.t_matvec(x);
        w.iter_mut().zip(&self.sigma).for_each(|(wi, s)| *wi *= s);
        self.u.matvec(&w)
    }

    /// `selfᵀ · y`
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut w = self.u.t_matvec(y);
        w.iter_mut().zip(&self.sigma).for_each(|(wi, s)| *wi *= s);
        self.v.matvec(&w)
    }

    /// `U·diag(σ)` and `V`, both laid out row-major, for entry evaluation.
    fn row_major_factors(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.len();
        let (m, n) = self.shape();
        let mut us = vec![0.0; m * k];
        let mut vr = vec![0.0; n * k];
        for l in 0..k {
            let s = self.sigma[l];
            for (i, &x) in self.u.col(l).iter().enumerate() {
                us[i * k + l] = x * s;
            }
            for (j, &x) in self.v.col(l).iter().enumerate() {
                vr[j * k + l] = x;
            }
        }
        (us, vr)
    }
}

/// `X_ij` for every `(i, j) ∈ Ω`, in the canonical order of `omega_of`.
///
/// Evaluated entry by entry from the factors; `X` is never formed.
pub fn project_omega(x: &FactoredMatrix, omega_of: &ObservedMatrix) -> Result<Vec<f64>> {
    omega_of.check_shape(x.shape())?;
    let k = x.len();
    if k == 0 {
        return Ok(vec![0.0; omega_of.nnz()]);
    }
    let (us, vr) = x.row_major_factors();
    Ok(omega_of
        .positions()
        .map(|(i, j)| dot(&us[i * k..(i + 1) * k], &vr[j * k..(j + 1) * k]))
        .collect())
}

/// SVD of `a·X + b·Y` computed from the factors.
pub fn linear_combination(a: f64, x: &FactoredMatrix, b: f64, y: &FactoredMatrix) -> Result<FactoredMatrix> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch { expected: x.shape(), found: y.shape() });
    }
    if b == 0.0 || y.is_empty() {
        return Ok(x.scaled(a));
    }
    if a == 0.0 || x.is_empty() {
        return Ok(y.scaled(b));
    }
    let (left, right) = stacked(a, x, b, y);
    Ok(compress(&left, &right).0)
}

/// `‖X − Y‖_F` without forming either matrix.
///
/// Uses orthogonal bases of the stacked factors, so the cancellation
/// happens in a small core matrix and small differences keep full relative
/// accuracy (a Gram-identity formula would lose half the digits).
pub fn frobenius_distance(x: &FactoredMatrix, y: &FactoredMatrix) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch { expected: x.shape(), found: y.shape() });
    }
    if x.is_empty() {
        return Ok(y.frobenius_norm());
    }
    if y.is_empty() {
        return Ok(x.frobenius_norm());
    }
    let (left, right) = stacked(1.0, x, -1.0, y);
    let (q, r) = thin_qr(&right);
    debug_assert_eq!(q.ncols(), r.nrows());
    // X − Y = L Rᵀ Qᵀ, and Q has orthonormal columns.
    Ok(left.matmul_t(&r).frobenius_norm())
}

fn stacked(a: f64, x: &FactoredMatrix, b: f64, y: &FactoredMatrix) -> (Mat, Mat) {
    let mut ux = x.u.clone();
    ux.scale_cols(&x.sigma.iter().map(|s| a * s).collect::<Vec<_>>());
    let mut uy = y.u.clone();
    uy.scale_cols(&y.sigma.iter().map(|s| b * s).collect::<Vec<_>>());
    (ux.hcat(&uy), x.v.hcat(&y.v))
}

/// `L Rᵀ` → SVD form. Also returns the Frobenius norm of the core.
fn compress(left: &Mat, right: &Mat) -> (FactoredMatrix, f64) {
    let (m, n) = (left.nrows(), right.nrows());
    if left.ncols() == 0 {
        return (FactoredMatrix::zeros(m, n), 0.0);
    }
    let (ql, rl) = thin_qr(left);
    let (qr, rr) = thin_qr(right);
    let core = rl.matmul_t(&rr);
    let fro = core.frobenius_norm();
    let svd = jacobi_svd(&core);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let keep = svd.s.iter().take_while(|&&s| s > smax * RECOMPRESS_DROP).count();
    let mut u = ql.matmul(&svd.u);
    let mut v = qr.matmul(&svd.v);
    u.truncate_cols(keep);
    v.truncate_cols(keep);
    let mut s = svd.s;
    s.truncate(keep);
    (FactoredMatrix { u, sigma: s, v }, fro)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_mat(rows: usize, cols: usize, seed: u64) -> Mat {
        let mut s = seed;
        Mat::from_fn(rows, cols, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> FactoredMatrix {
        FactoredMatrix::from_outer(&lcg_mat(m, r, seed), &lcg_mat(n, r, seed + 1)).unwrap()
    }

    #[test]
    fn zero_projection() {
        let obs = ObservedMatrix::from_triplets(3, 4, vec![(0, 0, 1.0), (2, 3, 2.0)]).unwrap();
        let z = FactoredMatrix::zeros(3, 4);
        assert_eq!(project_omega(&z, &obs).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn projection_shape_mismatch() {
        let obs = ObservedMatrix::from_triplets(3, 4, vec![(0, 0, 1.0)]).unwrap();
        let z = FactoredMatrix::zeros(4, 3);
        assert!(matches!(project_omega(&z, &obs), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn from_outer_matches_dense_product() {
        let l = lcg_mat(12, 3, 5);
        let r = lcg_mat(9, 3, 6);
        let f = FactoredMatrix::from_outer(&l, &r).unwrap();
        assert_eq!(f.rank(), 3);
        assert!(f.orthonormality_error() < 1e-13);
        assert!(f.to_dense().sub(&l.matmul_t(&r)).max_abs() < 1e-13);
    }

    #[test]
    fn combination_and_distance_match_dense() {
        let x = low_rank(20, 15, 3, 1);
        let y = low_rank(20, 15, 4, 7);
        let c = linear_combination(1.5, &x, -0.25, &y).unwrap();
        let dense = x.to_dense().scaled(1.5).sub(&y.to_dense().scaled(0.25));
        assert!(c.to_dense().sub(&dense).max_abs() < 1e-13);
        assert!(c.rank() <= 7);
        let d = frobenius_distance(&x, &y).unwrap();
        let dd = x.to_dense().sub(&y.to_dense()).frobenius_norm();
        assert!((d - dd).abs() < 1e-13 * dd);
    }

    #[test]
    fn distance_of_nearby_matrices_keeps_relative_accuracy() {
        let x = low_rank(30, 25, 4, 11);
        let delta = low_rank(30, 25, 1, 12).scaled(1e-9);
        let y = linear_combination(1.0, &x, 1.0, &delta).unwrap();
        let d = frobenius_distance(&x, &y).unwrap();
        let expect = delta.frobenius_norm();
        assert!((d - expect).abs() < 1e-5 * expect, "{d} vs {expect}");
    }

    #[test]
    fn scaling_by_negative_keeps_sigma_nonnegative() {
        let x = low_rank(6, 5, 2, 3);
        let y = x.scaled(-2.0);
        assert!(y.sigma().iter().all(|&s| s > 0.0));
        assert!(y.to_dense().add(&x.to_dense().scaled(2.0)).max_abs() < 1e-14);
    }
}
