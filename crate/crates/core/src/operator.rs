use alloc::vec;
use alloc::vec::Vec;

use crate::dense::Mat;
use crate::error::{Error, Result};
use crate::factored::{project_omega, FactoredMatrix};
use crate::observed::ObservedMatrix;

/// Matrix-free access to an `m × n` linear map.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `y = A x`
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    /// `x = Aᵀ y`
    fn apply_transpose_into(&self, y: &[f64], x: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols() {
            return Err(Error::LengthMismatch { expected: self.ncols(), found: x.len() });
        }
        let mut y = vec![0.0; self.nrows()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.nrows() {
            return Err(Error::LengthMismatch { expected: self.nrows(), found: y.len() });
        }
        let mut x = vec![0.0; self.ncols()];
        self.apply_transpose_into(y, &mut x);
        Ok(x)
    }
}

impl LinearOperator for Mat {
    fn nrows(&self) -> usize {
        Mat::nrows(self)
    }

    fn ncols(&self) -> usize {
        Mat::ncols(self)
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.matvec(x));
    }

    fn apply_transpose_into(&self, y: &[f64], x: &mut [f64]) {
        x.copy_from_slice(&self.t_matvec(y));
    }
}

impl LinearOperator for FactoredMatrix {
    fn nrows(&self) -> usize {
        FactoredMatrix::nrows(self)
    }

    fn ncols(&self) -> usize {
        FactoredMatrix::ncols(self)
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&FactoredMatrix::apply(self, x));
    }

    fn apply_transpose_into(&self, y: &[f64], x: &mut [f64]) {
        x.copy_from_slice(&FactoredMatrix::apply_transpose(self, y));
    }
}

/// `Z + E`, where `Z` is factored and `E` is supported on the sample
/// pattern `Ω` of `obs`.
///
/// Built by [`assemble_iterate_operator`] this represents
/// `P_Ω(A) + P_Ω^⊥(Z) = Z + P_Ω(A − Z)`; other solvers reuse the same shape
/// with different sparse parts.
#[derive(Clone, Debug)]
pub struct SpLrOperator<'a> {
    obs: &'a ObservedMatrix,
    z: &'a FactoredMatrix,
    residual: Vec<f64>,
}

/// Assembles `P_Ω(A) + P_Ω^⊥(Z)` with the residual `P_Ω(A − Z)` stored
/// in the canonical order of `obs`.
pub fn assemble_iterate_operator<'a>(obs: &'a ObservedMatrix, z: &'a FactoredMatrix) -> Result<SpLrOperator<'a>> {
    let mut residual = project_omega(z, obs)?;
    for (r, a) in residual.iter_mut().zip(obs.values()) {
        *r = a - *r;
    }
    Ok(SpLrOperator { obs, z, residual })
}

impl<'a> SpLrOperator<'a> {
    /// `Z + E` with `E` given by `sparse` on the pattern of `pattern`.
    pub fn from_parts(pattern: &'a ObservedMatrix, z: &'a FactoredMatrix, sparse: Vec<f64>) -> Result<Self> {
        pattern.check_shape(z.shape())?;
        if sparse.len() != pattern.nnz() {
            return Err(Error::LengthMismatch { expected: pattern.nnz(), found: sparse.len() });
        }
        Ok(SpLrOperator { obs: pattern, z, residual: sparse })
    }

    pub fn observed(&self) -> &ObservedMatrix {
        self.obs
    }

    pub fn low_rank(&self) -> &FactoredMatrix {
        self.z
    }

    /// Sparse part on `Ω`, in canonical order.
    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    /// Dense form. Small operators only.
    pub fn to_dense(&self) -> Mat {
        let mut out = self.z.to_dense();
        for ((i, j), e) in self.obs.positions().zip(&self.residual) {
            out[(i, j)] += e;
        }
        out
    }
}

impl LinearOperator for SpLrOperator<'_> {
    fn nrows(&self) -> usize {
        self.obs.nrows()
    }

    fn ncols(&self) -> usize {
        self.obs.ncols()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        if self.z.is_empty() {
            y.iter_mut().for_each(|v| *v = 0.0);
        } else {
            y.copy_from_slice(&self.z.apply(x));
        }
        let rows = self.obs.row_indices();
        let cols = self.obs.col_indices();
        for ((&i, &j), &e) in rows.iter().zip(cols).zip(&self.residual) {
            y[i as usize] += e * x[j as usize];
        }
    }

    fn apply_transpose_into(&self, y: &[f64], x: &mut [f64]) {
        if self.z.is_empty() {
            x.iter_mut().for_each(|v| *v = 0.0);
        } else {
            x.copy_from_slice(&self.z.apply_transpose(y));
        }
        let rows = self.obs.row_indices();
        let cols = self.obs.col_indices();
        for ((&i, &j), &e) in rows.iter().zip(cols).zip(&self.residual) {
            x[j as usize] += e * y[i as usize];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ObservedMatrix {
        ObservedMatrix::from_triplets(3, 2, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 0, 3.0)]).unwrap()
    }

    #[test]
    fn zero_iterate_gives_sparse_samples() {
        let obs = toy();
        let z = FactoredMatrix::zeros(3, 2);
        let op = assemble_iterate_operator(&obs, &z).unwrap();
        assert_eq!(op.residual(), obs.values());
        assert_eq!(op.apply(&[0.0, 1.0]).unwrap(), vec![0.0, 2.0, 0.0]);
        assert_eq!(op.apply(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0, 3.0]);
        assert_eq!(op.apply_transpose(&[1.0, 1.0, 1.0]).unwrap(), vec![4.0, 2.0]);
    }

    #[test]
    fn length_checks() {
        let obs = toy();
        let z = FactoredMatrix::zeros(3, 2);
        let op = assemble_iterate_operator(&obs, &z).unwrap();
        assert!(matches!(op.apply(&[1.0; 3]), Err(Error::LengthMismatch { expected: 2, found: 3 })));
        assert!(matches!(op.apply_transpose(&[1.0; 2]), Err(Error::LengthMismatch { expected: 3, found: 2 })));
    }

    #[test]
    fn assembly_rejects_shape_mismatch() {
        let obs = toy();
        let z = FactoredMatrix::zeros(2, 3);
        assert!(assemble_iterate_operator(&obs, &z).is_err());
    }
}
