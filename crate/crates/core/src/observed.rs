use alloc::vec::Vec;

use crate::dense::{norm2, Mat};
use crate::error::{Error, Result};

/// The sampled entries `P_Ω(A)` of an `m × n` matrix.
///
/// Entries are kept in row-major sorted order with unique positions.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedMatrix {
    m: usize,
    n: usize,
    rows: Vec<u32>,
    cols: Vec<u32>,
    values: Vec<f64>,
}

impl ObservedMatrix {
    /// Builds the sample set from `(i, j, value)` triples in any order.
    ///
    /// Duplicated positions are rejected rather than merged.
    pub fn from_triplets(m: usize, n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if m > u32::MAX as usize || n > u32::MAX as usize {
            return Err(Error::invalid("dimensions exceed u32 index range"));
        }
        for &(i, j, _) in &entries {
            if i >= m || j >= n {
                return Err(Error::IndexOutOfBounds { i, j, m, n });
            }
        }
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::DuplicateIndex { i: w[0].0, j: w[0].1 });
        }
        let mut rows = Vec::with_capacity(entries.len());
        let mut cols = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            rows.push(i as u32);
            cols.push(j as u32);
            values.push(v);
        }
        Ok(ObservedMatrix { m, n, rows, cols, values })
    }

    /// Samples every entry of a dense matrix.
    pub fn fully_observed(a: &Mat) -> Self {
        let (m, n) = a.shape();
        let mut entries = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                entries.push((i, j, a[(i, j)]));
            }
        }
        ObservedMatrix::from_triplets(m, n, entries).expect("dense positions are unique")
    }

    /// Samples a dense matrix at the given positions.
    pub fn sample_dense(a: &Mat, positions: &[(usize, usize)]) -> Result<Self> {
        let entries = positions.iter().map(|&(i, j)| {
            if i < a.nrows() && j < a.ncols() {
                Ok((i, j, a[(i, j)]))
            } else {
                Err(Error::IndexOutOfBounds { i, j, m: a.nrows(), n: a.ncols() })
            }
        });
        ObservedMatrix::from_triplets(a.nrows(), a.ncols(), entries.collect::<Result<_>>()?)
    }

    /// Same pattern with different values (length must match).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::LengthMismatch { expected: self.values.len(), found: values.len() });
        }
        Ok(ObservedMatrix { values, ..self.clone() })
    }

    /// Enlarges the nominal shape, keeping all entries.
    pub fn with_shape(mut self, m: usize, n: usize) -> Result<Self> {
        if m < self.m || n < self.n {
            return Err(Error::invalid("cannot shrink an observed matrix"));
        }
        self.m = m;
        self.n = n;
        Ok(self)
    }

    /// Keeps the entries at the given positions of the canonical order.
    /// `idx` must be increasing.
    pub fn subset(&self, idx: &[usize]) -> Self {
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        ObservedMatrix {
            m: self.m,
            n: self.n,
            rows: idx.iter().map(|&t| self.rows[t]).collect(),
            cols: idx.iter().map(|&t| self.cols[t]).collect(),
            values: idx.iter().map(|&t| self.values[t]).collect(),
        }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// `|Ω|`
    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row_indices(&self) -> &[u32] {
        &self.rows
    }

    #[inline]
    pub fn col_indices(&self) -> &[u32] {
        &self.cols
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.values)
            .map(|((&i, &j), &v)| (i as usize, j as usize, v))
    }

    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().zip(&self.cols).map(|(&i, &j)| (i as usize, j as usize))
    }

    /// `‖P_Ω(A)‖_F`
    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.values)
    }

    /// Dense `P_Ω(A)`, zeros elsewhere. Small matrices only.
    pub fn to_dense(&self) -> Mat {
        let mut out = Mat::zeros(self.m, self.n);
        for (i, j, v) in self.iter() {
            out[(i, j)] = v;
        }
        out
    }

    pub(crate) fn check_shape(&self, shape: (usize, usize)) -> Result<()> {
        if shape != self.shape() {
            return Err(Error::ShapeMismatch { expected: self.shape(), found: shape });
        }
        Ok(())
    }
}
