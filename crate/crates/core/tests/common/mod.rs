#![allow(dead_code)]

use mcomplete_core::rng::{seeded, standard_normal};
use mcomplete_core::{FactoredMatrix, Mat, ObservedMatrix};
use nalgebra::DMatrix;
use rand::Rng;

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Mat {
    let mut rng = seeded(seed);
    Mat::from_fn(rows, cols, |_, _| standard_normal(&mut rng))
}

/// `L Rᵀ` with Gaussian factors of width `r`.
pub fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> FactoredMatrix {
    let l = gaussian(m, r, seed);
    let rt = gaussian(n, r, seed.wrapping_add(7919));
    FactoredMatrix::from_outer(&l, &rt).unwrap()
}

pub fn to_na(a: &Mat) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a.col(j)[i])
}

pub fn from_na(a: &DMatrix<f64>) -> Mat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Singular values from nalgebra, sorted nonincreasing.
pub fn na_singular_values(a: &Mat) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn na_nuclear(a: &Mat) -> f64 {
    to_na(a).singular_values().sum()
}

pub fn na_fro(a: &Mat) -> f64 {
    to_na(a).norm()
}

/// Dense `S_τ` through nalgebra's SVD.
pub fn na_soft_threshold(a: &Mat, tau: f64) -> Mat {
    let svd = to_na(a).svd(true, true);
    let s = svd.singular_values.map(|x| (x - tau).max(0.0));
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    from_na(&(u * DMatrix::from_diagonal(&s) * vt))
}

/// Random orthogonal `n × n` from the QR of a Gaussian matrix.
pub fn na_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    to_na(&gaussian(n, n, seed)).qr().q()
}

/// Each entry kept with probability `1 − missing`, at least one entry.
pub fn random_pattern(m: usize, n: usize, missing: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = seeded(seed);
    let mut pos = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.random::<f64>() >= missing {
                pos.push((i, j));
            }
        }
    }
    if pos.is_empty() {
        pos.push((0, 0));
    }
    pos
}

pub fn mask(obs: &ObservedMatrix) -> Mat {
    let mut out = Mat::zeros(obs.nrows(), obs.ncols());
    for (i, j) in obs.positions() {
        out.col_mut(j)[i] = 1.0;
    }
    out
}

/// Dense `P_Ω(X)` for the pattern of `obs`.
pub fn dense_project(x: &Mat, obs: &ObservedMatrix) -> Mat {
    let w = mask(obs);
    Mat::from_fn(x.nrows(), x.ncols(), |i, j| x.col(j)[i] * w.col(j)[i])
}
