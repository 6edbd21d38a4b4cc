//! Leading singular triplets of a matrix-free operator.
//!
//! Golub–Kahan–Lanczos bidiagonalization with full (two-pass classical
//! Gram–Schmidt) reorthogonalization. The Krylov basis grows until the
//! leading `k` Ritz triplets meet the residual tolerance; breakdowns are
//! continued with a fresh random direction so that repeated and zero
//! singular values are found.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{axpy, dot, jacobi_svd, norm2, DenseSvd, Mat};
use crate::error::{Error, PartialSvd, Result};
use crate::factored::FactoredMatrix;
use crate::operator::LinearOperator;

/// Largest dimension accepted by [`dense_svd_oracle`].
pub const DENSE_ORACLE_MAX_DIM: usize = 512;

/// Couplings below this fraction of the running norm estimate are treated
/// as exact breakdowns.
const BREAKDOWN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SvdOptions {
    /// Residual tolerance relative to σ₁.
    pub tol: f64,
    /// Extra Krylov dimensions requested beyond `k` before the first check.
    pub buffer: usize,
    /// Step budget; `None` means `10·k + 100`.
    pub max_steps: Option<usize>,
    /// Seed for the start vector and breakdown restarts.
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions { tol: 1e-10, buffer: 10, max_steps: None, seed: 0x5eed_1a2c }
    }
}

impl SvdOptions {
    pub fn step_budget(&self, k: usize) -> usize {
        self.max_steps.unwrap_or(10 * k + 100)
    }
}

struct Transposed<'a, Op: ?Sized>(&'a Op);

impl<Op: LinearOperator + ?Sized> LinearOperator for Transposed<'_, Op> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }
    fn ncols(&self) -> usize {
        self.0.nrows()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply_transpose_into(x, y)
    }
    fn apply_transpose_into(&self, y: &[f64], x: &mut [f64]) {
        self.0.apply_into(y, x)
    }
}

/// The `k` leading singular triplets of `op`.
///
/// On budget exhaustion returns [`Error::SvdNotConverged`] carrying the
/// best available triplets.
pub fn truncated_svd<Op: LinearOperator + ?Sized>(op: &Op, k: usize, opts: &SvdOptions) -> Result<FactoredMatrix> {
    let (m, n) = (op.nrows(), op.ncols());
    if k == 0 || k > m.min(n) {
        return Err(Error::invalid("truncated_svd needs 1 <= k <= min(m, n)"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("truncated_svd tolerance must be positive"));
    }
    // Run on the orientation whose right space is the smaller one, so the
    // basis of that space is complete when the step count reaches min(m, n).
    if n <= m {
        lanczos(op, k, opts)
    } else {
        let t = lanczos(&Transposed(op), k, opts);
        match t {
            Ok(f) => Ok(swap_sides(f)),
            Err(Error::SvdNotConverged(mut p)) => {
                p.best = swap_sides(p.best);
                Err(Error::SvdNotConverged(p))
            }
            Err(e) => Err(e),
        }
    }
}

fn swap_sides(f: FactoredMatrix) -> FactoredMatrix {
    let sigma = f.sigma().to_vec();
    let (u, v) = (f.u().clone(), f.v().clone());
    FactoredMatrix::from_parts_unchecked(v, sigma, u)
}

struct Basis {
    dim: usize,
    vecs: Vec<Vec<f64>>,
}

impl Basis {
    fn new(dim: usize) -> Self {
        Basis { dim, vecs: Vec::new() }
    }

    fn orthogonalize(&self, x: &mut [f64]) {
        for _ in 0..2 {
            let h: Vec<f64> = self.vecs.iter().map(|b| dot(b, x)).collect();
            for (b, &hb) in self.vecs.iter().zip(&h) {
                axpy(-hb, b, x);
            }
        }
    }

    /// A random unit vector orthogonal to the current basis.
    fn random_orthogonal(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let mut x: Vec<f64> = (0..self.dim).map(|_| rng.random::<f64>() - 0.5).collect();
            self.orthogonalize(&mut x);
            let nx = norm2(&x);
            if nx > 1e-3 {
                x.iter_mut().for_each(|v| *v /= nx);
                return x;
            }
        }
    }

    fn to_mat(&self) -> Mat {
        let mut data = Vec::with_capacity(self.dim * self.vecs.len());
        for v in &self.vecs {
            data.extend_from_slice(v);
        }
        Mat::from_col_major(self.dim, self.vecs.len(), data).expect("basis layout")
    }
}

fn lanczos<Op: LinearOperator + ?Sized>(op: &Op, k: usize, opts: &SvdOptions) -> Result<FactoredMatrix> {
    let (m, n) = (op.nrows(), op.ncols());
    debug_assert!(n <= m);
    let budget = opts.step_budget(k).min(n).max(k);
    let chunk = opts.buffer.max(k / 4).max(1);
    let mut next_check = (k + opts.buffer).min(budget);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut us = Basis::new(m);
    let mut vs = Basis::new(n);
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut anorm = 0.0f64;

    let mut v = vs.random_orthogonal(&mut rng);
    let mut p = vec![0.0; m];
    op.apply_into(&v, &mut p);
    vs.vecs.push(v);
    push_left(&mut us, &mut alphas, &mut anorm, p, &mut rng);

    loop {
        let j = vs.vecs.len() - 1;
        let mut r = vec![0.0; n];
        op.apply_transpose_into(&us.vecs[j], &mut r);
        axpy(-alphas[j], &vs.vecs[j], &mut r);
        vs.orthogonalize(&mut r);
        let mut beta = norm2(&r);
        anorm = anorm.max(libm::sqrt(alphas[j] * alphas[j] + beta * beta));
        let steps = j + 1;
        if steps == n || beta <= BREAKDOWN * anorm {
            beta = 0.0;
        }

        if steps >= next_check || steps == budget {
            let ritz = ritz_triplets(&alphas, &betas);
            let sigma1 = ritz.s[0];
            let resid: Vec<f64> = (0..k).map(|i| beta * ritz.u[(j, i)].abs()).collect();
            let converged = resid.iter().take_while(|&&r| r <= opts.tol * sigma1).count();
            if converged == k || sigma1 == 0.0 {
                return Ok(extract(&us, &vs, &ritz, k));
            }
            if steps == budget {
                let max_residual = resid.iter().fold(0.0f64, |a, &b| a.max(b)) / sigma1;
                return Err(Error::SvdNotConverged(Box::new(PartialSvd {
                    best: extract(&us, &vs, &ritz, k),
                    converged,
                    steps,
                    max_residual,
                })));
            }
            next_check = (steps + chunk).min(budget);
        }

        if beta == 0.0 {
            v = vs.random_orthogonal(&mut rng);
        } else {
            r.iter_mut().for_each(|x| *x /= beta);
            v = r;
        }
        betas.push(beta);
        let mut p = vec![0.0; m];
        op.apply_into(&v, &mut p);
        axpy(-beta, &us.vecs[j], &mut p);
        vs.vecs.push(v);
        push_left(&mut us, &mut alphas, &mut anorm, p, &mut rng);
    }
}

fn push_left(us: &mut Basis, alphas: &mut Vec<f64>, anorm: &mut f64, mut p: Vec<f64>, rng: &mut ChaCha8Rng) {
    us.orthogonalize(&mut p);
    let alpha = norm2(&p);
    *anorm = anorm.max(alpha);
    if alpha <= BREAKDOWN * *anorm || alpha == 0.0 {
        alphas.push(0.0);
        us.vecs.push(us.random_orthogonal(rng));
    } else {
        p.iter_mut().for_each(|x| *x /= alpha);
        alphas.push(alpha);
        us.vecs.push(p);
    }
}

/// SVD of the upper bidiagonal projection `B` (diagonal `alphas`,
/// superdiagonal `betas`).
fn ritz_triplets(alphas: &[f64], betas: &[f64]) -> DenseSvd {
    let s = alphas.len();
    let mut b = Mat::zeros(s, s);
    for i in 0..s {
        b[(i, i)] = alphas[i];
        if i + 1 < s {
            b[(i, i + 1)] = betas[i];
        }
    }
    jacobi_svd(&b)
}

fn extract(us: &Basis, vs: &Basis, ritz: &DenseSvd, k: usize) -> FactoredMatrix {
    let mut x = ritz.u.clone();
    let mut y = ritz.v.clone();
    x.truncate_cols(k);
    y.truncate_cols(k);
    let u = us.to_mat().matmul(&x);
    let v = vs.to_mat().matmul(&y);
    FactoredMatrix::from_parts_unchecked(u, ritz.s[..k].to_vec(), v)
}

/// Full SVD of a small dense matrix, used as ground truth in tests.
pub fn dense_svd_oracle(m: &Mat) -> Result<DenseSvd> {
    if m.nrows().min(m.ncols()) > DENSE_ORACLE_MAX_DIM {
        return Err(Error::invalid("dense_svd_oracle is limited to min(m, n) <= 512"));
    }
    Ok(jacobi_svd(m))
}
