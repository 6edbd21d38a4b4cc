//! Singular-value shrinkage: the soft-thresholding operator, the nuclear-norm
//! proximal map, the fixed-rank step `T` and the quasi-Fejér monitor.

use alloc::vec::Vec;

use crate::dense::{thin_qr, Mat};
use crate::error::{Error, Result};
use crate::factored::{frobenius_distance, FactoredMatrix};
use crate::observed::ObservedMatrix;
use crate::operator::{assemble_iterate_operator, LinearOperator};
use crate::rng::{seeded, standard_normal};
use crate::svd::{truncated_svd, SvdOptions};

/// `S_τ(F) = U diag((σ_i − τ)_+) Vᵀ`.
///
/// Triplets whose singular value does not exceed `τ` are dropped, so the
/// output rank is the count of `σ_i > τ`.
pub fn soft_threshold(f: &FactoredMatrix, tau: f64) -> Result<FactoredMatrix> {
    if !(tau >= 0.0) {
        return Err(Error::invalid("soft_threshold needs tau >= 0"));
    }
    let keep = f.sigma().iter().take_while(|&&s| s > tau).count();
    let mut out = f.truncated(keep);
    let sigma: Vec<f64> = out.sigma().iter().map(|s| s - tau).collect();
    out = FactoredMatrix::from_parts_unchecked(out.u().clone(), sigma, out.v().clone());
    Ok(out)
}

/// `S_τ` applied to computed singular triplets of an `m × n` operator.
///
/// Computed values that tie with `τ` only up to rounding are treated as
/// ties: shifted values at or below `σ₁·ε·max(m, n)` are dropped.
fn shrink_computed(f: &FactoredMatrix, tau: f64, m: usize, n: usize) -> Result<FactoredMatrix> {
    let x = soft_threshold(f, tau)?;
    let smax = f.sigma().first().copied().unwrap_or(0.0);
    let cutoff = smax * f64::EPSILON * (m.max(n) as f64);
    let keep = x.sigma().iter().take_while(|&&s| s > cutoff).count();
    Ok(x.truncated(keep))
}

/// Proximal map of `λ‖·‖_*` with step `t`: `S_{λt}`.
pub fn prox_nuclear(f: &FactoredMatrix, lambda: f64, t: f64) -> Result<FactoredMatrix> {
    if !(lambda > 0.0) || !(t > 0.0) {
        return Err(Error::invalid("prox_nuclear needs lambda > 0 and t > 0"));
    }
    soft_threshold(f, lambda * t)
}

/// Soft-thresholds `op` at its own `(r+1)`-th singular value.
///
/// Returns the thresholded matrix (rank ≤ r) and the threshold `ρ`. When
/// `min(m, n) ≤ r` the operator already has rank ≤ r and `ρ = 0`.
pub fn fixed_rank_threshold<Op: LinearOperator + ?Sized>(
    op: &Op,
    r: usize,
    svd: &SvdOptions,
) -> Result<(FactoredMatrix, f64)> {
    if r == 0 {
        return Err(Error::invalid("target rank must be at least 1"));
    }
    let full = op.nrows().min(op.ncols());
    if full <= r {
        let f = truncated_svd(op, full, svd)?;
        return Ok((shrink_computed(&f, 0.0, op.nrows(), op.ncols())?, 0.0));
    }
    let f = truncated_svd(op, r + 1, svd)?;
    let rho = f.sigma()[r];
    Ok((shrink_computed(&f.truncated(r), rho, op.nrows(), op.ncols())?, rho))
}

/// One fixed-rank soft-impute step:
/// `T(X) = S_ρ(Y)` with `Y = P_Ω(A) + P_Ω^⊥(X)` and `ρ = σ_{r+1}(Y)`.
pub fn apply_t(x: &FactoredMatrix, obs: &ObservedMatrix, r: usize, svd: &SvdOptions) -> Result<(FactoredMatrix, f64)> {
    let op = assemble_iterate_operator(obs, x)?;
    fixed_rank_threshold(&op, r, svd)
}

/// `S_τ(op)` for a fixed `τ`, with an adaptive truncation size.
///
/// Starting from `rank_guess`, computes `rank_guess + 1` triplets; while the
/// last one is still `≥ τ` the guess grows by `bump` (capped at
/// `min(m, n) − 1`) and the SVD is recomputed. Returns the thresholded
/// matrix and the next rank estimate (count of `σ_i > τ`).
pub fn threshold_adaptive<Op: LinearOperator + ?Sized>(
    op: &Op,
    tau: f64,
    rank_guess: usize,
    bump: usize,
    svd: &SvdOptions,
) -> Result<(FactoredMatrix, usize)> {
    if bump == 0 {
        return Err(Error::invalid("rank bump must be at least 1"));
    }
    let full = op.nrows().min(op.ncols());
    let cap = full.saturating_sub(1);
    let mut guess = rank_guess.min(cap);
    loop {
        let f = truncated_svd(op, guess + 1, svd)?;
        if f.sigma()[guess] < tau || guess >= cap {
            let x = shrink_computed(&f, tau, op.nrows(), op.ncols())?;
            let next = x.len();
            return Ok((x, next));
        }
        guess = (guess + bump).min(cap);
    }
}

/// Slack in the quasi-Fejér inequality
/// `‖X^{k+1} − X*‖ ≤ ‖X^k − X*‖ + √r·ρ_k`.
///
/// Nonnegative whenever `x_next = T(x_k)` and `x_star` has rank ≤ r and
/// agrees with the samples.
pub fn fejer_slack(
    x_k: &FactoredMatrix,
    x_next: &FactoredMatrix,
    x_star: &FactoredMatrix,
    r: usize,
    rho_k: f64,
) -> Result<f64> {
    let before = frobenius_distance(x_k, x_star)?;
    let after = frobenius_distance(x_next, x_star)?;
    Ok(before + libm::sqrt(r as f64) * rho_k - after)
}

/// A matrix that is a fixed point of the fixed-rank step for an injected
/// gradient, together with that gradient.
#[derive(Clone, Debug)]
pub struct BadXInstance {
    pub x: FactoredMatrix,
    /// `G = −γ U Vᵀ − U_⊥ Σ_⊥ V_⊥ᵀ`, with `U`, `V` of width `r + 1`.
    pub gradient: Mat,
    pub gamma: f64,
    /// `X − G` in factored form.
    pub shifted: FactoredMatrix,
}

/// Builds `X = U Σ Vᵀ` of rank `r = sigma.len()` and a gradient `G` such
/// that thresholding `X − G` at its `(r+1)`-th singular value returns `X`.
///
/// `sigma_perp` holds the singular values placed on the orthogonal
/// complements (at most `min(m, n) − r − 1` of them); each must be below
/// `gamma`.
pub fn construct_badx_instance(
    m: usize,
    n: usize,
    sigma: &[f64],
    gamma: f64,
    sigma_perp: &[f64],
    seed: u64,
) -> Result<BadXInstance> {
    let r = sigma.len();
    if r == 0 || r + 1 > m.min(n) {
        return Err(Error::invalid("badX construction needs 1 <= r and r + 1 <= min(m, n)"));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma must be positive"));
    }
    if sigma.iter().any(|&s| !(s > 0.0)) || sigma.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("sigma must be positive and nonincreasing"));
    }
    let n_perp = m.min(n) - r - 1;
    if sigma_perp.len() > n_perp {
        return Err(Error::invalid("too many complement singular values for the dimensions"));
    }
    if let Some(&bad) = sigma_perp.iter().find(|&&s| !(s >= 0.0 && s < gamma)) {
        return Err(Error::InvalidArgument(alloc::format!(
            "complement singular value {bad} must lie in [0, gamma = {gamma})"
        )));
    }

    let mut rng = seeded(seed);
    let qm = thin_qr(&Mat::from_fn(m, m, |_, _| standard_normal(&mut rng))).0;
    let qn = thin_qr(&Mat::from_fn(n, n, |_, _| standard_normal(&mut rng))).0;

    let head: Vec<usize> = (0..=r).collect();
    let u = qm.columns(&head);
    let v = qn.columns(&head);
    let mut s_head: Vec<f64> = sigma.to_vec();
    s_head.push(0.0);

    let x = FactoredMatrix::from_parts_unchecked(u.columns(&(0..r).collect::<Vec<_>>()), sigma.to_vec(), v.columns(&(0..r).collect::<Vec<_>>()));

    // X − G = U (Σ + γI) Vᵀ + U_⊥ Σ_⊥ V_⊥ᵀ
    let mut perp: Vec<(f64, usize)> = sigma_perp.iter().copied().enumerate().map(|(i, s)| (s, r + 1 + i)).collect();
    perp.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut cols: Vec<usize> = head.clone();
    let mut shifted_sigma: Vec<f64> = s_head.iter().map(|s| s + gamma).collect();
    for &(s, c) in &perp {
        cols.push(c);
        shifted_sigma.push(s);
    }
    let shifted = FactoredMatrix::from_parts_unchecked(qm.columns(&cols), shifted_sigma, qn.columns(&cols));

    let mut g_left = u.clone();
    g_left.scale_cols(&alloc::vec![-gamma; r + 1]);
    let mut gradient = g_left.matmul_t(&v);
    if !perp.is_empty() {
        let pc: Vec<usize> = perp.iter().map(|p| p.1).collect();
        let mut up = qm.columns(&pc);
        up.scale_cols(&perp.iter().map(|p| -p.0).collect::<Vec<_>>());
        gradient = gradient.add(&up.matmul_t(&qn.columns(&pc)));
    }
    Ok(BadXInstance { x, gradient, gamma, shifted })
}
