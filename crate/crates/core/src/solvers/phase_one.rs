use crate::error::{Error, Result};
use crate::factored::{linear_combination, FactoredMatrix};
use crate::observed::ObservedMatrix;
use crate::operator::assemble_iterate_operator;
use crate::shrinkage::fixed_rank_threshold;

use super::{fejer_for, objective, omega_residual_norm, safe_ratio, step_change, Recorder, SolveContext, SolveTrace, Status};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseOneParams {
    pub r: usize,
    pub eps_rho: f64,
    pub w: usize,
    pub beta: f64,
}

#[derive(Clone, Debug)]
pub struct PhaseOneOutput {
    /// Last assembled momentum iterate `Z^j`.
    pub z: FactoredMatrix,
    /// `ρ_j = σ_{r+1}(P_Ω(A) + P_Ω^⊥(Z^j))`.
    pub rho: f64,
    /// Last thresholded iterate `X^{j−1}` before the exit test (or `X^w`).
    pub x_last: FactoredMatrix,
    /// The index `j` at exit.
    pub iterations: usize,
    /// `Converged` when `ρ` stabilized, `BudgetExhausted` after `w` steps.
    pub status: Status,
    pub trace: SolveTrace,
}

/// `(j − 1)/(j + β)`, zero at `j = 1`.
pub fn momentum_coefficient(j: usize, beta: f64) -> f64 {
    (j as f64 - 1.0) / (j as f64 + beta)
}

/// Accelerated fixed-rank warm start.
///
/// From `X⁰ = Z¹ = 0`: `ρ_j = σ_{r+1}(Y(Z^j))`, exit once
/// `|ρ_j − ρ_{j−1}|/(1 + ρ_{j−1}) < ε_ρ` (the first test always fails),
/// else `X^j = S_{ρ_j}(Y(Z^j))` and
/// `Z^{j+1} = X^j + (j−1)/(j+β)·(X^j − X^{j−1})`.
pub fn phase_one(obs: &ObservedMatrix, p: &PhaseOneParams, ctx: &SolveContext<'_>) -> Result<PhaseOneOutput> {
    if p.r == 0 || !(p.eps_rho > 0.0) || p.w == 0 || !(p.beta > 0.0) {
        return Err(Error::invalid("phase one needs r >= 1, eps_rho > 0, w >= 1 and beta > 0"));
    }
    let mut rec = Recorder::new(ctx);
    run(obs, p, ctx, &mut rec).map(|(z, rho, x_last, iterations, status)| PhaseOneOutput {
        z,
        rho,
        x_last,
        iterations,
        status,
        trace: rec.trace,
    })
}

pub(super) fn run(
    obs: &ObservedMatrix,
    p: &PhaseOneParams,
    ctx: &SolveContext<'_>,
    rec: &mut Recorder<'_>,
) -> Result<(FactoredMatrix, f64, FactoredMatrix, usize, Status)> {
    let (m, n) = obs.shape();
    let data_norm = obs.frobenius_norm();
    let mut x_prev = FactoredMatrix::zeros(m, n);
    let mut z = FactoredMatrix::zeros(m, n);
    let mut rho_prev: Option<f64> = None;

    for j in 1..=p.w {
        let step = || -> Result<(FactoredMatrix, f64)> {
            let op = assemble_iterate_operator(obs, &z)?;
            fixed_rank_threshold(&op, p.r, &ctx.svd)
        };
        let (x, rho) = step().map_err(|e| rec.fail(j, e))?;
        let stable = rho_prev.is_some_and(|prev| (rho - prev).abs() / (1.0 + prev) < p.eps_rho);

        let metrics = || -> Result<_> {
            let current = if stable { &z } else { &x };
            let change = step_change(&x_prev, current)?;
            let slack = if stable { None } else { fejer_for(ctx, &z, &x, p.r, rho)? };
            Ok((
                objective(current, obs, rho)?,
                safe_ratio(omega_residual_norm(current, obs)?, data_norm),
                change,
                current.rank(),
                slack,
            ))
        };
        let (f, res, change, rank, slack) = metrics().map_err(|e| rec.fail(j, e))?;
        rec.push(rho, Some(f), res, change.relative, p.r, rank, slack);

        if stable {
            return Ok((z, rho, x_prev, j, Status::Converged));
        }
        if j == p.w {
            return Ok((z, rho, x, j, Status::BudgetExhausted));
        }
        let c = momentum_coefficient(j, p.beta);
        let z_next = linear_combination(1.0 + c, &x, -c, &x_prev).map_err(|e| rec.fail(j, e))?;
        x_prev = x;
        z = z_next;
        rho_prev = Some(rho);
    }
    unreachable!("w >= 1 guarantees a return inside the loop")
}
