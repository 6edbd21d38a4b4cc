use crate::error::{Error, Result};
use crate::factored::FactoredMatrix;
use crate::observed::ObservedMatrix;
use crate::shrinkage::apply_t;

use super::{fejer_for, objective, omega_residual_norm, safe_ratio, step_change, Recorder, SolveContext, SolveResult, Status};

#[derive(Clone, Debug, PartialEq)]
pub struct FrsiParams {
    pub r: usize,
    pub eps_1: f64,
    pub it_max: usize,
}

/// Fixed-rank soft-impute: `X^k = T(X^{k−1})` from `X⁰ = 0`.
///
/// Stops once the smaller of the relative residual on `Ω` and the relative
/// iterate change is at most `ε₁`. With a ground truth in the context every
/// trace row carries the Fejér slack of its step.
pub fn frsi(obs: &ObservedMatrix, p: &FrsiParams, ctx: &SolveContext<'_>) -> Result<SolveResult> {
    if p.r == 0 || !(p.eps_1 > 0.0) || p.it_max == 0 {
        return Err(Error::invalid("frsi needs r >= 1, eps_1 > 0 and it_max >= 1"));
    }
    let (m, n) = obs.shape();
    let data_norm = obs.frobenius_norm();
    let mut rec = Recorder::new(ctx);
    let mut x = FactoredMatrix::zeros(m, n);

    for k in 1..=p.it_max {
        let step = || -> Result<_> {
            let (next, rho) = apply_t(&x, obs, p.r, &ctx.svd)?;
            let res = safe_ratio(omega_residual_norm(&next, obs)?, data_norm);
            let change = step_change(&x, &next)?;
            let f = objective(&next, obs, rho)?;
            let slack = fejer_for(ctx, &x, &next, p.r, rho)?;
            Ok((next, rho, res, change, f, slack))
        };
        let (next, rho, res, change, f, slack) = step().map_err(|e| rec.fail(k, e))?;
        rec.push(rho, Some(f), res, change.relative, p.r, next.rank(), slack);
        x = next;
        if res.min(change.relative) <= p.eps_1 {
            return Ok(SolveResult::new(x, k, Status::Converged, rec.trace));
        }
        if rec.stalled(change.relative_max1) {
            return Ok(SolveResult::new(x, k, Status::Stalled, rec.trace));
        }
    }
    Ok(SolveResult::new(x, p.it_max, Status::BudgetExhausted, rec.trace))
}
