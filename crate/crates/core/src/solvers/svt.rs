use alloc::vec;

use crate::error::{Error, Result};
use crate::factored::{project_omega, FactoredMatrix};
use crate::observed::ObservedMatrix;
use crate::operator::SpLrOperator;
use crate::shrinkage::threshold_adaptive;

use super::{safe_ratio, step_change, Recorder, SolveContext, SolveResult, Status};
use crate::dense::norm2;

#[derive(Clone, Debug, PartialEq)]
pub struct SvtParams {
    pub tau: f64,
    pub step: f64,
    pub eps_2: f64,
    pub it_max: usize,
    pub rank_bump: usize,
}

/// Singular value thresholding.
///
/// `X^{k+1} = S_τ(Y^k)`, `Y^{k+1} = Y^k + t·P_Ω(A − X^{k+1})` from `Y⁰ = 0`.
/// `Y` is supported on `Ω` and stored there; the stopping rule is
/// `‖P_Ω(X^k − A)‖_F/‖P_Ω(A)‖_F ≤ ε₂`. Budget exhaustion returns the last
/// primal iterate.
pub fn svt(obs: &ObservedMatrix, p: &SvtParams, ctx: &SolveContext<'_>) -> Result<SolveResult> {
    if !(p.tau > 0.0) || !(p.step > 0.0) || !(p.eps_2 > 0.0) || p.it_max == 0 || p.rank_bump == 0 {
        return Err(Error::invalid("svt needs tau > 0, step > 0, eps_2 > 0, it_max >= 1, rank_bump >= 1"));
    }
    let (m, n) = obs.shape();
    let data_norm = obs.frobenius_norm();
    let zero = FactoredMatrix::zeros(m, n);
    let mut y = vec![0.0; obs.nnz()];
    let mut x = zero.clone();
    let mut rank_est = 0usize;
    let mut rec = Recorder::new(ctx);

    for k in 1..=p.it_max {
        let step = || -> Result<_> {
            let op = SpLrOperator::from_parts(obs, &zero, y.clone())?;
            let (next, next_rank) = threshold_adaptive(&op, p.tau, rank_est, p.rank_bump, &ctx.svd)?;
            let mut resid = project_omega(&next, obs)?;
            for (r, a) in resid.iter_mut().zip(obs.values()) {
                *r = a - *r;
            }
            let change = step_change(&x, &next)?;
            Ok((next, next_rank, resid, change))
        };
        let (next, next_rank, resid, change) = step().map_err(|e| rec.fail(k, e))?;
        rank_est = next_rank;
        let res = safe_ratio(norm2(&resid), data_norm);
        rec.push(p.tau, None, res, change.relative, rank_est, next.rank(), None);
        x = next;
        if res <= p.eps_2 {
            return Ok(SolveResult::new(x, k, Status::Converged, rec.trace));
        }
        // no stall test: while X sits at zero the dual iterate still moves
        for (yi, ri) in y.iter_mut().zip(&resid) {
            *yi += p.step * ri;
        }
    }
    Ok(SolveResult::new(x, p.it_max, Status::BudgetExhausted, rec.trace))
}
