use crate::error::{Error, Result};
use crate::factored::{project_omega, FactoredMatrix};
use crate::observed::ObservedMatrix;
use crate::operator::SpLrOperator;
use crate::svd::truncated_svd;
use crate::shrinkage::threshold_adaptive;

use super::{objective, omega_residual_norm, safe_ratio, step_change, Recorder, SolveContext, SolveResult, Status};

/// Step size with a convergence guarantee for the `L = 1` gradient.
pub const FPC_DEFAULT_STEP: f64 = 1.99;
/// Inner iterations allowed per value of `λ`.
pub const FPC_INNER_BUDGET: usize = 100;

/// Continuation schedule `λ_k = max(decay·λ_{k−1}, floor)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FpcSchedule {
    /// `None` selects `λ₀ = ‖P_Ω(A)‖₂`.
    pub lambda0: Option<f64>,
    pub decay: f64,
    pub floor: f64,
}

impl FpcSchedule {
    /// A schedule that stays at `lambda` throughout.
    pub fn constant(lambda: f64) -> Self {
        FpcSchedule { lambda0: Some(lambda), decay: 0.5, floor: lambda }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FpcParams {
    pub schedule: FpcSchedule,
    pub step: f64,
    pub eps_3: f64,
    pub it_max: usize,
    pub inner_budget: usize,
    pub rank_guess: usize,
    pub rank_bump: usize,
}

/// Fixed point continuation.
///
/// For each `λ` of the schedule, iterates
/// `X^{k+1} = S_{λt}(X^k + t·P_Ω(A − X^k))` until
/// `‖X^{k+1} − X^k‖_F / max(1, ‖X^k‖_F) ≤ ε₃` or the inner budget runs out,
/// then moves to the next `λ`. Converged once an inner loop at the floor
/// meets the tolerance. `it_max` bounds the total inner iterations.
pub fn fpc(obs: &ObservedMatrix, p: &FpcParams, ctx: &SolveContext<'_>) -> Result<SolveResult> {
    let s = &p.schedule;
    if !(s.decay > 0.0 && s.decay < 1.0) || !(s.floor > 0.0) {
        return Err(Error::invalid("fpc schedule needs 0 < decay < 1 and floor > 0"));
    }
    if !(p.step > 0.0) || !(p.eps_3 > 0.0) || p.it_max == 0 || p.inner_budget == 0 || p.rank_bump == 0 {
        return Err(Error::invalid("fpc needs step > 0, eps_3 > 0 and positive budgets"));
    }
    let (m, n) = obs.shape();
    let data_norm = obs.frobenius_norm();
    let mut rec = Recorder::new(ctx);

    let mut lambda = match s.lambda0 {
        Some(l) if l > 0.0 => l,
        Some(_) => return Err(Error::invalid("fpc lambda0 must be positive")),
        None => {
            let zero = FactoredMatrix::zeros(m, n);
            let op = SpLrOperator::from_parts(obs, &zero, obs.values().to_vec())?;
            truncated_svd(&op, 1, &ctx.svd).map_err(|e| rec.fail(0, e))?.sigma()[0]
        }
    }
    .max(s.floor);

    let mut x = FactoredMatrix::zeros(m, n);
    let mut rank_est = p.rank_guess;
    let mut total = 0usize;
    loop {
        let mut stage_converged = false;
        for _ in 0..p.inner_budget {
            if total == p.it_max {
                return Ok(SolveResult::new(x, total, Status::BudgetExhausted, rec.trace));
            }
            total += 1;
            let k = total;
            let step = || -> Result<_> {
                let mut sparse = project_omega(&x, obs)?;
                for (e, a) in sparse.iter_mut().zip(obs.values()) {
                    *e = p.step * (a - *e);
                }
                let op = SpLrOperator::from_parts(obs, &x, sparse)?;
                let (next, next_rank) = threshold_adaptive(&op, lambda * p.step, rank_est, p.rank_bump, &ctx.svd)?;
                let change = step_change(&x, &next)?;
                let f = objective(&next, obs, lambda)?;
                let res = safe_ratio(omega_residual_norm(&next, obs)?, data_norm);
                Ok((next, next_rank, change, f, res))
            };
            let (next, next_rank, change, f, res) = step().map_err(|e| rec.fail(k, e))?;
            rank_est = next_rank;
            rec.push(lambda, Some(f), res, change.relative, rank_est, next.rank(), None);
            x = next;
            if change.relative_max1 <= p.eps_3 {
                stage_converged = true;
                break;
            }
            if rec.stalled(change.relative_max1) {
                return Ok(SolveResult::new(x, total, Status::Stalled, rec.trace));
            }
        }
        if stage_converged && lambda <= s.floor {
            let mut out = SolveResult::new(x, total, Status::Converged, rec.trace);
            out.lambda = Some(lambda);
            return Ok(out);
        }
        lambda = (s.decay * lambda).max(s.floor);
        rec.reset_stall();
    }
}
