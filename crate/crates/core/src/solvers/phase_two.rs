use crate::error::{Error, Result};
use crate::factored::{linear_combination, FactoredMatrix};
use crate::observed::ObservedMatrix;
use crate::operator::assemble_iterate_operator;
use crate::shrinkage::threshold_adaptive;

use super::{objective, omega_residual_norm, safe_ratio, step_change, Recorder, SolveContext, SolveResult, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Momentum {
    /// `Z^{k+1} = X^k + (k−1)/(k+2)·(X^k − X^{k−1})`
    Nesterov,
    /// `Z^{k+1} = X^k` (plain soft-impute)
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTwoParams {
    /// Initial rank estimate `r₁`.
    pub r: usize,
    pub lambda: f64,
    pub eps_lambda: f64,
    pub it_max: usize,
    pub rank_bump: usize,
    pub momentum: Momentum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoftImputeParams {
    pub lambda: f64,
    pub eps: f64,
    pub it_max: usize,
    pub rank_guess: usize,
    pub rank_bump: usize,
}

/// Accelerated soft-impute at a fixed `λ`, started from `x0`.
///
/// `X^k = S_λ(P_Ω(A) + P_Ω^⊥(Z^k))`, stopping once
/// `min{|f(X^{k−1}) − f(X^k)|/f(X^{k−1}), ‖X^k − X^{k−1}‖/‖X^{k−1}‖} ≤ ε_λ`.
/// The truncation size follows the running rank estimate and grows by
/// `rank_bump` while `σ_{r_k+1} ≥ λ`. On budget exhaustion the iterate with
/// the lowest objective is returned.
pub fn phase_two(
    obs: &ObservedMatrix,
    x0: &FactoredMatrix,
    p: &PhaseTwoParams,
    ctx: &SolveContext<'_>,
) -> Result<SolveResult> {
    let mut rec = Recorder::new(ctx);
    let (x, k, status) = run(obs, x0, p, ctx, &mut rec)?;
    let mut out = SolveResult::new(x, k, status, rec.trace);
    out.lambda = Some(p.lambda);
    Ok(out)
}

/// Plain soft-impute from `X⁰ = 0`; phase two without momentum.
pub fn soft_impute(obs: &ObservedMatrix, p: &SoftImputeParams, ctx: &SolveContext<'_>) -> Result<SolveResult> {
    let (m, n) = obs.shape();
    let params = PhaseTwoParams {
        r: p.rank_guess,
        lambda: p.lambda,
        eps_lambda: p.eps,
        it_max: p.it_max,
        rank_bump: p.rank_bump,
        momentum: Momentum::None,
    };
    phase_two(obs, &FactoredMatrix::zeros(m, n), &params, ctx)
}

pub(super) fn run(
    obs: &ObservedMatrix,
    x0: &FactoredMatrix,
    p: &PhaseTwoParams,
    ctx: &SolveContext<'_>,
    rec: &mut Recorder<'_>,
) -> Result<(FactoredMatrix, usize, Status)> {
    if !(p.lambda > 0.0) || !(p.eps_lambda > 0.0) || p.it_max == 0 || p.rank_bump == 0 {
        return Err(Error::invalid("phase two needs lambda > 0, eps > 0, it_max >= 1, rank_bump >= 1"));
    }
    obs.check_shape(x0.shape())?;
    let data_norm = obs.frobenius_norm();
    let mut x_prev = x0.clone();
    let mut f_prev = objective(x0, obs, p.lambda)?;
    let mut z = x0.clone();
    let mut rank_est = p.r;
    let mut best: Option<(f64, FactoredMatrix)> = None;

    for k in 1..=p.it_max {
        let step = || -> Result<_> {
            let op = assemble_iterate_operator(obs, &z)?;
            let (x, next_rank) = threshold_adaptive(&op, p.lambda, rank_est, p.rank_bump, &ctx.svd)?;
            let f = objective(&x, obs, p.lambda)?;
            let res = safe_ratio(omega_residual_norm(&x, obs)?, data_norm);
            let change = step_change(&x_prev, &x)?;
            Ok((x, next_rank, f, res, change))
        };
        let (x, next_rank, f, res, change) = step().map_err(|e| rec.fail(k, e))?;
        rank_est = next_rank;
        rec.push(p.lambda, Some(f), res, change.relative, rank_est, x.rank(), None);

        let f_ratio = safe_ratio((f_prev - f).abs(), f_prev);
        if f_ratio.min(change.relative) <= p.eps_lambda {
            return Ok((x, k, Status::Converged));
        }
        if rec.stalled(change.relative_max1) {
            return Ok((x, k, Status::Stalled));
        }
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, x.clone()));
        }
        if k == p.it_max {
            break;
        }
        z = match p.momentum {
            Momentum::Nesterov => {
                let c = (k as f64 - 1.0) / (k as f64 + 2.0);
                linear_combination(1.0 + c, &x, -c, &x_prev).map_err(|e| rec.fail(k, e))?
            }
            Momentum::None => x.clone(),
        };
        x_prev = x;
        f_prev = f;
    }
    let (_, x) = best.expect("at least one iteration ran");
    Ok((x, p.it_max, Status::BudgetExhausted))
}
