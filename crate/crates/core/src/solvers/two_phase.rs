use crate::error::{Error, Result};
use crate::observed::ObservedMatrix;

use super::{phase_one, phase_two, Recorder, SolveContext, SolveResult, SolverConfig, Status};

/// Warm start followed by accelerated soft-impute at `λ = ρ`.
///
/// Phase two starts from the warm start's `Z^j`. If phase one ends with
/// `ρ = 0` the problem is already solved at rank `≤ r` and phase two is
/// skipped. The reported iteration count is the sum over both phases, and
/// the trace marks each row with its phase.
pub fn two_phase(obs: &ObservedMatrix, config: &SolverConfig, ctx: &SolveContext<'_>) -> Result<SolveResult> {
    config.validate().map_err(|e| Error::InvalidArgument(e.0))?;
    let mut rec = Recorder::new(ctx);
    let (z, rho, x_last, j, _) = phase_one::run(obs, &config.phase_one(), ctx, &mut rec)?;

    if rho == 0.0 {
        let mut out = SolveResult::new(x_last, j, Status::Converged, rec.trace);
        out.phase_iterations = Some((j, 0));
        return Ok(out);
    }

    rec.set_phase(2);
    let params = config.phase_two(rho);
    let (x, k, status) = phase_two::run(obs, &z, &params, ctx, &mut rec).map_err(|e| match e {
        Error::SolveFailed { iteration, cause, trace } => Error::SolveFailed { iteration: j + iteration, cause, trace },
        other => other,
    })?;
    let mut out = SolveResult::new(x, j + k, status, rec.trace);
    out.phase_iterations = Some((j, k));
    out.lambda = Some(rho);
    Ok(out)
}
