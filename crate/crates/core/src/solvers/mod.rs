//! Iterative completion schemes and the bookkeeping they share.
//!
//! Every solver keeps its iterates as [`FactoredMatrix`] values and reaches
//! the data only through [`SpLrOperator`](crate::operator::SpLrOperator),
//! so nothing of size `m × n` is ever formed.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::dense::norm2;
use crate::error::{Error, Result};
use crate::factored::{frobenius_distance, project_omega, FactoredMatrix};
use crate::observed::ObservedMatrix;
use crate::svd::SvdOptions;

mod config;
mod fpc;
mod frsi;
mod phase_one;
mod phase_two;
mod svt;
mod two_phase;

pub use config::{ConfigError, SolverConfig, TolBundle};
pub use fpc::{fpc, FpcParams, FpcSchedule, FPC_DEFAULT_STEP, FPC_INNER_BUDGET};
pub use frsi::{frsi, FrsiParams};
pub use phase_one::{momentum_coefficient, phase_one, PhaseOneOutput, PhaseOneParams};
pub use phase_two::{phase_two, soft_impute, Momentum, PhaseTwoParams, SoftImputeParams};
pub use svt::{svt, SvtParams};
pub use two_phase::two_phase;

/// Relative iterate change below which an iteration counts towards a stall.
pub const STALL_THRESHOLD: f64 = 1e-15;
/// Consecutive sub-threshold iterations that declare a stall.
pub const STALL_PATIENCE: usize = 3;

/// Source of wall-clock time for traces. The `no_std` core has no clock of
/// its own; [`NoClock`] reports zero.
pub trait Clock {
    /// Seconds since an arbitrary fixed origin; must be nondecreasing.
    fn seconds(&self) -> f64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

/// Settings shared by every solve: inner SVD options, the clock used for
/// traces and an optional ground truth for the Fejér monitor.
pub struct SolveContext<'a> {
    pub svd: SvdOptions,
    pub clock: &'a dyn Clock,
    pub ground_truth: Option<&'a FactoredMatrix>,
}

impl Default for SolveContext<'_> {
    fn default() -> Self {
        SolveContext { svd: SvdOptions::default(), clock: &NoClock, ground_truth: None }
    }
}

impl<'a> SolveContext<'a> {
    pub fn with_clock(mut self, clock: &'a dyn Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_ground_truth(mut self, truth: &'a FactoredMatrix) -> Self {
        self.ground_truth = Some(truth);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    BudgetExhausted,
    Stalled,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::BudgetExhausted => "budget-exhausted",
            Status::Stalled => "stalled",
        }
    }
}

/// One iteration of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// 1-based, counted across phases.
    pub iteration: usize,
    /// 1 or 2 for the two-phase method, 1 for single-phase methods.
    pub phase: u8,
    /// `ρ_j = σ_{r+1}` for fixed-rank steps, the threshold for the others.
    pub rho: f64,
    /// `f_λ` of the iterate, when the method has a `λ`.
    pub objective: Option<f64>,
    /// `‖P_Ω(X − A)‖_F / ‖P_Ω(A)‖_F`
    pub rel_residual: f64,
    /// `‖X^k − X^{k−1}‖_F / ‖X^{k−1}‖_F`
    pub rel_change: f64,
    /// Truncation size the next iteration starts from.
    pub rank_estimate: usize,
    pub rank: usize,
    pub time_s: f64,
    pub fejer_slack: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub x: FactoredMatrix,
    /// Total iterations; for the two-phase method the sum of both phases.
    pub iterations: usize,
    /// `(phase one, phase two)` for the two-phase method.
    pub phase_iterations: Option<(usize, usize)>,
    pub recovered_rank: usize,
    pub status: Status,
    /// Regularization used by the final phase, when there is one.
    pub lambda: Option<f64>,
    pub trace: SolveTrace,
}

impl SolveResult {
    pub(crate) fn new(x: FactoredMatrix, iterations: usize, status: Status, trace: SolveTrace) -> Self {
        let recovered_rank = x.rank();
        SolveResult { x, iterations, phase_iterations: None, recovered_rank, status, lambda: None, trace }
    }
}

/// `f_λ(X) = ½‖P_Ω(A) − P_Ω(X)‖_F² + λ‖X‖_*`
pub fn objective(x: &FactoredMatrix, obs: &ObservedMatrix, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid("objective needs lambda >= 0"));
    }
    let res = omega_residual_norm(x, obs)?;
    Ok(0.5 * res * res + lambda * x.nuclear_norm())
}

/// `‖P_Ω(A − X)‖_F`
pub(crate) fn omega_residual_norm(x: &FactoredMatrix, obs: &ObservedMatrix) -> Result<f64> {
    let mut p = project_omega(x, obs)?;
    for (pi, a) in p.iter_mut().zip(obs.values()) {
        *pi = a - *pi;
    }
    Ok(norm2(&p))
}

/// `num / den` with `0/0 = 0` and `x/0 = ∞`.
pub(crate) fn safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Per-solve bookkeeping: trace, timing, stall counter, error wrapping.
pub(crate) struct Recorder<'c> {
    clock: &'c dyn Clock,
    start: f64,
    pub trace: SolveTrace,
    stall_run: usize,
    phase: u8,
}

impl<'c> Recorder<'c> {
    pub fn new(ctx: &SolveContext<'c>) -> Self {
        Recorder { clock: ctx.clock, start: ctx.clock.seconds(), trace: SolveTrace::default(), stall_run: 0, phase: 1 }
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase;
        self.reset_stall();
    }

    pub fn reset_stall(&mut self) {
        self.stall_run = 0;
    }

    pub fn elapsed(&self) -> f64 {
        (self.clock.seconds() - self.start).max(0.0)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        rho: f64,
        objective: Option<f64>,
        rel_residual: f64,
        rel_change: f64,
        rank_estimate: usize,
        rank: usize,
        fejer_slack: Option<f64>,
    ) {
        let time_s = self.elapsed().max(self.trace.last().map_or(0.0, |r| r.time_s));
        let iteration = self.trace.len() + 1;
        self.trace.records.push(TraceRecord {
            iteration,
            phase: self.phase,
            rho,
            objective,
            rel_residual,
            rel_change,
            rank_estimate,
            rank,
            time_s,
            fejer_slack,
        });
    }

    /// Feeds `‖ΔX‖/max(1, ‖X‖)`; true once the change has stayed below
    /// [`STALL_THRESHOLD`] for [`STALL_PATIENCE`] iterations in a row.
    pub fn stalled(&mut self, change_max1: f64) -> bool {
        if change_max1 < STALL_THRESHOLD {
            self.stall_run += 1;
        } else {
            self.stall_run = 0;
        }
        self.stall_run >= STALL_PATIENCE
    }

    pub fn fail(&self, iteration: usize, cause: Error) -> Error {
        Error::SolveFailed { iteration, cause: Box::new(cause), trace: Box::new(self.trace.clone()) }
    }
}

/// Distances and ratios between consecutive iterates.
pub(crate) struct StepChange {
    /// `‖ΔX‖ / ‖X_prev‖`
    pub relative: f64,
    /// `‖ΔX‖ / max(1, ‖X_prev‖)`
    pub relative_max1: f64,
}

pub(crate) fn step_change(prev: &FactoredMatrix, next: &FactoredMatrix) -> Result<StepChange> {
    let distance = frobenius_distance(next, prev)?;
    let norm = prev.frobenius_norm();
    Ok(StepChange { relative: safe_ratio(distance, norm), relative_max1: distance / norm.max(1.0) })
}

pub(crate) fn fejer_for(
    ctx: &SolveContext<'_>,
    before: &FactoredMatrix,
    after: &FactoredMatrix,
    r: usize,
    rho: f64,
) -> Result<Option<f64>> {
    match ctx.ground_truth {
        Some(star) => Ok(Some(crate::shrinkage::fejer_slack(before, after, star, r, rho)?)),
        None => Ok(None),
    }
}
