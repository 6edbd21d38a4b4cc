use alloc::format;
use alloc::string::String;

use crate::observed::ObservedMatrix;

use super::fpc::{FpcParams, FpcSchedule, FPC_DEFAULT_STEP, FPC_INNER_BUDGET};
use super::frsi::FrsiParams;
use super::phase_one::PhaseOneParams;
use super::phase_two::{Momentum, PhaseTwoParams, SoftImputeParams};
use super::svt::SvtParams;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid solver configuration: {0}")]
pub struct ConfigError(pub String);

/// Named tolerance presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TolBundle {
    /// Synthetic experiments: `ε_ρ = ε₁ = ε₂ = 1e-4`, `ε₃ = 1e-3`, `ε_λ = 1e-6`.
    PaperSynth,
    /// MovieLens experiments: `ε_ρ = ε₁ = ε₂ = ε₃ = 1e-3`, `ε_λ = 1e-2`.
    PaperMl,
}

impl TolBundle {
    pub fn name(self) -> &'static str {
        match self {
            TolBundle::PaperSynth => "paper-synth",
            TolBundle::PaperMl => "paper-ml",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "paper-synth" => Some(TolBundle::PaperSynth),
            "paper-ml" => Some(TolBundle::PaperMl),
            _ => None,
        }
    }
}

/// Every tolerance, budget and step parameter of the solvers.
///
/// `tau_svt`, `step_svt` and `lambda` are instance dependent; `None` selects
/// the default rule documented on the corresponding accessor.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub r: usize,
    pub eps_rho: f64,
    pub eps_1: f64,
    pub eps_2: f64,
    pub eps_3: f64,
    pub eps_lambda: f64,
    /// Phase-one budget.
    pub w: usize,
    /// Phase-two and baseline budget.
    pub it_max: usize,
    pub beta: f64,
    pub tau_svt: Option<f64>,
    pub step_svt: Option<f64>,
    /// Fixed regularization for soft-impute (phase two takes it from phase one).
    pub lambda: Option<f64>,
    pub fpc_decay: f64,
    pub fpc_floor: f64,
    pub rank_bump: usize,
}

impl SolverConfig {
    pub fn with_bundle(r: usize, bundle: TolBundle) -> Self {
        let (eps, eps_3, eps_lambda) = match bundle {
            TolBundle::PaperSynth => (1e-4, 1e-3, 1e-6),
            TolBundle::PaperMl => (1e-3, 1e-3, 1e-2),
        };
        SolverConfig {
            r,
            eps_rho: eps,
            eps_1: eps,
            eps_2: eps,
            eps_3,
            eps_lambda,
            w: 500,
            it_max: 500,
            beta: 2.0,
            tau_svt: None,
            step_svt: None,
            lambda: None,
            fpc_decay: 0.25,
            fpc_floor: 0.01,
            rank_bump: 5,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |msg: String| Err(ConfigError(msg));
        if self.r == 0 {
            return err("r must be at least 1".into());
        }
        for (name, v) in [
            ("eps_rho", self.eps_rho),
            ("eps_1", self.eps_1),
            ("eps_2", self.eps_2),
            ("eps_3", self.eps_3),
            ("eps_lambda", self.eps_lambda),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.w == 0 || self.it_max == 0 {
            return err("w and it_max must be at least 1".into());
        }
        if !(self.beta > 0.0) {
            return err(format!("beta must be positive, got {}", self.beta));
        }
        for (name, v) in [("tau_svt", self.tau_svt), ("step_svt", self.step_svt), ("lambda", self.lambda)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return err(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if !(self.fpc_decay > 0.0 && self.fpc_decay < 1.0) {
            return err(format!("fpc_decay must lie in (0, 1), got {}", self.fpc_decay));
        }
        if !(self.fpc_floor > 0.0) {
            return err(format!("fpc_floor must be positive, got {}", self.fpc_floor));
        }
        if self.rank_bump == 0 {
            return err("rank_bump must be at least 1".into());
        }
        Ok(())
    }

    pub fn phase_one(&self) -> PhaseOneParams {
        PhaseOneParams { r: self.r, eps_rho: self.eps_rho, w: self.w, beta: self.beta }
    }

    /// Phase two at regularization `lambda` (normally phase one's `ρ`).
    pub fn phase_two(&self, lambda: f64) -> PhaseTwoParams {
        PhaseTwoParams {
            r: self.r,
            lambda,
            eps_lambda: self.eps_lambda,
            it_max: self.it_max,
            rank_bump: self.rank_bump,
            momentum: Momentum::Nesterov,
        }
    }

    pub fn frsi(&self) -> FrsiParams {
        FrsiParams { r: self.r, eps_1: self.eps_1, it_max: self.it_max }
    }

    /// SVT threshold `τ` (default `5·√(mn)`, i.e. `5n` for square matrices)
    /// and step (default `1.2·mn/|Ω|`).
    pub fn svt(&self, obs: &ObservedMatrix) -> SvtParams {
        let (m, n) = obs.shape();
        let mn = (m as f64) * (n as f64);
        SvtParams {
            tau: self.tau_svt.unwrap_or(5.0 * libm::sqrt(mn)),
            step: self.step_svt.unwrap_or(1.2 * mn / obs.nnz().max(1) as f64),
            eps_2: self.eps_2,
            it_max: self.it_max,
            rank_bump: self.rank_bump,
        }
    }

    /// FPC with `λ₀ = ‖P_Ω(A)‖₂` and step 1.99.
    pub fn fpc(&self) -> FpcParams {
        FpcParams {
            schedule: FpcSchedule { lambda0: None, decay: self.fpc_decay, floor: self.fpc_floor },
            step: FPC_DEFAULT_STEP,
            eps_3: self.eps_3,
            it_max: self.it_max,
            inner_budget: FPC_INNER_BUDGET,
            rank_guess: self.r,
            rank_bump: self.rank_bump,
        }
    }

    /// Soft-impute at `self.lambda`; `None` if no `λ` is configured.
    pub fn soft_impute(&self) -> Option<SoftImputeParams> {
        self.lambda.map(|lambda| SoftImputeParams {
            lambda,
            eps: self.eps_lambda,
            it_max: self.it_max,
            rank_guess: self.r,
            rank_bump: self.rank_bump,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundles() {
        let s = SolverConfig::with_bundle(10, TolBundle::PaperSynth);
        assert_eq!((s.eps_rho, s.eps_1, s.eps_2, s.eps_3, s.eps_lambda), (1e-4, 1e-4, 1e-4, 1e-3, 1e-6));
        let m = SolverConfig::with_bundle(130, TolBundle::PaperMl);
        assert_eq!((m.eps_rho, m.eps_1, m.eps_2, m.eps_3, m.eps_lambda), (1e-3, 1e-3, 1e-3, 1e-3, 1e-2));
        assert!(s.validate().is_ok());
        assert_eq!(TolBundle::from_name("paper-ml"), Some(TolBundle::PaperMl));
    }

    #[test]
    fn validation_rejects_bad_values() {
        let base = SolverConfig::with_bundle(5, TolBundle::PaperSynth);
        assert!(SolverConfig { beta: 0.0, ..base.clone() }.validate().is_err());
        assert!(SolverConfig { eps_3: -1.0, ..base.clone() }.validate().is_err());
        assert!(SolverConfig { rank_bump: 0, ..base.clone() }.validate().is_err());
        assert!(SolverConfig { w: 0, ..base.clone() }.validate().is_err());
        assert!(SolverConfig { r: 0, ..base }.validate().is_err());
    }

    #[test]
    fn svt_defaults_follow_dimensions() {
        let obs = ObservedMatrix::from_triplets(10, 10, (0..40).map(|t| (t / 10, t % 10, 1.0)).collect()).unwrap();
        let p = SolverConfig::with_bundle(2, TolBundle::PaperSynth).svt(&obs);
        assert!((p.tau - 50.0).abs() < 1e-12);
        assert!((p.step - 3.0).abs() < 1e-12);
    }
}
