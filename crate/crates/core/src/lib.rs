//! Low-rank matrix completion from a subset of observed entries.
//!
//! Iterates are kept in factored form and the partially observed data is
//! accessed through a sparse-plus-low-rank operator, so the solvers never
//! materialise an `m × n` array. The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod data;
pub mod dense;
pub mod error;
pub mod factored;
pub mod observed;
pub mod operator;
pub mod rng;
pub mod shrinkage;
pub mod solvers;
pub mod svd;

pub use data::{gen_synthetic, rer, rmse, split_holdout, RatingsDataset, SyntheticInstance};
pub use dense::{jacobi_svd, thin_qr, DenseSvd, Mat};
pub use error::{Error, PartialSvd, Result};
pub use factored::{frobenius_distance, linear_combination, project_omega, FactoredMatrix};
pub use observed::ObservedMatrix;
pub use operator::{assemble_iterate_operator, LinearOperator, SpLrOperator};
pub use shrinkage::{
    apply_t, construct_badx_instance, fejer_slack, fixed_rank_threshold, prox_nuclear, soft_threshold,
    threshold_adaptive, BadXInstance,
};
pub use solvers::{
    fpc, frsi, objective, phase_one, phase_two, soft_impute, svt, two_phase, Clock, NoClock, SolveContext,
    SolveResult, SolveTrace, SolverConfig, Status, TolBundle, TraceRecord,
};
pub use svd::{dense_svd_oracle, truncated_svd, SvdOptions};
