//! Iterative solvers for `min_x ½‖y - Ax‖² + λ Σ_k f((Kx)_k)`.
//!
//! * ISTA and AMP for the separable l1 penalty.
//! * VAMP, which for frozen variances `σx = σz = 1/(2ρ)` and `γ = 1`
//!   reduces to Peaceman–Rachford, in a separable and a TV form.
//! * ADMM and PRS with a fixed stepsize.
//!
//! Every solver starts from all-zero iterates. Steps mutate a state in place
//! and report non-finite iterates as [`crate::Error::Diverged`].

mod kkt;
mod problem;
mod runner;
mod state;
mod steps;

pub use kkt::{kkt_residual, kkt_residual_with, KktOptions};
pub use problem::{objective, Penalty, Problem};
pub use runner::{drive, run, run_with_precomputation, Budget, Solver};
pub use state::{
    init, lipschitz_constant, Algorithm, AmpState, Diagnostics, IstaState, SolverOptions,
    SolverState, SplitState, VampState, DEFAULT_PRS_GAMMA, DEFAULT_VAMP_GAMMA, DENOM_MIN,
    RHO_MIN, SIGMA_MIN,
};
pub use steps::{admm_step, amp_step, ista_step, prs_step, vamp_sep_step, vamp_tv_step};
