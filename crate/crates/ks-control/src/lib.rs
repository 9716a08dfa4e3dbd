//! Finite-element solver and control loops for the one-dimensional
//! fourth-order evolution equation
//!
//! ```text
//! u_t + u_xxxx + u_xx + u u_x = h 1_omega + v 1_O + psi     in (-L, L) x (0, T)
//! ```
//!
//! with clamped boundary conditions. The crate provides:
//!
//! * [`linalg`] - banded LU and monolithic 2x2 block solves,
//! * [`fem`] - piecewise-linear assembly on uniform meshes,
//! * [`forward`] - the mixed theta / Adams-Bashforth time stepper,
//! * [`adjoint`] - backward solvers and the coupled fixed-point systems,
//! * [`robust`] - the saddle-point iteration for the follower control `v`
//!   against a worst-case disturbance `psi`,
//! * [`stackelberg`] - the outer descent loop steering the leader control `h`
//!   toward a terminal target under the robust follower equilibrium,
//! * [`mms`] - manufactured-solution error and convergence studies,
//! * [`config`] / [`report`] - run configuration and CSV output for the CLI.

pub mod adjoint;
pub mod config;
pub mod fem;
pub mod forward;
pub mod linalg;
pub mod mms;
pub mod report;
pub mod robust;
pub mod stackelberg;

use thiserror::Error;

/// Errors produced while integrating or iterating on a discrete problem.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Fem(#[from] fem::FemError),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("solution lost finiteness at time step {step}")]
    NonFinite { step: usize },
    #[error("fixed-point iteration diverged: residual {residual:.3e} after {iters} iterations")]
    PicardDiverged { iters: usize, residual: f64 },
}
