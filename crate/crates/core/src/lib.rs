//! Stochastic gradient descent with matrix-valued learning rates.
//!
//! The crate is split into four layers:
//!
//! - [`engine`]: the recursion `θ_{k+1} = θ_k − M_k ḟ(θ_k, X_{k+1})`, learning-rate
//!   matrix schedules with closed-form eigenvalue bounds, and replayable trajectories.
//! - [`objectives`]: closed-form objective catalog and unbiased noise models.
//! - [`checkers`]: falsifiable numerical checks of the regularity and step-size
//!   conditions used by the convergence theory.
//! - [`diagnostics`]: Monte Carlo ensembles, capture/escape tallies, the
//!   converge-or-diverge classification and stopping times.

#![forbid(unsafe_code)]

pub mod checkers;
pub mod diagnostics;
pub mod engine;
mod error;
pub mod objectives;
pub mod sampling;

pub use error::{Error, Result};
