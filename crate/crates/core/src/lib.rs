//! Variational-Bayes test of homogeneity for the two-component normal mixture
//! `(1 - a) N(0, 1) + a N(b, 1)`.
//!
//! The crate is `no_std` (with `alloc`) so the solver and the closed-form
//! asymptotics can be embedded anywhere. IO, the command-line front end and
//! the parallel Monte Carlo harness live in the `vbht` crate.
//!
//! Layout:
//!
//! * [`numerics`]: log-gamma, digamma, standard normal and χ²₁ helpers.
//! * [`model`]: samples, hyperparameters and the exact finite-n free energy.
//! * [`solver`]: VB-EM fixed-point iteration with restarts and a grid oracle.
//! * [`asymptotics`]: α₀(φ), the deterministic term `D`, phase diagnostics
//!   and the trimmed-sum constants.
//! * [`hypothesis`]: threshold, p-value and the composed test.
//! * [`sampling`]: counter-keyed normal and mixture samplers.

#![cfg_attr(not(feature = "std"), no_std)]
// Published coefficients and reference values keep their source grouping.
#![allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]

extern crate alloc;

pub mod asymptotics;
mod error;
pub mod hypothesis;
pub mod model;
pub mod numerics;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use hypothesis::{run_test, TestReport, XiHat};
pub use model::{Hyperparameters, MixtureParams, PosteriorMoments, Responsibilities, Sample};
pub use numerics::Probability;
pub use solver::{solve, SolverConfig, VBState};
