//! Estimation of the physical parameters of a continuously driven two-level
//! quantum emitter from single-trajectory photon-counting records.
//!
//! A driven emitter radiates single photons whose inter-detection delays
//! follow a strongly nonclassical waiting-time distribution. This crate
//! simulates such photodetection records, performs exact Bayesian inference
//! on them, computes Fisher-information/Cramér-Rao precision bounds, and
//! trains a histogram-dense neural estimator that reaches Bayesian-level
//! precision at a fraction of the inference cost.
//!
//! Modules:
//! - [`physics`]: closed-form waiting-time distribution, steady-state
//!   quantities, classical-signal moments and Liouvillian matrices.
//! - [`sim`]: trajectory generation (fast i.i.d. sampler and Euler
//!   integrator), measurement noise and dataset persistence.
//! - [`bayes`]: grid posteriors and point estimators for quantum
//!   (delay-list) and classical (mean-delay) signals.
//! - [`fisher`]: Fisher information, quantum Fisher information and biased
//!   Cramér-Rao RMSE bounds.
//! - [`nn`]: the histogram-dense network, its from-scratch Adam trainer and
//!   model serialization.
//! - [`validate`]: the paired RMSE/bias validation harness.
//!
//! See the crate examples for runnable entry points into each capability,
//! and the `photonest` binary for the command-line interface.

pub mod bayes;
pub mod error;
pub mod fisher;
pub mod nn;
pub mod physics;
pub mod quad;
pub mod seed;
pub mod sim;
pub mod validate;

pub use error::{Error, Result};
pub use physics::{ClassicalMoments, SystemParams};
