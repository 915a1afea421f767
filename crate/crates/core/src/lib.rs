//! Hedged maximum likelihood (HMLE) quantum state estimation.
//!
//! HMLE maximizes `L(ρ) · det(ρ)^β` instead of the likelihood `L(ρ)`, which
//! always yields a full-rank estimate. This crate provides the estimator
//! together with plain MLE, linear-inversion tomography, the classical
//! add-β rule it generalizes, state-error metrics and a Monte Carlo harness
//! for single-qubit Pauli tomography experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod estimators;
pub mod io;
pub mod likelihood;
pub mod linalg;
pub mod metrics;
pub mod montecarlo;
pub mod state;
pub mod verification;

pub use error::{Error, Result};
pub use likelihood::{HedgingParameter, MeasurementRecord, RecordItem};
pub use state::{BlochVector, DensityMatrix, Effect, Povm};
