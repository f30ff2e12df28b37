//! Randomized response estimation of a population total under simple random
//! sampling without replacement.
//!
//! The crate covers the threshold-question randomized response family (basic,
//! bounded, complement, α-weighted and switching-question variants), the
//! Eriksson and Chaudhuri card-deck baselines, Horvitz-Thompson type
//! estimators with their closed-form variance ledgers, and a deterministic
//! Monte Carlo harness driven by a three-parameter log-logistic wage model.

// validation is written as `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod mechanisms;
pub mod population;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
