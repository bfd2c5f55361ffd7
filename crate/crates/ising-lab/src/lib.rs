//! Exact and stochastic tools for the correspondence between layered quantum
//! circuits and classical Ising partition functions at complex temperature.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bqp_reduction;
pub mod circuit_sim;
pub mod cli;
pub mod error;
pub mod error_stats;
pub mod fidelity_overlap;
pub mod fpras;
pub mod ising_core;
pub mod knots;
pub mod reconstruction;

pub use error::{Error, Result};
