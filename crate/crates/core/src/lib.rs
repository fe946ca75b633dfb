//! Typical-cell analysis of two-user downlink NOMA in Poisson cellular
//! networks.
//!
//! Users in the Voronoi cell of a base station are split into a cell-center
//! (CC) and a cell-edge (CE) class by comparing the serving distance with the
//! distance to the dominant interferer. One CC and one CE user share a
//! resource block under NOMA (power split `θ`) or alternate under OMA (time
//! split `η`). The crate provides:
//!
//! * [`distance`]: laws of the serving and dominant-interferer distances,
//! * [`meta`]: moments of the SIR meta distribution and their beta fits,
//! * [`load`]: CC/CE region areas, gamma fits and load distributions,
//! * [`performance`]: rate and delay distributions,
//! * [`ra`]: near-optimal power/time allocation and a grid-search oracle,
//! * [`sim`]: a Monte Carlo simulator of the typical cell used to validate
//!   every formula above,
//! * [`experiments`] and [`validation`]: the CSV experiment runner behind the
//!   `noma-cell` binary and the sim-versus-analysis acceptance checks.

// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distance;
pub mod experiments;
pub mod load;
pub mod meta;
pub mod numerics;
pub mod params;
pub mod performance;
pub mod ra;
pub mod sim;
pub mod validation;

pub use params::{db_to_linear, Allocation, Scheme, SystemParams, TrafficParams, UserClass};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("allocation {value} is infeasible: {reason}")]
    Infeasible { value: f64, reason: String },
    #[error("degenerate moment fit: {0}")]
    DegenerateFit(String),
    #[error("load pmf truncated at n = {n_max} with tail mass {tail:e}")]
    Truncation { n_max: usize, tail: f64 },
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
}
