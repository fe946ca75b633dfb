//! Special functions, adaptive quadrature and scalar search shared by the
//! analytical models.
//!
//! Everything here is a pure function of its arguments.

mod quad;
mod search;
mod special;

pub use quad::{quad_finite, quad_semi_infinite, QuadSpec};
pub use search::{find_root, maximize_unimodal};
pub use special::{hurwitz_zeta_scaled, ln_beta, log_gamma, reg_inc_beta};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    NonConvergence { subdivisions: usize, estimate: f64, error: f64 },
}

impl NumericsError {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        NumericsError::Domain { func, detail: detail.into() }
    }
}
