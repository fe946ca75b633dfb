//! Monte Carlo reference for the analytic model.
//!
//! Each realization drops a PPP of base stations around a station at the
//! origin, carves out the origin's Voronoi cell and places users in it.
//! Fading is averaged in closed form, so a realization yields the
//! conditional success probability directly. Realization `i` draws from its
//! own ChaCha stream keyed by `(seed, i)`, so results do not depend on the
//! thread count.

mod estimate;
pub mod geometry;
mod queue;
mod realization;

pub use estimate::{
    estimate_areas_and_loads, estimate_class_fraction, estimate_meta, estimate_rate_delay, sample_ztp, AreaLoadSamples,
    ClassFraction, MetaEstimate, RateDelaySamples,
};
pub use queue::queue_sim;
pub use realization::{classify, cond_success_prob, realize_typical_cell, NetworkRealization, TypicalUser};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::params::SystemParams;
use crate::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_realizations: usize,
    /// Radius of the simulated disc; `None` means `6/√λ`.
    pub window_radius: Option<f64>,
    pub seed: u64,
    /// Hit-or-miss points per realization for region areas.
    pub area_samples: usize,
    /// Add the mean-field contribution of stations beyond the window.
    pub tail_correction: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { n_realizations: 100_000, window_radius: None, seed: 1, area_samples: 10_000, tail_correction: true }
    }
}

impl SimConfig {
    pub fn window(&self, p: &SystemParams) -> f64 {
        self.window_radius.unwrap_or(6.0 / p.lambda.sqrt())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_realizations == 0 || self.area_samples == 0 {
            return Err(ModelError::InvalidParams("realization and area sample counts must be positive".into()));
        }
        if let Some(w) = self.window_radius {
            if !(w > 0.0 && w.is_finite()) {
                return Err(ModelError::InvalidParams(format!("window radius {w}")));
            }
        }
        Ok(())
    }
}

/// Generator for realization `index`.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f` once per realization in parallel and returns the results in
/// index order.
pub(crate) fn per_realization<T, F>(cfg: &SimConfig, f: F) -> Result<Vec<T>, ModelError>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T, ModelError> + Sync,
{
    cfg.validate()?;
    (0..cfg.n_realizations as u64).into_par_iter().map(|i| f(&mut rng_for(cfg.seed, i))).collect()
}
