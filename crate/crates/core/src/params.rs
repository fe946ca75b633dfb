//! Network, traffic and allocation parameters.
//!
//! All SIR thresholds are linear ratios. Decibel values are converted once,
//! at the configuration boundary, with [`db_to_linear`].

use serde::{Deserialize, Serialize};

use crate::ModelError;

/// Correction factor applied to the BS density in the two-nearest-point
/// distance approximation.
pub const RHO_CF: f64 = 9.0 / 7.0;

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserClass {
    /// Cell-center user: `R_o ≤ τ·R_d`.
    Center,
    /// Cell-edge user: `R_o > τ·R_d`.
    Edge,
}

impl UserClass {
    pub const BOTH: [UserClass; 2] = [UserClass::Center, UserClass::Edge];

    pub fn label(self) -> &'static str {
        match self {
            UserClass::Center => "cc",
            UserClass::Edge => "ce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Noma,
    Oma,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Noma => "noma",
            Scheme::Oma => "oma",
        }
    }
}

/// The resource split: NOMA power fraction of the center layer, or OMA
/// time fraction given to center users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum Allocation {
    Noma { theta: f64 },
    Oma { eta: f64 },
}

impl Allocation {
    pub fn scheme(self) -> Scheme {
        match self {
            Allocation::Noma { .. } => Scheme::Noma,
            Allocation::Oma { .. } => Scheme::Oma,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Allocation::Noma { theta } => theta,
            Allocation::Oma { eta } => eta,
        }
    }

    pub fn new(scheme: Scheme, value: f64) -> Self {
        match scheme {
            Scheme::Noma => Allocation::Noma { theta: value },
            Scheme::Oma => Allocation::Oma { eta: value },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// BS density.
    pub lambda: f64,
    /// User density.
    pub nu: f64,
    /// Path-loss exponent, > 2.
    pub alpha: f64,
    /// Center/edge boundary threshold in (0, 1).
    pub tau: f64,
    pub beta_c: f64,
    pub beta_e: f64,
    /// NOMA power fraction of the center layer.
    pub theta: f64,
    /// OMA time fraction for center users.
    pub eta: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            lambda: 1.0,
            nu: 5.0,
            alpha: 4.0,
            tau: 0.7,
            beta_c: db_to_linear(3.0),
            beta_e: db_to_linear(-3.0),
            theta: 0.3,
            eta: 0.5,
        }
    }
}

impl SystemParams {
    pub fn delta(&self) -> f64 {
        2.0 / self.alpha
    }

    pub fn rho(&self) -> f64 {
        RHO_CF
    }

    pub fn beta(&self, class: UserClass) -> f64 {
        match class {
            UserClass::Center => self.beta_c,
            UserClass::Edge => self.beta_e,
        }
    }

    pub fn with_betas_db(mut self, beta_c_db: f64, beta_e_db: f64) -> Self {
        self.beta_c = db_to_linear(beta_c_db);
        self.beta_e = db_to_linear(beta_e_db);
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let checks: [(bool, &str); 8] = [
            (self.lambda > 0.0 && self.lambda.is_finite(), "lambda must be positive"),
            (self.nu > 0.0 && self.nu.is_finite(), "nu must be positive"),
            (self.alpha > 2.0 && self.alpha.is_finite(), "alpha must exceed 2"),
            (self.tau > 0.0 && self.tau < 1.0, "tau must lie in (0, 1)"),
            (self.beta_c > 0.0 && self.beta_c.is_finite(), "beta_c must be positive"),
            (self.beta_e > 0.0 && self.beta_e.is_finite(), "beta_e must be positive"),
            (self.theta > 0.0 && self.theta < 1.0, "theta must lie in (0, 1)"),
            (self.eta > 0.0 && self.eta < 1.0, "eta must lie in (0, 1)"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(ModelError::InvalidParams(format!("{msg}: {self:?}"))),
            None => Ok(()),
        }
    }
}

/// QoS targets used by the rate, delay and allocation routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficParams {
    /// Minimum mean rates (bits/slot/Hz) for P1.
    pub rate_floor_c: f64,
    pub rate_floor_e: f64,
    /// Bernoulli packet arrival rates (packets/slot).
    pub arrival_c: f64,
    pub arrival_e: f64,
    /// Mean-delay thresholds (slots).
    pub delay_thresh_c: f64,
    pub delay_thresh_e: f64,
    /// Caps on the mean-delay outage probability.
    pub outage_cap_c: f64,
    pub outage_cap_e: f64,
    /// Minimum effective capacities (packets/slot) for P2.
    pub ec_floor_c: f64,
    pub ec_floor_e: f64,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            rate_floor_c: 0.1,
            rate_floor_e: 0.05,
            arrival_c: 0.05,
            arrival_e: 0.05,
            delay_thresh_c: 20.0,
            delay_thresh_e: 30.0,
            outage_cap_c: 0.2,
            outage_cap_e: 0.2,
            ec_floor_c: 0.05,
            ec_floor_e: 0.05,
        }
    }
}

impl TrafficParams {
    pub fn rate_floor(&self, class: UserClass) -> f64 {
        match class {
            UserClass::Center => self.rate_floor_c,
            UserClass::Edge => self.rate_floor_e,
        }
    }

    pub fn arrival(&self, class: UserClass) -> f64 {
        match class {
            UserClass::Center => self.arrival_c,
            UserClass::Edge => self.arrival_e,
        }
    }

    pub fn delay_thresh(&self, class: UserClass) -> f64 {
        match class {
            UserClass::Center => self.delay_thresh_c,
            UserClass::Edge => self.delay_thresh_e,
        }
    }

    pub fn outage_cap(&self, class: UserClass) -> f64 {
        match class {
            UserClass::Center => self.outage_cap_c,
            UserClass::Edge => self.outage_cap_e,
        }
    }

    pub fn ec_floor(&self, class: UserClass) -> f64 {
        match class {
            UserClass::Center => self.ec_floor_c,
            UserClass::Edge => self.ec_floor_e,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let in_open_unit = |x: f64| x > 0.0 && x < 1.0;
        let ok = in_open_unit(self.arrival_c)
            && in_open_unit(self.arrival_e)
            && self.delay_thresh_c >= 1.0
            && self.delay_thresh_e >= 1.0
            && in_open_unit(self.outage_cap_c)
            && in_open_unit(self.outage_cap_e)
            && self.rate_floor_c >= 0.0
            && self.rate_floor_e >= 0.0
            && self.ec_floor_c >= 0.0
            && self.ec_floor_e >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParams(format!("invalid traffic parameters: {self:?}")))
        }
    }
}
