use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid_time::Interpolation;

/// Resolution of points in `C ∩ D`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Priority {
    #[default]
    JumpFirst,
    FlowFirst,
}

/// How one element is picked from a set-valued map.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    #[default]
    First,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Integrator step (s).
    pub h: f64,
    /// Stop once `t ≥ horizon_t`.
    pub horizon_t: f64,
    /// Stop once `j ≥ horizon_j`.
    pub horizon_j: i64,
    pub priority: Priority,
    pub selection: Selection,
    /// Seed for [`Selection::Random`].
    pub seed: u64,
    /// Jumps allowed at a single value of `t` before stopping.
    pub zeno_guard: usize,
    /// Width of the bracket left by flow-exit bisection (s).
    pub event_tol: f64,
    pub interpolation: Interpolation,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            horizon_t: 1.0,
            horizon_j: 1000,
            priority: Priority::JumpFirst,
            selection: Selection::First,
            seed: 0,
            zeno_guard: 100,
            event_tol: 1e-9,
            interpolation: Interpolation::CubicHermite,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("h must be positive, got {}", self.h)));
        }
        if !(self.event_tol > 0.0) {
            return Err(Error::Config("event_tol must be positive".into()));
        }
        if self.zeno_guard < 1 {
            return Err(Error::Config("zeno_guard must be at least 1".into()));
        }
        if !(self.horizon_t >= 0.0) || self.horizon_j < 0 {
            return Err(Error::Config("horizon must be non-negative".into()));
        }
        Ok(())
    }
}
