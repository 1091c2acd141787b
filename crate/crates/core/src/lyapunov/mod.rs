//! Comparison functions, derivative approximations, running sups and the
//! scalar stability conditions.

mod comparison;
mod conditions;
mod derivative;
mod sups;

use std::fmt;
use std::sync::Arc;

pub use comparison::{
    check_small_gain, default_class_grid, default_gain_grid, log_grid, validate_class,
    ComparisonFunction, FunctionClass, UNBOUNDED_THRESHOLD,
};
pub use conditions::{
    adt_margin, check_dwell_band, check_persistence, lambda_bar_residual, lambda_thm7,
    radt_margin, solve_lambda_bar, PersistenceSpec, PersistenceTarget, ROOT_MAX_ITER, ROOT_TOL,
};
pub use derivative::{
    dini_functional_deriv, directional_deriv, CLARKE_STEPS, DINI_MIN_STEP, DINI_STEPS,
};
pub use sups::{vbar, vbar_window, vhat, FunctionalSeries, SparseMax, VbarSeries};

use crate::hybrid_time::Memory;

/// A locally Lipschitz `V: Rⁿ → R≥0`.
#[derive(Clone)]
pub struct LyapunovState(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>);

impl LyapunovState {
    pub fn new(v: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(v))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for LyapunovState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LyapunovState")
    }
}

/// A functional `V: M^Δ → R≥0`.
#[derive(Clone)]
pub struct LyapunovFunctional(Arc<dyn Fn(&Memory<'_>) -> f64 + Send + Sync>);

impl LyapunovFunctional {
    pub fn new(v: impl Fn(&Memory<'_>) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(v))
    }

    pub fn eval(&self, m: &Memory<'_>) -> f64 {
        (self.0)(m)
    }
}

impl fmt::Debug for LyapunovFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LyapunovFunctional")
    }
}
