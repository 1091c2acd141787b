//! System data `(F, G, C, D, Δ)` and the solution-pair simulator.

mod audit;
mod config;
mod sim;

use std::fmt;
use std::sync::Arc;

use crate::hybrid_time::Memory;

pub use audit::{audit_solution, AuditIssue};
pub use config::{Priority, Selection, SimConfig};
pub use sim::{
    detect_flow_exit, simulate, step_flow, Event, EventKind, Selector, Solution,
};

/// Set-valued map realised as a finite candidate list.
pub type SetMap = Arc<dyn Fn(&Memory<'_>, &[f64]) -> Vec<Vec<f64>> + Send + Sync>;
pub type Predicate = Arc<dyn Fn(&Memory<'_>, &[f64]) -> bool + Send + Sync>;
pub type StateFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Euclidean norm.
pub fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A hybrid system with memory of size `Δ`.
#[derive(Clone)]
pub struct SystemDef {
    pub name: String,
    pub delta: f64,
    pub state_dim: usize,
    pub input_dim: usize,
    pub flow_map: SetMap,
    pub jump_map: SetMap,
    pub flow_set: Predicate,
    pub jump_set: Predicate,
    /// `|x|_W`.
    pub dist_w: StateFn,
    /// Largest delay read by the flow map; the initial arc must reach this
    /// far back in time.
    pub max_delay: f64,
}

impl fmt::Debug for SystemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemDef")
            .field("name", &self.name)
            .field("delta", &self.delta)
            .field("state_dim", &self.state_dim)
            .field("input_dim", &self.input_dim)
            .field("max_delay", &self.max_delay)
            .finish_non_exhaustive()
    }
}

impl SystemDef {
    /// A system that flows with `ẋ = 0` everywhere and never jumps.
    pub fn new(name: &str, delta: f64, state_dim: usize, input_dim: usize) -> Self {
        Self {
            name: name.to_string(),
            delta,
            state_dim,
            input_dim,
            flow_map: Arc::new(move |_, _| vec![vec![0.0; state_dim]]),
            jump_map: Arc::new(|m, _| vec![m.now().to_vec()]),
            flow_set: Arc::new(|_, _| true),
            jump_set: Arc::new(|_, _| false),
            dist_w: Arc::new(euclid),
            max_delay: 0.0,
        }
    }

    /// Single-valued flow map.
    pub fn with_flow(
        mut self,
        f: impl Fn(&Memory<'_>, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.flow_map = Arc::new(move |m, u| vec![f(m, u)]);
        self
    }

    pub fn with_flow_set_valued(
        mut self,
        f: impl Fn(&Memory<'_>, &[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.flow_map = Arc::new(f);
        self
    }

    /// Single-valued jump map.
    pub fn with_jump(
        mut self,
        g: impl Fn(&Memory<'_>, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.jump_map = Arc::new(move |m, u| vec![g(m, u)]);
        self
    }

    pub fn with_jump_set_valued(
        mut self,
        g: impl Fn(&Memory<'_>, &[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.jump_map = Arc::new(g);
        self
    }

    pub fn with_flow_set(
        mut self,
        c: impl Fn(&Memory<'_>, &[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.flow_set = Arc::new(c);
        self
    }

    pub fn with_jump_set(
        mut self,
        d: impl Fn(&Memory<'_>, &[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.jump_set = Arc::new(d);
        self
    }

    pub fn with_dist_w(mut self, w: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.dist_w = Arc::new(w);
        self
    }

    pub fn with_max_delay(mut self, r: f64) -> Self {
        self.max_delay = r;
        self
    }
}
