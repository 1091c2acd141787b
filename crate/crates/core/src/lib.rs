//! Hybrid systems with memory: simulation on hybrid time domains and
//! trajectory-based checking of Lyapunov-Razumikhin and Lyapunov-Krasovskii
//! conditions for input-to-state stability.
//!
//! The crate is organised bottom-up:
//!
//! - [`hybrid_time`]: hybrid time domains with memory, sampled arcs, the
//!   memory operator and the input/memory norms.
//! - [`system`]: system data `(F, G, C, D, Δ)` and the solution-pair simulator.
//! - [`lyapunov`]: comparison functions, derivative approximations, running
//!   sups and the scalar conditions (small gain, dwell time, decay rates).
//! - [`certificates`]: checkers for every hypothesis and envelope.
//! - [`case_studies`]: the networked-control and impulsive switched delay examples.
//! - [`scenario`]: JSON scenario configs, presets and artifact writers used by the CLI.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod case_studies;
pub mod certificates;
pub mod error;
pub mod hybrid_time;
pub mod lyapunov;
pub mod scenario;
pub mod system;

pub use error::{Error, Result};
