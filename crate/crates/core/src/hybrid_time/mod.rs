//! Hybrid time domains with memory, sampled arcs, inputs and the memory
//! operator.

mod arc;
mod domain;
mod input;
pub mod io;
mod memory;

pub use arc::{hermite, HybridArc, Interpolation, MemoryArc, Piece};
pub use domain::{depth, validate_domain, HybridTime, HybridTimeDomain, Segment, TIME_EPS};
pub use input::{memory_sup_distance, sup_norm_input, InputSignal};
pub(crate) use input::InputTrace;
pub use memory::{memory_operator, Memory, WindowRange};
