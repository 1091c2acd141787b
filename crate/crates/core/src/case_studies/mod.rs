//! The two worked examples: a networked control loop with a Razumikhin
//! certificate and impulsive switched delay systems with a Krasovskii
//! certificate.

mod example1;
mod example2;

pub use example1::{
    build_example1, example1_dist, example1_history, example1_phi, example1_v, phi_assumptions,
    Example1, Example1Params, PHI_SPAN, PHI_STEP, TAU_BAR,
};
pub use example2::{
    build_example2, classify_example2, example2_certificate, example2_functional,
    example2_history, example2_preset, lambda_max_sym, spectral_norm, Example2Case,
    Example2Classification, Example2Mode, Example2Params, Example2Rates, ModeClass,
};
