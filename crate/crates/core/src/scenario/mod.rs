//! JSON scenarios: configuration, embedded presets, the simulate/verify
//! pipeline and the artifacts it writes.

mod artifacts;
mod config;
mod presets;
mod run;

pub use artifacts::{
    load_solution, read_report, write_plot_data, write_report, write_trace_csv, write_trajectory,
    ScenarioReport, DOMAIN_JSON, EVENTS_JSON, INPUT_CSV, PLOT_CSV, PLOT_PY, PLOT_SCRIPT,
    REPORT_JSON, TRACES_CSV, TRAJECTORY_CSV,
};
pub use config::{
    CertificateConfig, EnvelopeConfig, InitialSpec, InputSpec, ScenarioConfig, SystemChoice,
    VConfig,
};
pub use presets::{preset, preset_json, preset_names};
pub use run::{
    execute, exit_code, output_dir, prepare, run_scenario, verify, Prepared, RunOutcome, Verdict,
    EXIT_CONFIG, EXIT_OK, EXIT_VACUOUS, EXIT_VIOLATIONS, EXIT_ZENO,
};
