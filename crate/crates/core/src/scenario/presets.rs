use super::config::ScenarioConfig;
use crate::error::{Error, Result};

const PRESETS: [(&str, &str); 8] = [
    ("example1", include_str!("../../presets/example1.json")),
    ("example2-case1", include_str!("../../presets/example2-case1.json")),
    ("example2-case2", include_str!("../../presets/example2-case2.json")),
    ("example2-case3", include_str!("../../presets/example2-case3.json")),
    ("example2-sabotaged", include_str!("../../presets/example2-sabotaged.json")),
    ("scalar-linear", include_str!("../../presets/scalar-linear.json")),
    ("halving", include_str!("../../presets/halving.json")),
    ("zeno", include_str!("../../presets/zeno.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// A shipped scenario by name.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`; known: {}", preset_names().join(", "))))?;
    ScenarioConfig::from_json(text)
}

/// The raw JSON of a shipped scenario.
pub fn preset_json(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
