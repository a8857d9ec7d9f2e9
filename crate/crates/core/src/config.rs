//! Scenario configuration files (TOML) and the bundled scenarios.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_spec, DomainError, RewardTable, ScenarioSpec};
use crate::worker::WorkerParams;

pub const BENCH_SMALL: &str = include_str!("../configs/bench_small.toml");
pub const DEMO_SIX: &str = include_str!("../configs/demo_six.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(#[from] DomainError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub parts: PartsSection,
    pub hotels: HotelsSection,
    #[serde(default)]
    pub worker: WorkerParams,
    #[serde(default)]
    pub rewards: RewardTable,
    #[serde(default)]
    pub sensor: SensorSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartsSection {
    pub parts: Vec<String>,
    #[serde(default)]
    pub common_parts: Vec<String>,
    #[serde(default)]
    pub initial_inventory: InventoryConfig,
}

/// `initial_inventory = 0.5`, `{ available = [...] }` or
/// `{ probabilities = { red = 0.3 } }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InventoryConfig {
    Uniform(f64),
    Fixed { available: Vec<String> },
    PerPart { probabilities: BTreeMap<String, f64> },
}

impl Default for InventoryConfig {
    fn default() -> Self {
        InventoryConfig::Uniform(0.5)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotelsSection {
    pub hotel_types: Vec<HotelTypeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_intent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotelTypeConfig {
    pub name: String,
    #[serde(default)]
    pub specific_parts: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    pub sensor_accuracy: f64,
}

impl Default for SensorSection {
    fn default() -> Self {
        Self {
            sensor_accuracy: 0.85,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub horizon: u32,
    pub discount: f64,
    pub master_seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            horizon: 100,
            discount: 0.99,
            master_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config always serializes")
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    Ok(toml::from_str(text)?)
}

pub fn parse_spec(text: &str) -> Result<ScenarioSpec, ConfigError> {
    Ok(validate_spec(&parse_config(text)?)?)
}

/// Loads a scenario from a path, or one of the bundled names
/// `bench_small` / `demo_six`.
pub fn load_spec(path_or_name: &str) -> Result<ScenarioSpec, ConfigError> {
    match path_or_name {
        "bench_small" => parse_spec(BENCH_SMALL),
        "demo_six" => parse_spec(DEMO_SIX),
        path => {
            let text = std::fs::read_to_string(Path::new(path)).map_err(|source| ConfigError::Io {
                path: path.to_string(),
                source,
            })?;
            parse_spec(&text)
        }
    }
}

pub fn bench_small() -> ScenarioSpec {
    parse_spec(BENCH_SMALL).expect("bundled bench_small is valid")
}

pub fn demo_six() -> ScenarioSpec {
    parse_spec(DEMO_SIX).expect("bundled demo_six is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{InitialInventory, PartSet};

    #[test]
    fn demo_inventory_is_fixed() {
        let spec = demo_six();
        let expected = PartSet::from_parts(
            ["red", "purple", "magenta", "orange", "bright-green"]
                .iter()
                .map(|l| spec.part_by_label(l).unwrap()),
        );
        assert_eq!(spec.initial_inventory, InitialInventory::Fixed(expected));
        assert_eq!(spec.true_intent, spec.hotel_by_name("A"));
    }

    #[test]
    fn toml_roundtrip_preserves_spec() {
        for spec in [bench_small(), demo_six()] {
            let text = spec.to_config().to_toml();
            assert_eq!(parse_spec(&text).unwrap(), spec);
        }
    }

    #[test]
    fn per_part_inventory_and_defaults() {
        let text = r#"
            [parts]
            parts = ["a", "b"]
            initial_inventory = { probabilities = { b = 0.25 } }
            [hotels]
            hotel_types = [{ name = "T", specific_parts = ["a"] }]
        "#;
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.initial_inventory, InitialInventory::Bernoulli(vec![0.5, 0.25]));
        assert_eq!(spec.horizon, 100);
        assert_eq!(spec.discount, 0.99);
        assert_eq!(spec.rewards, RewardTable::default());
    }

    #[test]
    fn unknown_section_key_is_a_parse_error() {
        let text = BENCH_SMALL.replace("p_pause", "p_paws");
        assert!(matches!(parse_spec(&text), Err(ConfigError::Parse(_))));
    }
}
