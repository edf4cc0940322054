//! Sensor model files.
//!
//! ```toml
//! num_states = 2
//!
//! [[sensor]]
//! alphabet = 2
//! table = [0.9, 0.1, 0.1, 0.9]  # row-major: state, then value
//! ```

use serde::{Deserialize, Serialize};

use super::SensorModel;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    num_states: usize,
    #[serde(default)]
    sensor: Vec<SensorEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorEntry {
    alphabet: usize,
    table: Vec<f64>,
}

pub fn parse_model(text: &str) -> Result<SensorModel> {
    let file: ModelFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    SensorModel::new(
        file.num_states,
        file.sensor.into_iter().map(|s| (s.alphabet, s.table)).collect(),
    )
}

pub fn write_model(model: &SensorModel) -> String {
    let file = ModelFile {
        num_states: model.num_states(),
        sensor: (0..model.num_sensors())
            .map(|i| SensorEntry {
                alphabet: model.alphabet(i),
                table: (0..model.num_states())
                    .flat_map(|s| model.sensor(i).row(s).to_vec())
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("plain numeric data serializes")
}

pub fn read_model(path: &std::path::Path) -> Result<SensorModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}
