use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Per-command defaults read from a JSON file shaped like
/// `{"sumproduct": {"c": 0.05, "scales": "8..14"}}`. Flags always win.
#[derive(Debug, Clone, Default)]
pub struct Config {
    root: Map<String, Value>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        match serde_json::from_str(&text).map_err(|e| CliError::json(path.display().to_string(), e))? {
            Value::Object(root) => Ok(Config { root }),
            _ => Err(CliError::Usage(format!("{}: config must be a JSON object", path.display()))),
        }
    }

    /// The section for one command; unknown keys are rejected.
    pub fn section(&self, command: &str, known: &[&str]) -> Result<Section, CliError> {
        let map = match self.root.get(command) {
            None => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return Err(CliError::Usage(format!("config section `{command}` must be an object"))),
        };
        if let Some(k) = map.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("config key `{command}.{k}` is not an option of {command}")));
        }
        Ok(Section { command: command.into(), map })
    }
}

pub struct Section {
    command: String,
    map: Map<String, Value>,
}

impl Section {
    /// Fill `slot` from the config unless the flag already set it.
    pub fn fill<T: DeserializeOwned>(&self, slot: &mut Option<T>, key: &str) -> Result<(), CliError> {
        if slot.is_none() {
            if let Some(v) = self.map.get(key) {
                *slot = Some(
                    serde_json::from_value(v.clone())
                        .map_err(|e| CliError::json(format!("config key `{}.{key}`", self.command), e))?,
                );
            }
        }
        Ok(())
    }
}
