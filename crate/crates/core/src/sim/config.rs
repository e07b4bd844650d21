//! Simulator configuration file.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{CanFrame, CanFrameText, CanId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimConfigError {
    #[error("malformed-sim-config: {0}")]
    Malformed(String),
    #[error("bad-frame: {0}")]
    BadFrame(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BluetoothConfig {
    pub interface: String,
    pub mac: String,
}

/// What running a payload file with `python` does on the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptBehavior {
    pub frame: CanFrameText,
    #[serde(default)]
    pub period_ms: Option<u64>,
    #[serde(default)]
    pub count: Option<u64>,
    /// Package that must have been installed with `install-script`.
    #[serde(default)]
    pub requires: Option<String>,
}

/// Fixed answer replacing the built-in behavior of a command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandOverride {
    #[serde(default)]
    pub status: i32,
    #[serde(default)]
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub bluetooth: BluetoothConfig,
    pub hotspot_ip: String,
    /// Hex id of the frame the instrument cluster reads its speed from.
    pub speed_id: String,
    /// Simulated time every command takes.
    pub command_latency_ms: u64,
    pub scripts: BTreeMap<String, ScriptBehavior>,
    pub overrides: BTreeMap<String, CommandOverride>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            bluetooth: BluetoothConfig {
                interface: "hci0".into(),
                mac: "AA:BB:CC:DD:EE:FF".into(),
            },
            hotspot_ip: "192.168.43.1".into(),
            speed_id: "201".into(),
            command_latency_ms: 10,
            scripts: BTreeMap::new(),
            overrides: BTreeMap::new(),
        }
    }
}

impl SimConfig {
    pub fn load(document: &str) -> Result<SimConfig, SimConfigError> {
        let cfg: SimConfig = serde_json::from_str(document).map_err(|e| {
            if e.to_string().contains("bad-frame") {
                SimConfigError::BadFrame(e.to_string())
            } else {
                SimConfigError::Malformed(e.to_string())
            }
        })?;
        cfg.speed_can_id()?;
        Ok(cfg)
    }

    pub fn speed_can_id(&self) -> Result<CanId, SimConfigError> {
        format!("{}#", self.speed_id)
            .parse::<CanFrame>()
            .map(|f| f.id)
            .map_err(|e| SimConfigError::BadFrame(format!("speed_id: {e}")))
    }
}
