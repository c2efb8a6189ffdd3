//! JSON instance, policy and value-to-go table files.
//!
//! An instance file looks like
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "state_count": 2, "action_count": 2, "horizon": 2, "initial_state": 0,
//!   "rewards":     [[[1, 2], [1, 1]], [[5, 1], [1, 1]]],
//!   "transitions": [[[0, 1], [0, 1]]]
//! }
//! ```
//!
//! All tables are row-major `[stage][state][action]`. `rewards` has `horizon`
//! stages and `transitions` has `horizon - 1`, since no transition follows the
//! last stage. `vtg_table`, when present, has `horizon - 1` stages holding
//! `W_{k+1}(x, a)` for `k = 1..K-1`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{ControlInstance, Policy};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub state_count: usize,
    pub action_count: usize,
    pub horizon: usize,
    pub initial_state: usize,
    pub rewards: Vec<Vec<Vec<f64>>>,
    pub transitions: Vec<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vtg_table: Option<Vec<Vec<Vec<f64>>>>,
}

impl InstanceFile {
    pub fn from_instance(inst: &ControlInstance) -> Self {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            id: None,
            state_count: inst.state_count(),
            action_count: inst.action_count(),
            horizon: inst.horizon(),
            initial_state: inst.initial_state(),
            rewards: inst.rewards().to_vec(),
            transitions: inst.transitions().to_vec(),
            action_names: None,
            vtg_table: None,
        }
    }

    pub fn to_instance(&self) -> Result<ControlInstance> {
        check_schema(self.schema_version)?;
        if let Some(names) = &self.action_names {
            if names.len() != self.action_count {
                return Err(Error::validation("action_names", format!("expected {} names, got {}", self.action_count, names.len())));
            }
        }
        ControlInstance::new(
            self.horizon,
            self.state_count,
            self.action_count,
            self.initial_state,
            self.rewards.clone(),
            self.transitions.clone(),
        )
    }
}

fn check_schema(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::validation("schema_version", format!("unsupported version {version}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

pub fn parse_instance_file(text: &str) -> Result<InstanceFile> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.to_instance()?;
    Ok(file)
}

pub fn load_instance_file(path: impl AsRef<Path>) -> Result<InstanceFile> {
    parse_instance_file(&fs::read_to_string(path)?)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ControlInstance> {
    load_instance_file(path)?.to_instance()
}

pub fn to_json(inst: &ControlInstance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serialises")
}

pub fn save_instance(inst: &ControlInstance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json(inst) + "\n")?;
    Ok(())
}

/// `{"schema_version": 1, "policy": [[action or null; states]; stages]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolicyFile {
    pub schema_version: u32,
    pub policy: Vec<Vec<Option<usize>>>,
}

pub fn load_policy(path: impl AsRef<Path>, inst: &ControlInstance) -> Result<Policy> {
    let file: PolicyFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    check_schema(file.schema_version)?;
    Policy::new(inst, file.policy)
}

/// `{"schema_version": 1, "vtg_table": [...]}`. An instance file carrying a
/// `vtg_table` also qualifies.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VtgTableFile {
    pub schema_version: u32,
    pub vtg_table: Vec<Vec<Vec<f64>>>,
}

pub fn load_vtg_table(path: impl AsRef<Path>) -> Result<Vec<Vec<Vec<f64>>>> {
    let file: VtgTableFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    check_schema(file.schema_version)?;
    Ok(file.vtg_table)
}
