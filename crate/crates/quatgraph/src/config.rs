//! Run configuration: a versioned JSON schema binding a task to a dataset,
//! a model section, and a train section. Unknown keys are rejected, and
//! dotted-path overrides (`train.lr=0.001`) are applied before the typed
//! parse so they face the same validation.

use crate::datasets::FeatureMode;
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::trainer::TrainConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default dataset root.
pub const DATA_ROOT_ENV: &str = "QUATGRAPH_DATA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Graph,
    Node,
    Text,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// Dataset directory (TU / citation tasks), resolved against the data
    /// root when relative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Corpus file and split file (text task).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_mode: Option<FeatureMode>,
    /// Sliding-window length for word co-occurrence.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Row-normalize citation features.
    #[serde(default = "default_true")]
    pub row_normalize: bool,
    /// Expected dims; required by `count-params` when no dataset is read,
    /// validated against the data otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_classes: Option<usize>,
}

fn default_window() -> usize {
    20
}

fn default_true() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: TaskKind,
    pub dataset: DatasetSection,
    pub model: ModelConfig,
    pub train: TrainConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Parses a config file, applying dotted overrides first. Rejects
    /// unknown keys and schema versions other than [`SCHEMA_VERSION`].
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for entry in overrides {
            apply_override(&mut value, entry)?;
        }
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let version = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Config("missing schema_version".into()))?;
        if version != SCHEMA_VERSION as u64 {
            return Err(Error::Config(format!(
                "unsupported schema_version {version}, expected {SCHEMA_VERSION}"
            )));
        }
        let cfg: RunConfig = serde_json::from_value(value)
            .map_err(|e| Error::Config(e.to_string()))?;
        cfg.train.validate()?;
        Ok(cfg)
    }

    /// Resolves a dataset path against `QUATGRAPH_DATA` (default `data`).
    pub fn resolve_data_path(p: &Path) -> PathBuf {
        if p.is_absolute() {
            return p.to_path_buf();
        }
        let root = std::env::var(DATA_ROOT_ENV).unwrap_or_else(|_| "data".into());
        Path::new(&root).join(p)
    }

    pub fn dataset_dir(&self) -> Result<PathBuf> {
        let p = self
            .dataset
            .path
            .as_ref()
            .ok_or_else(|| Error::Config("dataset.path is required for this task".into()))?;
        Ok(Self::resolve_data_path(p))
    }
}

/// Applies one `dotted.path=value` override to a JSON tree. The value is
/// parsed as JSON when possible and falls back to a string.
pub fn apply_override(root: &mut serde_json::Value, entry: &str) -> Result<()> {
    let (dotted, raw) = entry
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {entry:?} is not `path=value`")))?;
    let parsed: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = dotted.split('.').collect();
    for (idx, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Config(format!("override {entry:?} has an empty segment")));
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override {dotted} crosses a non-object")))?;
        if idx == parts.len() - 1 {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last segment")
}
