//! Run configuration: one TOML file with a strict schema. Precedence is
//! command-line flags, then `--set key=value` overrides, then the file, then
//! built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use oal_core::corpus::SyntheticConfig;
use oal_core::harness::ExperimentConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Region file; the synthetic generator runs when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    pub synthetic: SyntheticConfig,
    pub experiment: ExperimentConfig,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Write a checkpoint after every batch.
    pub checkpoints: bool,
    /// Write every dialog turn to `transcripts.jsonl`.
    pub transcripts: bool,
}

/// Frequency threshold scaled to the 600-region synthetic corpus; the
/// library default of 1000 suits corpora with millions of regions.
pub const DESK_SCALE_FREQUENCY_THRESHOLD: usize = 150;

impl Default for RunConfig {
    fn default() -> Self {
        let mut experiment = ExperimentConfig::default();
        experiment.split.frequency_threshold = DESK_SCALE_FREQUENCY_THRESHOLD;
        Self {
            corpus: None,
            synthetic: SyntheticConfig::default(),
            experiment,
            threads: 0,
            checkpoints: false,
            transcripts: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Applies `dotted.key=value` overrides. Values parse as TOML scalars or
    /// arrays and fall back to plain strings.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> anyhow::Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut root = toml::Value::try_from(self)?;
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item.split_once('=').ok_or_else(|| anyhow!("override `{item}` is not key=value"))?;
            set_path(&mut root, key.trim(), parse_value(raw.trim()))?;
        }
        let text = toml::to_string(&root)?;
        toml::from_str(&text).map_err(|e| anyhow!("invalid override: {e}"))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.experiment.validate().map_err(|e| anyhow!("{e}"))
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_path(root: &mut toml::Value, key: &str, value: toml::Value) -> anyhow::Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("malformed override key `{key}`");
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let table = node.as_table_mut().ok_or_else(|| anyhow!("`{key}`: `{part}` is not a table"))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node.as_table_mut().ok_or_else(|| anyhow!("`{key}` does not name a table entry"))?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use oal_core::harness::Arm;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
        assert_eq!(RunConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[experiment]\nbatch_sise = 3\n").is_err());
        assert!(RunConfig::from_toml("[experiment.policy]\nalpha = 0.1\nbeta = 2\n").is_err());
    }

    #[test]
    fn overrides_beat_file_values() {
        let cfg = RunConfig::from_toml("[experiment]\nseed = 3\nbatch_size = 20\n").unwrap();
        let cfg = cfg
            .with_overrides(&["experiment.seed=9", "experiment.arm=static", "experiment.ablate=[\"guess\"]"])
            .unwrap();
        assert_eq!(cfg.experiment.seed, 9);
        assert_eq!(cfg.experiment.batch_size, 20);
        assert_eq!(cfg.experiment.arm, Arm::Static);
        assert_eq!(cfg.experiment.ablate, ["guess"]);
        assert!(cfg.with_overrides(&["experiment.nope=1"]).is_err());
        assert!(cfg.with_overrides(&["experiment.seed"]).is_err());
    }

    #[test]
    fn invalid_rewards_fail_validation() {
        let cfg = RunConfig::default().with_overrides(&["experiment.env.rewards.correct_guess=-5"]).unwrap();
        assert!(cfg.validate().is_err());
    }
}
