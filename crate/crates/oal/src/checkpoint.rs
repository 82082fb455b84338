//! Versioned JSON checkpoints of a run's resumable state.

use std::path::Path;

use anyhow::{bail, Context};
use oal_core::harness::{ExperimentConfig, RunState};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const FORMAT: &str = "oal-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    /// Hash of the experiment config the state belongs to.
    pub config_sha256: String,
    pub state: RunState,
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(json))
}

impl Checkpoint {
    pub fn new(config: &ExperimentConfig, state: &RunState) -> Self {
        Self { format: FORMAT.into(), version: VERSION, config_sha256: config_hash(config), state: state.clone() }
    }

    /// Rejects checkpoints of another format, version or config.
    pub fn check(&self, config: &ExperimentConfig) -> anyhow::Result<()> {
        if self.format != FORMAT {
            bail!("not a checkpoint (format `{}`)", self.format);
        }
        if self.version != VERSION {
            bail!("checkpoint version {} is not supported (expected {VERSION})", self.version);
        }
        if self.config_sha256 != config_hash(config) {
            bail!("checkpoint was written under a different experiment config");
        }
        Ok(())
    }
}

pub fn save(path: &Path, config: &ExperimentConfig, state: &RunState) -> anyhow::Result<()> {
    let bytes = serde_json::to_vec(&Checkpoint::new(config, state))?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// Loads without checking the config; see [`Checkpoint::check`].
pub fn load(path: &Path) -> anyhow::Result<Checkpoint> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let cp: Checkpoint =
        serde_json::from_slice(&bytes).with_context(|| format!("corrupt checkpoint {}", path.display()))?;
    if cp.format != FORMAT || cp.version != VERSION {
        bail!("{}: unsupported checkpoint {} v{}", path.display(), cp.format, cp.version);
    }
    Ok(cp)
}

pub fn load_for(path: &Path, config: &ExperimentConfig) -> anyhow::Result<RunState> {
    let cp = load(path)?;
    cp.check(config).with_context(|| format!("checkpoint {}", path.display()))?;
    Ok(cp.state)
}
