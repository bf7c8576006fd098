//! Checkpoint persistence.
//!
//! A checkpoint bundles everything needed to resume a run exactly: policy
//! table, baselines, optimizer moments, step counter, and the SHA-256 of the
//! resolved config. The header records the format version, the observation-
//! key grammar version, the scalar type, the run's games and their full
//! alphabet orders. Serialization is canonical (sorted tables, shortest
//! float representation), so load-then-save reproduces a file byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::advantage::{BaselineEntry, BaselineTable};
use crate::env::{self, GameId, ObservationKey, Role, KEY_GRAMMAR_VERSION};
use crate::learner::OptimizerState;
use crate::policy::PolicyParams;
use crate::scalar::Scalar;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Error, Debug)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported checkpoint format version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint scalar is {found} but {expected} was requested")]
    ScalarMismatch { found: String, expected: String },
}

/// In-memory checkpoint over scalar `F`.
#[derive(Clone, Debug)]
pub struct Checkpoint<F: Scalar> {
    pub step: u64,
    pub config_sha256: String,
    pub games: Vec<GameId>,
    pub policy: PolicyParams<F>,
    pub baselines: BaselineTable<F>,
    pub optimizer: OptimizerState<F>,
}

impl<F: Scalar> Checkpoint<F> {
    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        format!("step_{:05}", self.step)
    }

    pub fn to_json(&self) -> String {
        let file = CheckpointFile {
            format_version: CHECKPOINT_FORMAT_VERSION,
            key_grammar_version: KEY_GRAMMAR_VERSION,
            scalar: F::NAME.to_string(),
            step: self.step,
            config_sha256: self.config_sha256.clone(),
            games: self.games.clone(),
            alphabets: self
                .games
                .iter()
                .map(|&g| (g.name(), env::alphabet(g)))
                .collect(),
            policy_version: self.policy.version,
            policy: self
                .policy
                .entries()
                .map(|(key, logits)| PolicyEntrySer {
                    game: key.game,
                    role: key.role,
                    key: key.key.clone(),
                    logits: logits.clone(),
                })
                .collect(),
            baseline_alpha: self.baselines.alpha(),
            baselines: self
                .baselines
                .entries()
                .map(|(&(game, role), entry)| BaselineSer {
                    game,
                    role,
                    value: entry.value,
                    update_count: entry.update_count,
                })
                .collect(),
            optimizer_step: self.optimizer.step,
            optimizer: self
                .optimizer
                .moments()
                .map(|(key, m, v)| MomentSer {
                    game: key.game,
                    role: key.role,
                    key: key.key.clone(),
                    m: m.clone(),
                    v: v.clone(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Checkpoint<F>, CheckpointError> {
        let file: CheckpointFile<F> = serde_json::from_str(text)?;
        if file.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(CheckpointError::UnsupportedVersion(file.format_version));
        }
        if file.scalar != F::NAME {
            return Err(CheckpointError::ScalarMismatch {
                found: file.scalar,
                expected: F::NAME.to_string(),
            });
        }
        let mut policy = PolicyParams::new();
        policy.version = file.policy_version;
        for entry in file.policy {
            policy.insert_raw(
                ObservationKey { game: entry.game, role: entry.role, key: entry.key },
                entry.logits,
            );
        }
        let mut baselines = BaselineTable::new(file.baseline_alpha);
        for entry in file.baselines {
            baselines.insert_raw(
                entry.game,
                entry.role,
                BaselineEntry { value: entry.value, update_count: entry.update_count },
            );
        }
        let mut optimizer = OptimizerState::new();
        optimizer.step = file.optimizer_step;
        for entry in file.optimizer {
            optimizer.insert_raw(
                ObservationKey { game: entry.game, role: entry.role, key: entry.key },
                entry.m,
                entry.v,
            );
        }
        Ok(Checkpoint {
            step: file.step,
            config_sha256: file.config_sha256,
            games: file.games,
            policy,
            baselines,
            optimizer,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint<F>, CheckpointError> {
        let text = std::fs::read_to_string(path)?;
        Checkpoint::from_json(&text)
    }

    /// One-line human summary for `inspect-checkpoint`.
    pub fn summary(&self) -> String {
        let games: Vec<String> = self.games.iter().map(|g| g.name()).collect();
        let baselines: Vec<String> = self
            .baselines
            .entries()
            .map(|(&(game, role), e)| format!("b({},{})={:.6} (n={})", game.name(), role, e.value.to_f64_lossy(), e.update_count))
            .collect();
        format!(
            "checkpoint {} | scalar {} | games [{}] | policy keys {} | optimizer step {} | {}",
            self.id(),
            F::NAME,
            games.join(", "),
            self.policy.len(),
            self.optimizer.step,
            if baselines.is_empty() { "no baselines".to_string() } else { baselines.join(" ") },
        )
    }
}

/// Hash of the resolved config text recorded in checkpoints.
pub fn config_sha256(config_toml: &str) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(config_toml.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
struct CheckpointFile<F: Scalar> {
    format_version: u32,
    key_grammar_version: u32,
    scalar: String,
    step: u64,
    config_sha256: String,
    games: Vec<GameId>,
    alphabets: BTreeMap<String, Vec<String>>,
    policy_version: u32,
    policy: Vec<PolicyEntrySer<F>>,
    baseline_alpha: F,
    baselines: Vec<BaselineSer<F>>,
    optimizer_step: u64,
    optimizer: Vec<MomentSer<F>>,
}

#[derive(Serialize, Deserialize)]
struct PolicyEntrySer<F> {
    game: GameId,
    role: Role,
    key: String,
    logits: Vec<F>,
}

#[derive(Serialize, Deserialize)]
struct BaselineSer<F> {
    game: GameId,
    role: Role,
    value: F,
    update_count: u64,
}

#[derive(Serialize, Deserialize)]
struct MomentSer<F> {
    game: GameId,
    role: Role,
    key: String,
    m: Vec<F>,
    v: Vec<F>,
}
