//! Run configuration: TOML schema, dotted-path overrides, validation.
//!
//! Unknown keys are rejected everywhere with key-path diagnostics. A run
//! always writes its fully resolved configuration (after overrides) into
//! the output directory before doing any work, and that emitted file
//! re-parses to an identical structure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{EnvParams, GameId};
use crate::learner::{LearnerConfig, OptimizerKind};
use crate::policy::MaskMode;
use crate::scalar::Scalar;

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("failed to parse TOML: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid override `{0}`: expected key=value")]
    MalformedOverride(String),
    #[error("override key `{0}` is ambiguous; candidates: {1}")]
    AmbiguousOverride(String, String),
    #[error("override key `{0}` does not exist")]
    UnknownOverrideKey(String),
    #[error("config validation failed at `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

/// A game with its sampling weight in the training mixture.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GameWeight {
    pub id: GameId,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub total_steps: u64,
    pub batch_size: usize,
    /// Parallel collection contexts; output is identical for any value.
    pub actors: usize,
    pub seed: u64,
    pub checkpoint_every: u64,
    pub eval_every: u64,
    pub eval_games: usize,
    /// Fraction of each step's trajectories written to the JSONL log.
    pub trajectory_sample_rate: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            total_steps: 400,
            batch_size: 128,
            actors: 4,
            seed: 0,
            checkpoint_every: 16,
            eval_every: 16,
            eval_games: 256,
            trajectory_sample_rate: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub temperature: f64,
    pub mask: MaskMode,
    /// How checkpoints act at evaluation time: greedy argmax or sampled.
    pub eval_action: EvalAction,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection {
            temperature: 1.0,
            mask: MaskMode::FullAlphabet,
            eval_action: EvalAction::Greedy,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum EvalAction {
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "sample")]
    Sample,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RaeSection {
    /// Role-conditioned baselines on; off selects vanilla REINFORCE.
    pub enabled: bool,
    /// EMA decay rate.
    pub alpha: f64,
}

impl Default for RaeSection {
    fn default() -> Self {
        RaeSection { enabled: true, alpha: 0.95 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerSection {
    pub optimizer: OptimizerKind,
    /// Desk-scale default; the published full-scale recipe uses
    /// `learning_rate_reference`.
    pub learning_rate: f64,
    /// Reference value from the full-scale recipe, kept for provenance.
    pub learning_rate_reference: f64,
    pub betas: [f64; 2],
    pub weight_decay: f64,
    pub grad_clip: f64,
    pub inner_epochs: u32,
    pub clip_eps: f64,
    pub discount: f64,
    pub kl_loss_coef: f64,
    pub kl_penalty_coef: f64,
}

impl Default for LearnerSection {
    fn default() -> Self {
        LearnerSection {
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-2,
            learning_rate_reference: 1e-6,
            betas: [0.9, 0.95],
            weight_decay: 0.0,
            grad_clip: 1.0,
            inner_epochs: 2,
            clip_eps: 0.2,
            discount: 1.0,
            kl_loss_coef: 0.0,
            kl_penalty_coef: 0.0,
        }
    }
}

/// Opponent selection for trajectory collection.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OpponentSection {
    pub kind: OpponentKind,
    /// Script name for `Scripted`.
    pub script: Option<String>,
    /// Checkpoint path for `FrozenCheckpoint`.
    pub checkpoint: Option<String>,
    /// How a frozen-checkpoint opponent acts.
    pub frozen_action: EvalAction,
}

impl Default for OpponentSection {
    fn default() -> Self {
        OpponentSection {
            kind: OpponentKind::SelfPlayShared,
            script: None,
            checkpoint: None,
            frozen_action: EvalAction::Sample,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum OpponentKind {
    SelfPlayShared,
    UniformRandomLegal,
    Scripted,
    FrozenCheckpoint,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Reference opponents evaluated at every eval step.
    pub reference: Vec<String>,
    /// Evaluate against the checkpoint from `lag_steps` ago.
    pub lag_eval: bool,
    pub lag_steps: u64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { reference: vec!["random".to_string()], lag_eval: true, lag_steps: 16 }
    }
}

/// Complete configuration of a training run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub games: Vec<GameWeight>,
    pub env: EnvParams,
    pub policy: PolicySection,
    pub rae: RaeSection,
    pub learner: LearnerSection,
    pub opponent: OpponentSection,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run: RunSection::default(),
            games: vec![GameWeight { id: GameId::KuhnPoker, weight: 1.0 }],
            env: EnvParams::default(),
            policy: PolicySection::default(),
            rae: RaeSection::default(),
            learner: LearnerSection::default(),
            opponent: OpponentSection::default(),
            eval: EvalSection::default(),
        }
    }
}

impl RunConfig {
    /// Parse TOML, apply dotted-path overrides, and validate.
    pub fn load(toml_text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
        let mut table: toml::Table = toml_text.parse()?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let config: RunConfig = table.try_into()?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Normalized game weights, in config order.
    pub fn game_weights(&self) -> Vec<(GameId, f64)> {
        let total: f64 = self.games.iter().map(|g| g.weight).sum();
        self.games.iter().map(|g| (g.id, g.weight / total)).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.games.is_empty() {
            return Err(invalid("games", "at least one game is required"));
        }
        for game in &self.games {
            if !(game.weight > 0.0) {
                return Err(invalid("games.weight", "weights must be positive"));
            }
        }
        let mut ids: Vec<GameId> = self.games.iter().map(|g| g.id).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != self.games.len() {
            return Err(invalid("games", "duplicate game entries"));
        }
        if self.run.batch_size == 0 {
            return Err(invalid("run.batch_size", "must be at least 1"));
        }
        if self.run.actors == 0 {
            return Err(invalid("run.actors", "must be at least 1"));
        }
        if self.run.checkpoint_every == 0 {
            return Err(invalid("run.checkpoint_every", "must be at least 1"));
        }
        if self.run.eval_every == 0 {
            return Err(invalid("run.eval_every", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.run.trajectory_sample_rate) {
            return Err(invalid("run.trajectory_sample_rate", "must lie in [0, 1]"));
        }
        if !(self.policy.temperature > 0.0) {
            return Err(invalid("policy.temperature", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rae.alpha) {
            return Err(invalid("rae.alpha", "must lie in [0, 1]"));
        }
        if !(self.learner.learning_rate > 0.0) {
            return Err(invalid("learner.learning_rate", "must be positive"));
        }
        if self.learner.inner_epochs == 0 {
            return Err(invalid("learner.inner_epochs", "must be at least 1"));
        }
        if !(self.learner.clip_eps > 0.0) {
            return Err(invalid("learner.clip_eps", "must be positive"));
        }
        if self.learner.discount != 1.0 {
            return Err(invalid("learner.discount", "only 1.0 is implemented (sparse terminal rewards)"));
        }
        if self.learner.kl_loss_coef != 0.0 || self.learner.kl_penalty_coef != 0.0 {
            return Err(invalid("learner.kl_loss_coef", "KL terms are fixed at 0.0; no implementation behind nonzero values"));
        }
        if self.learner.weight_decay < 0.0 {
            return Err(invalid("learner.weight_decay", "must be non-negative"));
        }
        if self.learner.grad_clip <= 0.0 && self.learner.grad_clip.is_finite() {
            return Err(invalid("learner.grad_clip", "must be positive (infinite disables)"));
        }
        match self.opponent.kind {
            OpponentKind::Scripted if self.opponent.script.is_none() => {
                return Err(invalid("opponent.script", "required when opponent.kind = \"Scripted\""));
            }
            OpponentKind::FrozenCheckpoint if self.opponent.checkpoint.is_none() => {
                return Err(invalid(
                    "opponent.checkpoint",
                    "required when opponent.kind = \"FrozenCheckpoint\"",
                ));
            }
            _ => {}
        }
        for reference in &self.eval.reference {
            parse_reference(reference)
                .ok_or_else(|| invalid("eval.reference", format!("unknown reference `{reference}`")))?;
        }
        if self.eval.lag_eval && self.eval.lag_steps == 0 {
            return Err(invalid("eval.lag_steps", "must be at least 1"));
        }
        Ok(())
    }

    /// Learner hyperparameters instantiated at scalar type `F`.
    pub fn learner_config<F: Scalar>(&self) -> LearnerConfig<F> {
        LearnerConfig {
            learning_rate: F::from_f64_lossy(self.learner.learning_rate),
            betas: (
                F::from_f64_lossy(self.learner.betas[0]),
                F::from_f64_lossy(self.learner.betas[1]),
            ),
            weight_decay: F::from_f64_lossy(self.learner.weight_decay),
            grad_clip: self
                .learner
                .grad_clip
                .is_finite()
                .then(|| F::from_f64_lossy(self.learner.grad_clip)),
            inner_epochs: self.learner.inner_epochs,
            clip_eps: F::from_f64_lossy(self.learner.clip_eps),
            optimizer: self.learner.optimizer,
            temperature: F::from_f64_lossy(self.policy.temperature),
            mask: self.policy.mask,
        }
    }
}

/// Reference opponent names accepted in `eval.reference`.
///
/// `"random"`, `"scripted:<name>"`, or `"checkpoint:<path>"`.
pub fn parse_reference(s: &str) -> Option<ReferenceOpponent> {
    if s == "random" {
        return Some(ReferenceOpponent::Random);
    }
    if let Some(name) = s.strip_prefix("scripted:") {
        return Some(ReferenceOpponent::Scripted(name.to_string()));
    }
    if let Some(path) = s.strip_prefix("checkpoint:") {
        return Some(ReferenceOpponent::Checkpoint(path.to_string()));
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReferenceOpponent {
    Random,
    Scripted(String),
    Checkpoint(String),
}

/// Apply one `key=value` override onto the TOML tree.
///
/// Single-segment keys resolve to the unique section that declares them
/// (`total_steps` means `run.total_steps`); ambiguous or unknown keys fail.
fn apply_override(root: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| ConfigError::MalformedOverride(item.to_string()))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(ConfigError::MalformedOverride(item.to_string()));
    }
    let path = resolve_key_path(key)?;
    let parsed: toml::Value = match raw.parse::<toml::Value>() {
        Ok(v) => v,
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut table = root;
    for segment in &path[..path.len() - 1] {
        table = table
            .entry(segment.clone())
            .or_insert(toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| ConfigError::UnknownOverrideKey(key.to_string()))?;
    }
    table.insert(path.last().unwrap().clone(), parsed);
    Ok(())
}

/// Known `section -> fields` map used for shorthand override resolution.
fn known_fields() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        (
            "run",
            vec![
                "total_steps",
                "batch_size",
                "actors",
                "seed",
                "checkpoint_every",
                "eval_every",
                "eval_games",
                "trajectory_sample_rate",
            ],
        ),
        ("env", vec!["kuhn_rounds", "kuhn_obs_includes_round"]),
        ("policy", vec!["temperature", "mask", "eval_action"]),
        ("rae", vec!["enabled", "alpha"]),
        (
            "learner",
            vec![
                "optimizer",
                "learning_rate",
                "learning_rate_reference",
                "betas",
                "weight_decay",
                "grad_clip",
                "inner_epochs",
                "clip_eps",
                "discount",
                "kl_loss_coef",
                "kl_penalty_coef",
            ],
        ),
        ("opponent", vec!["kind", "script", "checkpoint", "frozen_action"]),
        ("eval", vec!["reference", "lag_eval", "lag_steps"]),
    ]
}

fn resolve_key_path(key: &str) -> Result<Vec<String>, ConfigError> {
    if key.contains('.') {
        return Ok(key.split('.').map(|s| s.to_string()).collect());
    }
    let candidates: Vec<String> = known_fields()
        .iter()
        .filter(|(_, fields)| fields.contains(&key))
        .map(|(section, _)| format!("{section}.{key}"))
        .collect();
    match candidates.len() {
        0 => Err(ConfigError::UnknownOverrideKey(key.to_string())),
        1 => Ok(candidates[0].split('.').map(|s| s.to_string()).collect()),
        _ => Err(ConfigError::AmbiguousOverride(key.to_string(), candidates.join(", "))),
    }
}
