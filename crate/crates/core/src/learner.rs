//! Policy-gradient learner.
//!
//! Assembles the advantage-weighted REINFORCE gradient from a batch of
//! trajectories — per-turn terms are summed within a trajectory, never
//! divided by trajectory length, and the batch is averaged over trajectory
//! count — then runs the clipped proximal scheme: per inner epoch, compute
//! new/old probability ratios per turn, clip to `[1-eps, 1+eps]`, take the
//! clipped-surrogate gradient with the same advantages, apply global
//! gradient-norm clipping, and step the optimizer (adaptive-moment ascent,
//! or plain gradient ascent for oracle-equivalence checks).
//!
//! Epoch 1 is on-policy: every ratio is exactly 1 and the epoch-1 gradient
//! equals the REINFORCE gradient bit for bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{GameId, ObservationKey, Role};
use crate::policy::{Mask, MaskMode, PolicyParams};
use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

const ADAM_EPS: f64 = 1e-8;
/// On-policy tolerance between recorded and recomputed log-probabilities.
const SNAPSHOT_TOLERANCE: f64 = 1e-9;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum LearnerError {
    #[error("batch has {batch} trajectories but {advantages} advantage rows")]
    MissingAdvantage { batch: usize, advantages: usize },
    #[error("trajectory {trajectory} turn {turn}: recorded logprob deviates from snapshot by {delta}")]
    SnapshotMismatch { trajectory: usize, turn: u32, delta: f64 },
    #[error("non-finite gradient; step aborted, parameters preserved")]
    NonFiniteGradient,
    #[error("policy error during gradient computation: {0}")]
    Policy(#[from] crate::policy::PolicyError),
}

/// Sparse gradient over policy logits.
#[derive(Clone, Debug, Default)]
pub struct GradientAccumulator<F: Scalar> {
    entries: BTreeMap<ObservationKey, Vec<F>>,
}

impl<F: Scalar> GradientAccumulator<F> {
    pub fn new() -> Self {
        GradientAccumulator { entries: BTreeMap::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ObservationKey, &Vec<F>)> {
        self.entries.iter()
    }

    pub fn get(&self, key: &ObservationKey) -> Option<&[F]> {
        self.entries.get(key).map(|v| v.as_slice())
    }

    /// Add `weight * grad` into the entry for `key`.
    pub fn add_scaled(&mut self, key: &ObservationKey, grad: &[F], weight: F) {
        let entry = self
            .entries
            .entry(key.clone())
            .or_insert_with(|| vec![F::zero(); grad.len()]);
        for (e, &g) in entry.iter_mut().zip(grad) {
            *e += weight * g;
        }
    }

    pub fn scale(&mut self, factor: F) {
        for entry in self.entries.values_mut() {
            for e in entry.iter_mut() {
                *e *= factor;
            }
        }
    }

    /// Euclidean norm over all entries.
    pub fn global_norm(&self) -> F {
        let mut sum = F::zero();
        for entry in self.entries.values() {
            for &g in entry {
                sum += g * g;
            }
        }
        sum.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.values().all(|e| e.iter().all(|g| g.is_finite()))
    }
}

/// Which update rule applies the (already clipped) gradient.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[serde(rename = "adam")]
    Adam,
    /// Plain gradient ascent `theta += lr * g`; used by equivalence oracles.
    #[serde(rename = "sgd")]
    Sgd,
}

/// Adaptive-moment state; moments exist only for entries a gradient touched.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<F: Scalar> {
    pub step: u64,
    m: BTreeMap<ObservationKey, Vec<F>>,
    v: BTreeMap<ObservationKey, Vec<F>>,
}

impl<F: Scalar> Default for OptimizerState<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> OptimizerState<F> {
    pub fn new() -> Self {
        OptimizerState { step: 0, m: BTreeMap::new(), v: BTreeMap::new() }
    }

    pub fn moments(&self) -> impl Iterator<Item = (&ObservationKey, &Vec<F>, &Vec<F>)> {
        self.m.iter().map(move |(k, m)| (k, m, self.v.get(k).expect("paired moment")))
    }

    pub(crate) fn insert_raw(&mut self, key: ObservationKey, m: Vec<F>, v: Vec<F>) {
        self.m.insert(key.clone(), m);
        self.v.insert(key, v);
    }

    /// Apply one ascent update for the entries present in `grad`.
    fn apply(
        &mut self,
        params: &mut PolicyParams<F>,
        grad: &GradientAccumulator<F>,
        cfg: &LearnerConfig<F>,
    ) {
        if grad.is_empty() {
            return;
        }
        match cfg.optimizer {
            OptimizerKind::Sgd => {
                for (key, g) in grad.entries() {
                    let logits = params.logits_mut(key);
                    for (l, &gi) in logits.iter_mut().zip(g) {
                        *l += cfg.learning_rate * gi;
                    }
                }
            }
            OptimizerKind::Adam => {
                self.step += 1;
                let (b1, b2) = cfg.betas;
                let t = self.step as i32;
                let bias1 = F::one() - b1.powi(t);
                let bias2 = F::one() - b2.powi(t);
                let eps = F::from_f64_lossy(ADAM_EPS);
                for (key, g) in grad.entries() {
                    let m = self.m.entry(key.clone()).or_insert_with(|| vec![F::zero(); g.len()]);
                    let v = self.v.entry(key.clone()).or_insert_with(|| vec![F::zero(); g.len()]);
                    let logits = params.logits_mut(key);
                    for i in 0..g.len() {
                        m[i] = b1 * m[i] + (F::one() - b1) * g[i];
                        v[i] = b2 * v[i] + (F::one() - b2) * g[i] * g[i];
                        let m_hat = m[i] / bias1;
                        let v_hat = v[i] / bias2;
                        logits[i] += cfg.learning_rate * m_hat / (v_hat.sqrt() + eps);
                        if cfg.weight_decay > F::zero() {
                            let decay = cfg.learning_rate * cfg.weight_decay * logits[i];
                            logits[i] -= decay;
                        }
                    }
                }
            }
        }
    }
}

/// Learner hyperparameters for one training step.
#[derive(Clone, Copy, Debug)]
pub struct LearnerConfig<F: Scalar> {
    pub learning_rate: F,
    pub betas: (F, F),
    pub weight_decay: F,
    /// Global gradient-norm clip threshold; `None` disables clipping.
    pub grad_clip: Option<F>,
    pub inner_epochs: u32,
    /// Ratio clip epsilon; `F::infinity()` disables ratio clipping.
    pub clip_eps: F,
    pub optimizer: OptimizerKind,
    /// Collection-time sampling temperature.
    pub temperature: F,
    /// Collection-time mask mode.
    pub mask: MaskMode,
}

impl<F: Scalar> Default for LearnerConfig<F> {
    fn default() -> Self {
        LearnerConfig {
            learning_rate: F::from_f64_lossy(1e-2),
            betas: (F::from_f64_lossy(0.9), F::from_f64_lossy(0.95)),
            weight_decay: F::zero(),
            grad_clip: Some(F::one()),
            inner_epochs: 2,
            clip_eps: F::from_f64_lossy(0.2),
            optimizer: OptimizerKind::Adam,
            temperature: F::one(),
            mask: MaskMode::FullAlphabet,
        }
    }
}

/// Telemetry of one training step.
#[derive(Clone, Debug)]
pub struct TrainStepReport<F: Scalar> {
    /// Global norm of the epoch-1 (REINFORCE) gradient before clipping.
    pub gradient_norm_pre_clip: F,
    /// Whether norm clipping triggered in any epoch.
    pub clipped: bool,
    /// Fraction of surrogate terms clipped across epochs after the first.
    pub ratio_clip_fraction: F,
    /// Mean entropy of the collection-time action distributions.
    pub mean_entropy: F,
    /// Mean advantage per (game, role) over the batch.
    pub mean_advantage: BTreeMap<(GameId, Role), F>,
}

fn turn_mask<'a, F: Scalar>(cfg: &LearnerConfig<F>, legal_set: &'a [u16]) -> Mask<'a> {
    match cfg.mask {
        MaskMode::FullAlphabet => Mask::FullAlphabet,
        MaskMode::LegalOnly => Mask::LegalOnly(legal_set),
    }
}

/// Advantage-weighted REINFORCE gradient of a batch against `snapshot`.
///
/// For each trajectory and each of its policy turns, adds
/// `advantage(game, role) * grad log pi(action | obs)`; turn terms are
/// summed per trajectory and the batch is averaged by trajectory count.
/// Zero-advantage terms are skipped so they cannot materialize entries.
pub fn accumulate_reinforce<F: Scalar>(
    batch: &[Trajectory<F>],
    advantages: &[[F; 2]],
    snapshot: &PolicyParams<F>,
    cfg: &LearnerConfig<F>,
) -> Result<GradientAccumulator<F>, LearnerError> {
    if batch.len() != advantages.len() {
        return Err(LearnerError::MissingAdvantage { batch: batch.len(), advantages: advantages.len() });
    }
    let mut acc = GradientAccumulator::new();
    for (traj_index, (traj, adv)) in batch.iter().zip(advantages).enumerate() {
        for turn in &traj.turns {
            let Some(recorded) = turn.logprob else { continue };
            let weight = adv[turn.role.index()];
            if weight == F::zero() {
                continue;
            }
            let mask = turn_mask(cfg, &turn.legal_set);
            let probs = snapshot.action_distribution(&turn.obs_key, cfg.temperature, mask)?;
            let recomputed = probs[turn.action as usize].ln();
            let delta = (recomputed - recorded).abs().to_f64_lossy();
            if delta > SNAPSHOT_TOLERANCE {
                return Err(LearnerError::SnapshotMismatch {
                    trajectory: traj_index,
                    turn: turn.t,
                    delta,
                });
            }
            let grad = snapshot.logprob_gradient(&turn.obs_key, turn.action, cfg.temperature, mask)?;
            acc.add_scaled(&turn.obs_key, &grad, weight);
        }
    }
    if !batch.is_empty() {
        acc.scale(F::one() / F::from_f64_lossy(batch.len() as f64));
    }
    Ok(acc)
}

/// One proximal training step: `inner_epochs` clipped-surrogate gradient
/// ascents with the batch's advantages, each norm-clipped then applied by
/// the optimizer. On a non-finite gradient the step aborts and both the
/// parameters and optimizer state are left untouched.
pub fn proximal_step<F: Scalar>(
    params: &mut PolicyParams<F>,
    optimizer: &mut OptimizerState<F>,
    batch: &[Trajectory<F>],
    advantages: &[[F; 2]],
    cfg: &LearnerConfig<F>,
) -> Result<TrainStepReport<F>, LearnerError> {
    if batch.len() != advantages.len() {
        return Err(LearnerError::MissingAdvantage { batch: batch.len(), advantages: advantages.len() });
    }
    let backup_params = params.clone();
    let backup_opt = optimizer.clone();
    let result = proximal_epochs(params, optimizer, batch, advantages, cfg);
    if result.is_err() {
        *params = backup_params;
        *optimizer = backup_opt;
    }
    result
}

fn proximal_epochs<F: Scalar>(
    params: &mut PolicyParams<F>,
    optimizer: &mut OptimizerState<F>,
    batch: &[Trajectory<F>],
    advantages: &[[F; 2]],
    cfg: &LearnerConfig<F>,
) -> Result<TrainStepReport<F>, LearnerError> {
    let mut report = TrainStepReport {
        gradient_norm_pre_clip: F::zero(),
        clipped: false,
        ratio_clip_fraction: F::zero(),
        mean_entropy: batch_mean_entropy(batch),
        mean_advantage: mean_advantage_by_game(batch, advantages),
    };
    let one = F::one();
    let lo = one - cfg.clip_eps;
    let hi = one + cfg.clip_eps;
    let mut late_terms = 0u64;
    let mut late_clipped = 0u64;

    for epoch in 1..=cfg.inner_epochs {
        let mut acc = GradientAccumulator::new();
        for (traj_index, (traj, adv)) in batch.iter().zip(advantages).enumerate() {
            for turn in &traj.turns {
                let Some(recorded) = turn.logprob else { continue };
                let weight = adv[turn.role.index()];
                if weight == F::zero() {
                    continue;
                }
                let mask = turn_mask(cfg, &turn.legal_set);
                let probs = params.action_distribution(&turn.obs_key, cfg.temperature, mask)?;
                let new_logprob = probs[turn.action as usize].ln();
                let ratio = if epoch == 1 {
                    let delta = (new_logprob - recorded).abs().to_f64_lossy();
                    if delta > SNAPSHOT_TOLERANCE {
                        return Err(LearnerError::SnapshotMismatch {
                            trajectory: traj_index,
                            turn: turn.t,
                            delta,
                        });
                    }
                    one
                } else {
                    (new_logprob - recorded).exp()
                };
                // The min(r*A, clip(r)*A) surrogate has zero gradient exactly
                // when the clipped branch is active.
                let clip_active = (weight > F::zero() && ratio > hi) || (weight < F::zero() && ratio < lo);
                if epoch > 1 {
                    late_terms += 1;
                    if clip_active {
                        late_clipped += 1;
                    }
                }
                if clip_active {
                    continue;
                }
                let grad = params.logprob_gradient(&turn.obs_key, turn.action, cfg.temperature, mask)?;
                acc.add_scaled(&turn.obs_key, &grad, weight * ratio);
            }
        }
        if !batch.is_empty() {
            acc.scale(one / F::from_f64_lossy(batch.len() as f64));
        }
        if !acc.is_finite() {
            return Err(LearnerError::NonFiniteGradient);
        }
        let norm = acc.global_norm();
        if !norm.is_finite() {
            return Err(LearnerError::NonFiniteGradient);
        }
        if epoch == 1 {
            report.gradient_norm_pre_clip = norm;
        }
        if let Some(clip) = cfg.grad_clip {
            if norm > clip {
                acc.scale(clip / norm);
                report.clipped = true;
            }
        }
        optimizer.apply(params, &acc, cfg);
    }
    if late_terms > 0 {
        report.ratio_clip_fraction =
            F::from_f64_lossy(late_clipped as f64) / F::from_f64_lossy(late_terms as f64);
    }
    Ok(report)
}

/// Advantages for vanilla REINFORCE: the raw returns, no baseline.
pub fn vanilla_advantages<F: Scalar>(batch: &[Trajectory<F>]) -> Vec<[F; 2]> {
    batch.iter().map(|t| t.returns()).collect()
}

fn batch_mean_entropy<F: Scalar>(batch: &[Trajectory<F>]) -> F {
    let mut sum = F::zero();
    let mut count = 0u64;
    for traj in batch {
        for turn in &traj.turns {
            if let Some(h) = turn.entropy {
                sum += h;
                count += 1;
            }
        }
    }
    if count == 0 {
        F::zero()
    } else {
        sum / F::from_f64_lossy(count as f64)
    }
}

fn mean_advantage_by_game<F: Scalar>(
    batch: &[Trajectory<F>],
    advantages: &[[F; 2]],
) -> BTreeMap<(GameId, Role), F> {
    let mut sums: BTreeMap<(GameId, Role), (F, u64)> = BTreeMap::new();
    for (traj, adv) in batch.iter().zip(advantages) {
        for role in [Role::P0, Role::P1] {
            let entry = sums.entry((traj.game, role)).or_insert((F::zero(), 0));
            entry.0 += adv[role.index()];
            entry.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(k, (sum, n))| (k, sum / F::from_f64_lossy(n as f64)))
        .collect()
}
