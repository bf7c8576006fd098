//! Role-and-game-conditioned tabular softmax policy.
//!
//! The table maps an [`ObservationKey`] to one logit vector over the game's
//! full action alphabet. Absent keys behave as all-zero logits, i.e. the
//! uniform distribution; entries materialize only when an update touches
//! them, so querying unseen states never fails and never allocates.
//!
//! Sampling is inverse-CDF in canonical alphabet order from a caller-
//! supplied uniform draw, which keeps every probability, log-probability
//! and gradient exactly reproducible from seeds.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{self, ActionToken, ObservationKey};
use crate::scalar::Scalar;

/// Policy table format version, recorded in checkpoints.
pub const POLICY_FORMAT_VERSION: u32 = 1;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("legal-only mask with an empty legal set")]
    EmptyLegalSet,
    #[error("temperature must be positive")]
    NonPositiveTemperature,
    #[error("action has zero probability under the masked distribution")]
    ZeroProbabilityAction,
}

/// Sampling mask: the full alphabet, or a legal subset (indices sorted).
#[derive(Clone, Copy, Debug)]
pub enum Mask<'a> {
    FullAlphabet,
    LegalOnly(&'a [u16]),
}

impl<'a> Mask<'a> {
    fn contains(&self, index: usize) -> bool {
        match self {
            Mask::FullAlphabet => true,
            Mask::LegalOnly(set) => set.binary_search(&(index as u16)).is_ok(),
        }
    }
}

/// Configured mask mode; resolved to a [`Mask`] per state.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum MaskMode {
    #[serde(rename = "full")]
    FullAlphabet,
    #[serde(rename = "legal")]
    LegalOnly,
}

/// A sampled action with the exact probability data of the emitting
/// distribution.
#[derive(Clone, Debug)]
pub struct ActionSample<F: Scalar> {
    pub action: ActionToken,
    pub index: u16,
    pub logprob: F,
    /// Entropy of the emitted distribution, in nats.
    pub distribution_entropy: F,
}

/// Tabular policy parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams<F: Scalar> {
    pub version: u32,
    table: BTreeMap<ObservationKey, Vec<F>>,
}

/// Immutable shared view of the policy used by collection actors.
pub type PolicySnapshot<F> = Arc<PolicyParams<F>>;

impl<F: Scalar> Default for PolicyParams<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> PolicyParams<F> {
    pub fn new() -> Self {
        PolicyParams { version: POLICY_FORMAT_VERSION, table: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Logits of a key, if materialized.
    pub fn logits(&self, key: &ObservationKey) -> Option<&[F]> {
        self.table.get(key).map(|v| v.as_slice())
    }

    /// Mutable logits of a key, materializing a zero vector on first touch.
    pub fn logits_mut(&mut self, key: &ObservationKey) -> &mut Vec<F> {
        let size = env::alphabet_size(key.game);
        self.table.entry(key.clone()).or_insert_with(|| vec![F::zero(); size])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ObservationKey, &Vec<F>)> {
        self.table.iter()
    }

    pub(crate) fn insert_raw(&mut self, key: ObservationKey, logits: Vec<F>) {
        debug_assert_eq!(logits.len(), env::alphabet_size(key.game));
        self.table.insert(key, logits);
    }

    /// Probability vector over the full alphabet.
    ///
    /// `softmax(logits / temperature)` restricted to the mask; masked-out
    /// entries are exactly zero and the rest sum to 1 within 1e-12.
    pub fn action_distribution(
        &self,
        obs: &ObservationKey,
        temperature: F,
        mask: Mask<'_>,
    ) -> Result<Vec<F>, PolicyError> {
        if temperature <= F::zero() {
            return Err(PolicyError::NonPositiveTemperature);
        }
        let size = env::alphabet_size(obs.game);
        if let Mask::LegalOnly(set) = mask {
            if set.is_empty() {
                return Err(PolicyError::EmptyLegalSet);
            }
            debug_assert!(set.iter().all(|&i| (i as usize) < size));
        }
        let logits = self.table.get(obs);
        let logit = |i: usize| logits.map_or(F::zero(), |l| l[i]);

        let mut max = F::neg_infinity();
        for i in 0..size {
            if mask.contains(i) && logit(i) > max {
                max = logit(i);
            }
        }
        let mut probs = vec![F::zero(); size];
        let mut total = F::zero();
        for i in 0..size {
            if mask.contains(i) {
                let p = ((logit(i) - max) / temperature).exp();
                probs[i] = p;
                total += p;
            }
        }
        for p in probs.iter_mut() {
            *p = *p / total;
        }
        Ok(probs)
    }

    /// Sample by inverse CDF in canonical alphabet order.
    ///
    /// `draw` is a uniform real in `[0, 1)` supplied by the caller's seeded
    /// stream; identical inputs give identical samples.
    pub fn sample(
        &self,
        obs: &ObservationKey,
        temperature: F,
        mask: Mask<'_>,
        draw: F,
    ) -> Result<ActionSample<F>, PolicyError> {
        let probs = self.action_distribution(obs, temperature, mask)?;
        let mut cumulative = F::zero();
        let mut chosen = None;
        for (i, &p) in probs.iter().enumerate() {
            if p > F::zero() {
                cumulative += p;
                chosen = Some(i);
                if draw < cumulative {
                    break;
                }
            }
        }
        let index = chosen.expect("mask admits at least one action");
        Ok(ActionSample {
            action: ActionToken::new(obs.game, index as u16),
            index: index as u16,
            logprob: probs[index].ln(),
            distribution_entropy: entropy(&probs),
        })
    }

    /// Highest-probability in-mask action; ties break to the lowest index.
    pub fn greedy(&self, obs: &ObservationKey, mask: Mask<'_>) -> Result<ActionToken, PolicyError> {
        let probs = self.action_distribution(obs, F::one(), mask)?;
        let mut best = None;
        for (i, &p) in probs.iter().enumerate() {
            match best {
                Some((_, bp)) if p <= bp => {}
                _ if p > F::zero() => best = Some((i, p)),
                _ => {}
            }
        }
        let (index, _) = best.expect("mask admits at least one action");
        Ok(ActionToken::new(obs.game, index as u16))
    }

    /// Gradient of `log pi(action | obs)` with respect to the key's logits.
    ///
    /// In-mask entries get `(indicator(a == action) - p(a)) / temperature`;
    /// masked-out entries are zero. Entries sum to 0 in full-alphabet mode.
    pub fn logprob_gradient(
        &self,
        obs: &ObservationKey,
        action: u16,
        temperature: F,
        mask: Mask<'_>,
    ) -> Result<Vec<F>, PolicyError> {
        let probs = self.action_distribution(obs, temperature, mask)?;
        if probs[action as usize] <= F::zero() {
            return Err(PolicyError::ZeroProbabilityAction);
        }
        let mut grad = vec![F::zero(); probs.len()];
        for (i, &p) in probs.iter().enumerate() {
            if mask.contains(i) {
                let indicator = if i == action as usize { F::one() } else { F::zero() };
                grad[i] = (indicator - p) / temperature;
            }
        }
        Ok(grad)
    }

    /// Read-only snapshot shared with collection actors; never observes a
    /// half-applied update because the learner mutates its own instance.
    pub fn snapshot(&self) -> PolicySnapshot<F> {
        Arc::new(self.clone())
    }

    /// Debug export: one line per key with its logits.
    pub fn export_text(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        for (key, logits) in &self.table {
            let rendered: Vec<String> = logits.iter().map(|l| format!("{l}")).collect();
            writeln!(out, "{}\t{}\t{}\t{}", key.game, key.role, key.key, rendered.join(","))?;
        }
        Ok(())
    }
}

/// Entropy in nats of a probability vector; zero entries contribute zero.
pub fn entropy<F: Scalar>(probs: &[F]) -> F {
    let mut h = F::zero();
    for &p in probs {
        if p > F::zero() {
            h -= p * p.ln();
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{GameId, Role};

    fn key(game: GameId, role: u8, s: &str) -> ObservationKey {
        ObservationKey { game, role: Role(role), key: s.to_string() }
    }

    #[test]
    fn absent_key_is_uniform() {
        let params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::TicTacToe, 0, "........x");
        let probs = params.action_distribution(&obs, 1.0, Mask::FullAlphabet).unwrap();
        assert_eq!(probs.len(), 9);
        for p in probs {
            assert!((p - 1.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_logits_stay_uniform_at_any_temperature() {
        let mut params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::KuhnPoker, 0, "c=K|h=");
        *params.logits_mut(&obs) = vec![1.0; 4];
        let probs = params.action_distribution(&obs, 0.5, Mask::FullAlphabet).unwrap();
        for p in probs {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn two_logit_distribution_matches_direct_evaluation() {
        let mut params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::PigDice, 0, "b=0|ob=0|pot=0");
        *params.logits_mut(&obs) = vec![2.0, 0.0];
        let probs = params.action_distribution(&obs, 1.0, Mask::FullAlphabet).unwrap();
        let e2 = 2.0f64.exp();
        assert!((probs[0] - e2 / (e2 + 1.0)).abs() < 1e-15);
        assert!((probs[1] - 1.0 / (e2 + 1.0)).abs() < 1e-15);
        assert!((probs[0] - 0.8808).abs() < 1e-4);
        assert!((probs[1] - 0.1192).abs() < 1e-4);
    }

    #[test]
    fn legal_only_mask_renormalizes() {
        let params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::KuhnPoker, 1, "c=J|h=bet");
        let legal = [2u16, 3];
        let probs = params.action_distribution(&obs, 1.0, Mask::LegalOnly(&legal)).unwrap();
        assert_eq!(probs[0], 0.0);
        assert_eq!(probs[1], 0.0);
        assert!((probs[2] - 0.5).abs() < 1e-15);
        assert!((probs[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_legal_set_is_an_error() {
        let params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::KuhnPoker, 0, "c=Q|h=");
        assert_eq!(
            params.action_distribution(&obs, 1.0, Mask::LegalOnly(&[])),
            Err(PolicyError::EmptyLegalSet)
        );
    }

    #[test]
    fn uniform_two_action_draw_picks_by_inverse_cdf() {
        let params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::PigDice, 0, "b=0|ob=0|pot=0");
        let sample = params.sample(&obs, 1.0, Mask::FullAlphabet, 0.75).unwrap();
        assert_eq!(sample.index, 1);
        assert!((sample.logprob - 0.5f64.ln()).abs() < 1e-15);
        let sample = params.sample(&obs, 1.0, Mask::FullAlphabet, 0.25).unwrap();
        assert_eq!(sample.index, 0);
    }

    #[test]
    fn degenerate_distribution_samples_with_zero_logprob_and_entropy() {
        let params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::LiarsDice, 1, "d=11111|c=10x6");
        let legal = [60u16];
        let sample = params.sample(&obs, 1.0, Mask::LegalOnly(&legal), 0.9999).unwrap();
        assert_eq!(sample.index, 60);
        assert_eq!(sample.logprob, 0.0);
        assert_eq!(sample.distribution_entropy, 0.0);
    }

    #[test]
    fn sampled_frequencies_match_the_distribution() {
        use rand::Rng;
        let mut params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::TicTacToe, 0, ".........");
        *params.logits_mut(&obs) = vec![0.9, -0.3, 0.0, 0.4, -1.2, 0.0, 0.7, 0.1, -0.5];
        let probs = params.action_distribution(&obs, 1.0, Mask::FullAlphabet).unwrap();
        let n = 100_000;
        let mut counts = [0usize; 9];
        let mut rng = crate::seeds::rng(11);
        for _ in 0..n {
            let draw: f64 = rng.random();
            let s = params.sample(&obs, 1.0, Mask::FullAlphabet, draw).unwrap();
            counts[s.index as usize] += 1;
        }
        for i in 0..9 {
            let freq = counts[i] as f64 / n as f64;
            let se = (probs[i] * (1.0 - probs[i]) / n as f64).sqrt();
            assert!(
                (freq - probs[i]).abs() <= 3.0 * se,
                "action {i}: freq {freq} vs p {} (se {se})",
                probs[i]
            );
        }
    }

    #[test]
    fn gradient_of_uniform_two_action_choice() {
        let params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::PigDice, 1, "b=0|ob=0|pot=4");
        let grad = params.logprob_gradient(&obs, 0, 1.0, Mask::FullAlphabet).unwrap();
        assert!((grad[0] - 0.5).abs() < 1e-15);
        assert!((grad[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_is_zero_for_a_forced_action() {
        let params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::LiarsDice, 0, "d=11111|c=10x6");
        let legal = [60u16];
        let grad = params.logprob_gradient(&obs, 60, 1.0, Mask::LegalOnly(&legal)).unwrap();
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn gradient_entries_sum_to_zero_in_full_mode() {
        let mut params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::ConnectFour, 0, ".".repeat(42).as_str());
        *params.logits_mut(&obs) = vec![0.3, -0.4, 1.1, 0.0, -2.0, 0.25, 0.6];
        let grad = params.logprob_gradient(&obs, 4, 0.7, Mask::FullAlphabet).unwrap();
        let sum: f64 = grad.iter().sum();
        assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn role_conditioning_uses_distinct_keys() {
        let board = ".X.O.....";
        let key0 = key(GameId::TicTacToe, 0, board);
        let key1 = key(GameId::TicTacToe, 1, board);
        assert_ne!(key0, key1);
        let mut params: PolicyParams<f64> = PolicyParams::new();
        params.logits_mut(&key0)[3] = 5.0;
        assert!(params.logits(&key1).is_none());
    }

    #[test]
    fn snapshots_are_isolated_from_later_updates() {
        let mut params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::PigDice, 0, "b=0|ob=0|pot=0");
        let snap_before = params.snapshot();
        let snap_same = params.snapshot();
        assert_eq!(*snap_before, *snap_same);
        params.logits_mut(&obs)[0] = 3.0;
        assert!(snap_before.logits(&obs).is_none());
        assert_eq!(params.logits(&obs).unwrap()[0], 3.0);
    }

    #[test]
    fn nonpositive_temperature_is_rejected() {
        let params: PolicyParams<f64> = PolicyParams::new();
        let obs = key(GameId::PigDice, 0, "b=0|ob=0|pot=0");
        assert_eq!(
            params.action_distribution(&obs, 0.0, Mask::FullAlphabet),
            Err(PolicyError::NonPositiveTemperature)
        );
    }

    #[test]
    fn works_in_f32_too() {
        let params: PolicyParams<f32> = PolicyParams::new();
        let obs = key(GameId::PigDice, 0, "b=0|ob=0|pot=0");
        let probs = params.action_distribution(&obs, 1.0, Mask::FullAlphabet).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-6);
    }
}
