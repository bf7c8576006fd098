//! Collected trajectories and their JSONL wire format.
//!
//! One JSON object per line: `{game, seed, params, turns, rho, reason}`
//! with `turns: [{t, role, obs_key, action, legal, logprob}]`. The `params`
//! object records the game parameters the match was played with and
//! `logprob` is null for turns played by a fixed opponent; both are part of
//! the stable format (see `docs/formats.md`).

use serde::{Deserialize, Serialize};

use crate::env::{ActionToken, EnvParams, GameId, ObservationKey, OutcomeReason, Role};
use crate::scalar::Scalar;

/// One decision of a match.
#[derive(Clone, Debug)]
pub struct TurnRecord<F: Scalar> {
    pub t: u32,
    pub role: Role,
    pub obs_key: ObservationKey,
    /// Alphabet index of the action taken.
    pub action: u16,
    /// Whether the action was legal in that state.
    pub legal: bool,
    /// Log-probability under the collection-time snapshot; `None` for turns
    /// played by a fixed opponent.
    pub logprob: Option<F>,
    /// Entropy of the emitting distribution, for policy turns.
    pub entropy: Option<F>,
    /// Legal alphabet indices at this state, kept for masked re-evaluation.
    pub legal_set: Vec<u16>,
    /// Optional free-text annotation; empty for the symbolic policy.
    pub annotation: String,
}

/// One complete match with terminal rewards.
#[derive(Clone, Debug)]
pub struct Trajectory<F: Scalar> {
    pub game: GameId,
    pub seed: u64,
    pub params: EnvParams,
    pub turns: Vec<TurnRecord<F>>,
    /// Terminal reward of player 0; player 1 receives `-rho`.
    pub rho: i8,
    pub reason: OutcomeReason,
}

impl<F: Scalar> Trajectory<F> {
    /// Returns `(R_0, R_1)`; always zero-sum.
    pub fn returns(&self) -> [F; 2] {
        let r = F::from_f64_lossy(self.rho as f64);
        [r, -r]
    }

    pub fn reward(&self, role: Role) -> F {
        self.returns()[role.index()]
    }

    pub fn to_jsonl(&self) -> String {
        let line = TrajectoryLine {
            game: self.game,
            seed: self.seed,
            params: self.params,
            turns: self
                .turns
                .iter()
                .map(|t| TurnLine {
                    t: t.t,
                    role: t.role,
                    obs_key: t.obs_key.key.clone(),
                    action: ActionToken::new(self.game, t.action).symbol(),
                    legal: t.legal,
                    logprob: t.logprob.map(|l| l.to_f64_lossy()),
                })
                .collect(),
            rho: self.rho,
            reason: self.reason,
        };
        serde_json::to_string(&line).expect("trajectory serializes")
    }

    pub fn from_jsonl(line: &str) -> Result<Trajectory<F>, serde_json::Error> {
        let parsed: TrajectoryLine = serde_json::from_str(line)?;
        let game = parsed.game;
        let turns = parsed
            .turns
            .into_iter()
            .map(|t| {
                let action = ActionToken::parse(game, &t.action)
                    .ok_or_else(|| serde::de::Error::custom(format!("unknown action `{}`", t.action)))?;
                Ok(TurnRecord {
                    t: t.t,
                    role: t.role,
                    obs_key: ObservationKey { game, role: t.role, key: t.obs_key },
                    action: action.index,
                    legal: t.legal,
                    logprob: t.logprob.map(F::from_f64_lossy),
                    entropy: None,
                    legal_set: Vec::new(),
                    annotation: String::new(),
                })
            })
            .collect::<Result<_, serde_json::Error>>()?;
        Ok(Trajectory {
            game,
            seed: parsed.seed,
            params: parsed.params,
            turns,
            rho: parsed.rho,
            reason: parsed.reason,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TrajectoryLine {
    game: GameId,
    seed: u64,
    #[serde(default)]
    params: EnvParams,
    turns: Vec<TurnLine>,
    rho: i8,
    reason: OutcomeReason,
}

#[derive(Serialize, Deserialize)]
struct TurnLine {
    t: u32,
    role: Role,
    obs_key: String,
    action: String,
    legal: bool,
    #[serde(default)]
    logprob: Option<f64>,
}
