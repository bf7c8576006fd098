//! Exact expected returns by full enumeration of the game tree.
//!
//! Supported for games whose trees are small enough to walk exactly:
//! TicTacToe, single-round Kuhn Poker (branching over all six deals), and
//! the toy game. The recursion weights every action branch by the policy
//! pair's probabilities; in full-alphabet mode illegal branches terminate
//! as forfeits exactly like the environment plays them.

use thiserror::Error;

use crate::env::{self, ActionToken, EnvError, EnvParams, GameId, GameState};
use crate::games::{kuhn, Payload};
use crate::policy::{Mask, MaskMode, PolicyError, PolicyParams};
use crate::scalar::Scalar;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EvalError {
    #[error("game tree too large for exact enumeration: {0}")]
    GameTooLarge(GameId),
    #[error("environment error: {0}")]
    Env(#[from] EnvError),
    #[error("policy error: {0}")]
    Policy(#[from] PolicyError),
}

/// A policy as an exact distribution supplier for enumeration.
#[derive(Clone, Copy, Debug)]
pub enum EvalDist<'a, F: Scalar> {
    /// Tabular policy at a temperature with a mask mode.
    Tabular { params: &'a PolicyParams<F>, temperature: F, mask: MaskMode },
    /// Uniform over the legal set.
    UniformLegal,
    /// Uniform over the full alphabet (illegal mass forfeits).
    UniformFull,
    /// Deterministic: the tabular argmax over the legal set.
    Greedy { params: &'a PolicyParams<F> },
}

impl<'a, F: Scalar> EvalDist<'a, F> {
    fn distribution(&self, state: &GameState) -> Result<Vec<F>, EvalError> {
        let size = env::alphabet_size(state.game());
        let legal = state.legal_indices()?;
        match self {
            EvalDist::Tabular { params, temperature, mask } => {
                let obs = state.observe(state.active_role()?)?;
                let mask = match mask {
                    MaskMode::FullAlphabet => Mask::FullAlphabet,
                    MaskMode::LegalOnly => Mask::LegalOnly(&legal),
                };
                Ok(params.action_distribution(&obs, *temperature, mask)?)
            }
            EvalDist::UniformLegal => {
                let mut probs = vec![F::zero(); size];
                let p = F::one() / F::from_f64_lossy(legal.len() as f64);
                for &i in &legal {
                    probs[i as usize] = p;
                }
                Ok(probs)
            }
            EvalDist::UniformFull => {
                Ok(vec![F::one() / F::from_f64_lossy(size as f64); size])
            }
            EvalDist::Greedy { params } => {
                let obs = state.observe(state.active_role()?)?;
                let action = params.greedy(&obs, Mask::LegalOnly(&legal))?;
                let mut probs = vec![F::zero(); size];
                probs[action.index as usize] = F::one();
                Ok(probs)
            }
        }
    }
}

/// Exact `(E[R_0], E[R_1])` of a policy pair; the pair sums to zero by the
/// zero-sum reward structure.
pub fn enumerate_expected_return<F: Scalar>(
    game: GameId,
    policy0: EvalDist<'_, F>,
    policy1: EvalDist<'_, F>,
    params: &EnvParams,
) -> Result<(F, F), EvalError> {
    let expectation = match game {
        GameId::TicTacToe => expected_from(&env::reset(game, 0), &policy0, &policy1)?,
        GameId::KuhnPoker => {
            if params.kuhn_rounds != 1 {
                return Err(EvalError::GameTooLarge(game));
            }
            let sixth = F::from_f64_lossy(1.0 / 6.0);
            let mut total = F::zero();
            for &(c0, c1) in &kuhn::DEALS {
                let state = GameState::with_payload(
                    game,
                    Payload::Kuhn(kuhn::with_deal([c0, c1])),
                    0,
                );
                total += sixth * expected_from(&state, &policy0, &policy1)?;
            }
            total
        }
        GameId::Toy(_) => expected_from(&env::reset(game, 0), &policy0, &policy1)?,
        other => return Err(EvalError::GameTooLarge(other)),
    };
    Ok((expectation, -expectation))
}

fn expected_from<F: Scalar>(
    state: &GameState,
    policy0: &EvalDist<'_, F>,
    policy1: &EvalDist<'_, F>,
) -> Result<F, EvalError> {
    if state.is_terminal() {
        return Ok(F::from_f64_lossy(state.outcome().expect("terminal").rho as f64));
    }
    let role = state.active_role()?;
    let dist = if role.index() == 0 { policy0 } else { policy1 };
    let probs = dist.distribution(state)?;
    let mut value = F::zero();
    for (index, &p) in probs.iter().enumerate() {
        if p > F::zero() {
            let child = state.apply(ActionToken::new(state.game(), index as u16))?;
            value += p * expected_from(&child, policy0, policy1)?;
        }
    }
    Ok(value)
}
