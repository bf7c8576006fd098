//! Agents: anything that can pick an action in a game state.
//!
//! Used both as training opponents and as evaluation players. All agents
//! draw randomness from the caller's stream, so matches replay exactly.

use std::sync::Mutex;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::EvalAction;
use crate::env::{ActionToken, GameId, GameState};
use crate::eval::minimax;
use crate::games::{kuhn, pig, Payload};
use crate::policy::{Mask, MaskMode, PolicyError, PolicySnapshot};
use crate::scalar::Scalar;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AgentError {
    #[error("no script `{script}` for game {game}")]
    UnknownScript { game: GameId, script: String },
    #[error("environment error: {0}")]
    Env(#[from] crate::env::EnvError),
    #[error("policy error: {0}")]
    Policy(#[from] PolicyError),
}

/// A chosen action plus sampling telemetry when the agent is a policy.
#[derive(Clone, Debug)]
pub struct AgentMove<F: Scalar> {
    pub action: ActionToken,
    /// Entropy of the emitting distribution, when one exists.
    pub entropy: Option<F>,
    /// Log-probability of the action, when sampled from a distribution.
    pub logprob: Option<F>,
}

impl<F: Scalar> AgentMove<F> {
    fn bare(action: ActionToken) -> Self {
        AgentMove { action, entropy: None, logprob: None }
    }
}

pub trait Agent<F: Scalar>: Send + Sync {
    fn name(&self) -> String;
    fn act(&self, state: &GameState, rng: &mut ChaCha8Rng) -> Result<AgentMove<F>, AgentError>;
}

/// Plays the tabular policy: sampled at a temperature or greedy argmax,
/// full-alphabet or legal-masked.
pub struct PolicyAgent<F: Scalar> {
    pub snapshot: PolicySnapshot<F>,
    pub temperature: F,
    pub mask: MaskMode,
    pub action: EvalAction,
    pub label: String,
}

impl<F: Scalar> PolicyAgent<F> {
    pub fn new(snapshot: PolicySnapshot<F>, temperature: F, mask: MaskMode, action: EvalAction) -> Self {
        PolicyAgent { snapshot, temperature, mask, action, label: "policy".to_string() }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl<F: Scalar> Agent<F> for PolicyAgent<F> {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn act(&self, state: &GameState, rng: &mut ChaCha8Rng) -> Result<AgentMove<F>, AgentError> {
        let role = state.active_role()?;
        let obs = state.observe(role)?;
        let legal = state.legal_indices()?;
        let mask = match self.mask {
            MaskMode::FullAlphabet => Mask::FullAlphabet,
            MaskMode::LegalOnly => Mask::LegalOnly(&legal),
        };
        match self.action {
            EvalAction::Greedy => {
                let action = self.snapshot.greedy(&obs, mask)?;
                Ok(AgentMove::bare(action))
            }
            EvalAction::Sample => {
                let draw = F::from_f64_lossy(rng.random::<f64>());
                let sample = self.snapshot.sample(&obs, self.temperature, mask, draw)?;
                Ok(AgentMove {
                    action: sample.action,
                    entropy: Some(sample.distribution_entropy),
                    logprob: Some(sample.logprob),
                })
            }
        }
    }
}

/// Uniform over the legal set; never plays an invalid move.
pub struct RandomAgent;

impl<F: Scalar> Agent<F> for RandomAgent {
    fn name(&self) -> String {
        "random".to_string()
    }

    fn act(&self, state: &GameState, rng: &mut ChaCha8Rng) -> Result<AgentMove<F>, AgentError> {
        let legal = state.legal_actions()?;
        let pick = rng.random_range(0..legal.len());
        Ok(AgentMove::bare(legal[pick]))
    }
}

/// Deterministic heuristics, one per (game, script name):
///
/// - TicTacToe `win-block-else-random`: take an immediate win, otherwise
///   block an immediate opponent win, otherwise play a random legal cell.
/// - TicTacToe `minimax`: play the first optimal move (exact solver).
/// - PigDice `hold-at-20`: hold once the pot reaches 20, otherwise roll.
/// - KuhnPoker `nash`: the canonical one-parameter Nash strategy family
///   instance with bet-with-J probability 1/6.
pub struct ScriptedAgent {
    pub script: String,
    solver: Mutex<minimax::Solver>,
}

impl ScriptedAgent {
    pub fn new(script: impl Into<String>) -> Self {
        ScriptedAgent { script: script.into(), solver: Mutex::new(minimax::Solver::new()) }
    }
}

impl<F: Scalar> Agent<F> for ScriptedAgent {
    fn name(&self) -> String {
        format!("scripted:{}", self.script)
    }

    fn act(&self, state: &GameState, rng: &mut ChaCha8Rng) -> Result<AgentMove<F>, AgentError> {
        let game = state.game();
        let unknown = || AgentError::UnknownScript { game, script: self.script.clone() };
        match (state.payload(), self.script.as_str()) {
            (Payload::TicTacToe(s), "win-block-else-random") => {
                let role = state.active_role()?;
                let index = win_block_else_random(&s.cells, role, rng);
                Ok(AgentMove::bare(ActionToken::new(game, index)))
            }
            (Payload::TicTacToe(s), "minimax") => {
                let mut solver = self.solver.lock().expect("solver lock");
                let (_, optimal) = solver.solve(&s.cells)?;
                Ok(AgentMove::bare(ActionToken::new(game, optimal[0])))
            }
            (Payload::Pig(s), "hold-at-20") => {
                let index = if s.turn_total >= 20 { pig::HOLD } else { pig::ROLL };
                Ok(AgentMove::bare(ActionToken::new(game, index)))
            }
            (Payload::Kuhn(s), "nash") => {
                let role = state.active_role()?;
                let index = kuhn_nash_action(s, role.index(), rng);
                Ok(AgentMove::bare(ActionToken::new(game, index)))
            }
            _ => Err(unknown()),
        }
    }
}

fn win_block_else_random(
    cells: &[crate::games::tictactoe::Cell; 9],
    role: crate::env::Role,
    rng: &mut ChaCha8Rng,
) -> u16 {
    use crate::games::tictactoe::{winner, Cell, Verdict};
    let own = if role == crate::env::Role::P0 { Cell::X } else { Cell::O };
    let opponent = if own == Cell::X { Cell::O } else { Cell::X };
    let empty: Vec<u16> = (0..9u16).filter(|&i| cells[i as usize] == Cell::Empty).collect();
    let wins_for = |mark: Cell, cell: u16| {
        let mut probe = *cells;
        probe[cell as usize] = mark;
        let verdict = winner(&probe).ok();
        (mark == Cell::X && verdict == Some(Verdict::Player0))
            || (mark == Cell::O && verdict == Some(Verdict::Player1))
    };
    for &cell in &empty {
        if wins_for(own, cell) {
            return cell;
        }
    }
    for &cell in &empty {
        if wins_for(opponent, cell) {
            return cell;
        }
    }
    empty[rng.random_range(0..empty.len())]
}

/// Canonical Kuhn Nash instance (bet-with-J probability 1/6); mixed
/// decisions sample from the caller's stream.
fn kuhn_nash_action(state: &kuhn::KuhnPokerState, seat: usize, rng: &mut ChaCha8Rng) -> u16 {
    let strategy = crate::eval::exploitability::nash_strategy::<f64>(1.0 / 6.0);
    let card = state.cards[seat] as usize;
    let aggressive_prob = match state.betting_history.as_slice() {
        [] => strategy.p0_bet[card],
        [kuhn::CHECK] => strategy.p1_bet[card],
        [kuhn::BET] => strategy.p1_call[card],
        [kuhn::CHECK, kuhn::BET] => strategy.p0_call[card],
        _ => 0.0,
    };
    let aggressive = rng.random::<f64>() < aggressive_prob;
    let facing_bet = state.betting_history.last() == Some(&kuhn::BET);
    match (facing_bet, aggressive) {
        (false, true) => kuhn::BET,
        (false, false) => kuhn::CHECK,
        (true, true) => kuhn::CALL,
        (true, false) => kuhn::FOLD,
    }
}
