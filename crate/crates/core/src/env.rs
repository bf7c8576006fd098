//! Turn-level two-player zero-sum game contract.
//!
//! A game is played on an immutable [`GameState`]: [`apply`](GameState::apply)
//! returns a fresh successor, so states can be shared freely across threads.
//! Players are identified by [`Role`]; the active role at turn `t` is always
//! `t mod 2`. Rewards are sparse and terminal: the match [`Outcome`] carries
//! `rho` from player 0's perspective and player 1 receives exactly `-rho`.
//!
//! Illegal actions do not raise errors. Playing any alphabet token that is
//! not currently legal ends the match immediately with
//! [`OutcomeReason::InvalidMoveForfeit`] against the offender, which is what
//! lets training observe invalid-move dynamics instead of hiding them.
//!
//! Chance events (card deals, dice) consume a per-match ChaCha stream stored
//! inside the state and seeded at [`reset`], so a `(game, seed, action
//! sequence)` triple replays byte-for-byte.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{self, Payload};
use crate::seeds;

/// Identifier of a registered game.
///
/// The six named games are the production set. `Toy` is a parameterized
/// fixed-horizon diagnostic game used by calibration experiments and tests;
/// it follows the same contract as every other game.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GameId {
    TicTacToe,
    KuhnPoker,
    SimpleNegotiation,
    PigDice,
    LiarsDice,
    ConnectFour,
    Toy(ToySpec),
}

/// Parameters of the fixed-horizon toy game: `alphabet` tokens per turn of
/// which the first `legal` are valid, ending after `horizon` turns.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ToySpec {
    pub horizon: u8,
    pub legal: u8,
    pub alphabet: u8,
}

impl GameId {
    /// The six registered production games.
    pub fn registered() -> [GameId; 6] {
        [
            GameId::TicTacToe,
            GameId::KuhnPoker,
            GameId::SimpleNegotiation,
            GameId::PigDice,
            GameId::LiarsDice,
            GameId::ConnectFour,
        ]
    }

    pub fn name(&self) -> String {
        match self {
            GameId::TicTacToe => "TicTacToe".to_string(),
            GameId::KuhnPoker => "KuhnPoker".to_string(),
            GameId::SimpleNegotiation => "SimpleNegotiation".to_string(),
            GameId::PigDice => "PigDice".to_string(),
            GameId::LiarsDice => "LiarsDice".to_string(),
            GameId::ConnectFour => "ConnectFour".to_string(),
            GameId::Toy(s) => format!("Toy(h={},k={},m={})", s.horizon, s.legal, s.alphabet),
        }
    }

    pub fn parse(s: &str) -> Option<GameId> {
        match s {
            "TicTacToe" => Some(GameId::TicTacToe),
            "KuhnPoker" => Some(GameId::KuhnPoker),
            "SimpleNegotiation" => Some(GameId::SimpleNegotiation),
            "PigDice" => Some(GameId::PigDice),
            "LiarsDice" => Some(GameId::LiarsDice),
            "ConnectFour" => Some(GameId::ConnectFour),
            _ => {
                let body = s.strip_prefix("Toy(h=")?.strip_suffix(')')?;
                let mut it = body.split(",k=");
                let h = it.next()?.parse().ok()?;
                let rest = it.next()?;
                let mut it2 = rest.split(",m=");
                let k = it2.next()?.parse().ok()?;
                let m = it2.next()?.parse().ok()?;
                if k == 0 || m == 0 || k > m {
                    return None;
                }
                Some(GameId::Toy(ToySpec { horizon: h, legal: k, alphabet: m }))
            }
        }
    }
}

impl std::fmt::Display for GameId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl Serialize for GameId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for GameId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        GameId::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown game `{s}`")))
    }
}

/// One of the two players of a match. The active role at turn `t` is `t mod 2`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Role(pub u8);

impl Role {
    pub const P0: Role = Role(0);
    pub const P1: Role = Role(1);

    pub fn of_turn(turn: u32) -> Role {
        Role((turn % 2) as u8)
    }

    pub fn opponent(self) -> Role {
        Role(1 - self.0)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of a game's fixed, enumerable action alphabet.
///
/// The alphabet always covers every action the game can ever accept; the
/// currently legal subset varies with the state. Tokens are identified by
/// their canonical alphabet index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ActionToken {
    pub game: GameId,
    pub index: u16,
}

impl ActionToken {
    pub fn new(game: GameId, index: u16) -> ActionToken {
        debug_assert!((index as usize) < alphabet_size(game));
        ActionToken { game, index }
    }

    /// Stable human-readable symbol of this token.
    pub fn symbol(&self) -> String {
        games::symbol(self.game, self.index)
    }

    /// Parse a symbol back into a token of `game`'s alphabet.
    pub fn parse(game: GameId, symbol: &str) -> Option<ActionToken> {
        games::parse_symbol(game, symbol).map(|index| ActionToken { game, index })
    }
}

impl std::fmt::Display for ActionToken {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Number of tokens in `game`'s action alphabet.
pub fn alphabet_size(game: GameId) -> usize {
    games::alphabet_size(game)
}

/// All symbols of `game`'s alphabet in canonical order.
pub fn alphabet(game: GameId) -> Vec<String> {
    (0..alphabet_size(game) as u16).map(|i| games::symbol(game, i)).collect()
}

/// Why a match ended.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum OutcomeReason {
    NaturalEnd,
    InvalidMoveForfeit,
    TurnLimit,
}

/// Terminal result from player 0's perspective; player 1 receives `-rho`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Outcome {
    pub rho: i8,
    pub reason: OutcomeReason,
}

impl Outcome {
    /// Terminal reward for `role`.
    pub fn reward(&self, role: Role) -> i8 {
        if role == Role::P0 {
            self.rho
        } else {
            -self.rho
        }
    }
}

/// Canonical encoding of the acting player's information set.
///
/// Identical `(state, role)` pairs produce identical keys. Perfect-
/// information games encode the full state; imperfect-information games
/// encode only what `role` can see (own cards or dice plus public history),
/// never hidden opponent information. The per-game grammar is documented in
/// each game module and versioned in checkpoint headers.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct ObservationKey {
    pub game: GameId,
    pub role: Role,
    pub key: String,
}

/// Version of the observation-key grammar; bump when any game's key format changes.
pub const KEY_GRAMMAR_VERSION: u32 = 1;

/// Tunable game parameters fixed per run and recorded in trajectory logs.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvParams {
    /// Rounds per Kuhn Poker match; the match winner is decided by total chips.
    pub kuhn_rounds: u8,
    /// Include the round index in Kuhn observation keys.
    pub kuhn_obs_includes_round: bool,
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams { kuhn_rounds: 5, kuhn_obs_includes_round: false }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("operation requires a non-terminal state")]
    TerminalState,
    #[error("operation requires a terminal state")]
    NotTerminal,
    #[error("role {0} is not the active role")]
    InactiveRole(Role),
    #[error("action belongs to {action} but the state is a {state} state")]
    AlphabetMismatch { action: GameId, state: GameId },
    #[error("position is not legally reachable: {0}")]
    IllegalPosition(String),
}

/// Full Markov state of one match.
///
/// Immutable: every operation takes `&self` and `apply` returns a new state.
#[derive(Clone, Debug)]
pub struct GameState {
    game: GameId,
    turn: u32,
    turn_limit: u32,
    rng: ChaCha8Rng,
    payload: Payload,
    terminal: Option<Outcome>,
}

impl GameState {
    pub fn game(&self) -> GameId {
        self.game
    }

    /// Number of actions applied so far.
    pub fn turn(&self) -> u32 {
        self.turn
    }

    pub fn turn_limit(&self) -> u32 {
        self.turn_limit
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.is_some()
    }

    pub(crate) fn payload(&self) -> &Payload {
        &self.payload
    }

    /// Construct a state with a forced payload; used by exact-enumeration
    /// oracles to branch over chance outcomes explicitly.
    pub(crate) fn with_payload(game: GameId, payload: Payload, turn: u32) -> GameState {
        GameState {
            game,
            turn,
            turn_limit: games::turn_limit(game, &payload),
            rng: seeds::rng(0),
            payload,
            terminal: None,
        }
    }

    /// Active role of a non-terminal state: always `turn mod 2`.
    pub fn active_role(&self) -> Result<Role, EnvError> {
        if self.is_terminal() {
            return Err(EnvError::TerminalState);
        }
        Ok(Role::of_turn(self.turn))
    }

    /// Legal actions in canonical alphabet order; non-empty for any
    /// non-terminal state.
    pub fn legal_actions(&self) -> Result<Vec<ActionToken>, EnvError> {
        Ok(self
            .legal_indices()?
            .into_iter()
            .map(|index| ActionToken { game: self.game, index })
            .collect())
    }

    /// Legal alphabet indices in canonical order.
    pub fn legal_indices(&self) -> Result<Vec<u16>, EnvError> {
        let active = self.active_role()?;
        let legal = games::legal(&self.payload, active);
        debug_assert!(!legal.is_empty(), "non-terminal state must have a legal action");
        debug_assert!(legal.windows(2).all(|w| w[0] < w[1]), "legal set must be sorted");
        Ok(legal)
    }

    /// Apply an alphabet token.
    ///
    /// Legal actions advance the game (including any seeded chance events);
    /// illegal tokens terminate the match with a forfeit against the acting
    /// player; reaching the turn limit terminates with the game's limit rule.
    pub fn apply(&self, action: ActionToken) -> Result<GameState, EnvError> {
        if action.game != self.game {
            return Err(EnvError::AlphabetMismatch { action: action.game, state: self.game });
        }
        let active = self.active_role()?;
        let legal = self.legal_indices()?;
        let mut next = self.clone();
        next.turn += 1;
        if !legal.contains(&action.index) {
            let rho = if active == Role::P0 { -1 } else { 1 };
            next.terminal = Some(Outcome { rho, reason: OutcomeReason::InvalidMoveForfeit });
            return Ok(next);
        }
        let result = games::apply(&mut next.payload, active, action.index, &mut next.rng, next.turn);
        if let Some(rho) = result {
            next.terminal = Some(Outcome { rho, reason: OutcomeReason::NaturalEnd });
        } else if next.turn >= next.turn_limit {
            let rho = games::turn_limit_outcome(&next.payload);
            next.terminal = Some(Outcome { rho, reason: OutcomeReason::TurnLimit });
        }
        Ok(next)
    }

    /// Information-set key for the active role.
    pub fn observe(&self, role: Role) -> Result<ObservationKey, EnvError> {
        let active = self.active_role()?;
        if role != active {
            return Err(EnvError::InactiveRole(role));
        }
        Ok(ObservationKey { game: self.game, role, key: games::observe(&self.payload, role, self.turn) })
    }

    /// Terminal outcome of a finished match.
    pub fn outcome(&self) -> Result<Outcome, EnvError> {
        self.terminal.ok_or(EnvError::NotTerminal)
    }
}

/// Start a new match of `game` with default parameters.
pub fn reset(game: GameId, seed: u64) -> GameState {
    reset_with(game, seed, &EnvParams::default())
}

/// Start a new match with explicit game parameters.
///
/// All chance in the match (the initial deal and any later rolls) derives
/// from `seed`, so identical `(game, seed)` pairs produce identical states.
pub fn reset_with(game: GameId, seed: u64, params: &EnvParams) -> GameState {
    let mut rng = seeds::rng(seed);
    let payload = games::reset(game, &mut rng, params);
    let turn_limit = games::turn_limit(game, &payload);
    GameState { game, turn: 0, turn_limit, rng, payload, terminal: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn game_id_round_trips_through_name() {
        for game in GameId::registered() {
            assert_eq!(GameId::parse(&game.name()), Some(game));
        }
        let toy = GameId::Toy(ToySpec { horizon: 4, legal: 2, alphabet: 5 });
        assert_eq!(GameId::parse(&toy.name()), Some(toy));
        assert_eq!(GameId::parse("Chess"), None);
        assert_eq!(GameId::parse("Toy(h=1,k=3,m=2)"), None);
    }

    #[test]
    fn active_role_is_turn_parity() {
        let mut state = reset(GameId::TicTacToe, 0);
        for turn in 0..5u32 {
            assert_eq!(state.turn(), turn);
            let role = state.active_role().unwrap();
            assert_eq!(role, Role::of_turn(turn));
            let action = state.legal_actions().unwrap()[0];
            state = state.apply(action).unwrap();
        }
    }

    #[test]
    fn reset_is_deterministic() {
        let a = reset(GameId::KuhnPoker, 7);
        let b = reset(GameId::KuhnPoker, 7);
        assert_eq!(a.observe(Role::P0).unwrap(), b.observe(Role::P0).unwrap());
    }

    #[test]
    fn illegal_action_forfeits_for_offender() {
        let state = reset(GameId::TicTacToe, 3);
        let cell = state.legal_actions().unwrap()[4];
        let state = state.apply(cell).unwrap();
        // Same cell again: illegal for player 1.
        let state = state.apply(cell).unwrap();
        assert!(state.is_terminal());
        let outcome = state.outcome().unwrap();
        assert_eq!(outcome.reason, OutcomeReason::InvalidMoveForfeit);
        assert_eq!(outcome.rho, 1);
        assert_eq!(outcome.reward(Role::P1), -1);
    }

    #[test]
    fn alphabet_mismatch_is_an_error() {
        let state = reset(GameId::TicTacToe, 0);
        let foreign = ActionToken::new(GameId::ConnectFour, 0);
        assert!(matches!(state.apply(foreign), Err(EnvError::AlphabetMismatch { .. })));
    }

    #[test]
    fn terminal_state_rejects_queries() {
        let mut state = reset(GameId::TicTacToe, 0);
        // 0,3,1,4,2 gives player 0 the top row.
        for cell in [0u16, 3, 1, 4, 2] {
            state = state.apply(ActionToken::new(GameId::TicTacToe, cell)).unwrap();
        }
        assert!(state.is_terminal());
        assert_eq!(state.outcome().unwrap().rho, 1);
        assert_eq!(state.legal_actions(), Err(EnvError::TerminalState));
        assert_eq!(state.active_role(), Err(EnvError::TerminalState));
        assert!(state.apply(ActionToken::new(GameId::TicTacToe, 5)).is_err());
    }

    #[test]
    fn outcome_requires_terminal() {
        let state = reset(GameId::PigDice, 0);
        assert_eq!(state.outcome(), Err(EnvError::NotTerminal));
    }

    #[test]
    fn observe_rejects_inactive_role() {
        let state = reset(GameId::KuhnPoker, 0);
        assert!(matches!(state.observe(Role::P1), Err(EnvError::InactiveRole(_))));
    }

    #[test]
    fn rewards_are_zero_sum() {
        let outcome = Outcome { rho: -1, reason: OutcomeReason::NaturalEnd };
        assert_eq!(outcome.reward(Role::P0) + outcome.reward(Role::P1), 0);
    }
}
