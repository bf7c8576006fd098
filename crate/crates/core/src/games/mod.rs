//! Rules of the built-in games.
//!
//! Each game module supplies the pieces of the environment contract: its
//! action alphabet, initial payload, legal-action set, transition, terminal
//! rules, and observation-key grammar. `env` dispatches through the
//! functions here. Rule summaries and key grammars for all games are also
//! collected in `docs/games.md`.

use rand_chacha::ChaCha8Rng;

use crate::env::{EnvParams, GameId, Role};

pub mod connect_four;
pub mod kuhn;
pub mod liars_dice;
pub mod negotiation;
pub mod pig;
pub mod tictactoe;
pub mod toy;

/// Game-specific state.
#[derive(Clone, Debug)]
pub enum Payload {
    TicTacToe(tictactoe::TicTacToeState),
    Kuhn(kuhn::KuhnPokerState),
    Negotiation(negotiation::NegotiationState),
    Pig(pig::PigDiceState),
    LiarsDice(liars_dice::LiarsDiceState),
    ConnectFour(connect_four::ConnectFourState),
    Toy(toy::ToyState),
}

pub(crate) fn alphabet_size(game: GameId) -> usize {
    match game {
        GameId::TicTacToe => tictactoe::ALPHABET_SIZE,
        GameId::KuhnPoker => kuhn::ALPHABET_SIZE,
        GameId::SimpleNegotiation => negotiation::ALPHABET_SIZE,
        GameId::PigDice => pig::ALPHABET_SIZE,
        GameId::LiarsDice => liars_dice::ALPHABET_SIZE,
        GameId::ConnectFour => connect_four::ALPHABET_SIZE,
        GameId::Toy(spec) => spec.alphabet as usize,
    }
}

pub(crate) fn symbol(game: GameId, index: u16) -> String {
    match game {
        GameId::TicTacToe => tictactoe::symbol(index),
        GameId::KuhnPoker => kuhn::symbol(index),
        GameId::SimpleNegotiation => negotiation::symbol(index),
        GameId::PigDice => pig::symbol(index),
        GameId::LiarsDice => liars_dice::symbol(index),
        GameId::ConnectFour => connect_four::symbol(index),
        GameId::Toy(_) => toy::symbol(index),
    }
}

pub(crate) fn parse_symbol(game: GameId, symbol: &str) -> Option<u16> {
    let size = alphabet_size(game) as u16;
    let index = match game {
        GameId::TicTacToe => tictactoe::parse_symbol(symbol)?,
        GameId::KuhnPoker => kuhn::parse_symbol(symbol)?,
        GameId::SimpleNegotiation => negotiation::parse_symbol(symbol)?,
        GameId::PigDice => pig::parse_symbol(symbol)?,
        GameId::LiarsDice => liars_dice::parse_symbol(symbol)?,
        GameId::ConnectFour => connect_four::parse_symbol(symbol)?,
        GameId::Toy(_) => toy::parse_symbol(symbol)?,
    };
    (index < size).then_some(index)
}

pub(crate) fn reset(game: GameId, rng: &mut ChaCha8Rng, params: &EnvParams) -> Payload {
    match game {
        GameId::TicTacToe => Payload::TicTacToe(tictactoe::reset()),
        GameId::KuhnPoker => Payload::Kuhn(kuhn::reset(rng, params)),
        GameId::SimpleNegotiation => Payload::Negotiation(negotiation::reset()),
        GameId::PigDice => Payload::Pig(pig::reset()),
        GameId::LiarsDice => Payload::LiarsDice(liars_dice::reset(rng)),
        GameId::ConnectFour => Payload::ConnectFour(connect_four::reset()),
        GameId::Toy(spec) => Payload::Toy(toy::reset(spec)),
    }
}

/// Hard cap on the number of actions in a match; guarantees termination.
pub(crate) fn turn_limit(game: GameId, payload: &Payload) -> u32 {
    match (game, payload) {
        (GameId::TicTacToe, _) => 9,
        (GameId::KuhnPoker, Payload::Kuhn(s)) => 4 * s.rounds_total as u32,
        (GameId::SimpleNegotiation, _) => 8,
        (GameId::PigDice, _) => 200,
        (GameId::LiarsDice, _) => 60,
        (GameId::ConnectFour, _) => 42,
        (GameId::Toy(spec), _) => spec.horizon as u32,
        _ => unreachable!("payload does not match game id"),
    }
}

/// Sorted legal alphabet indices for the active role.
pub(crate) fn legal(payload: &Payload, active: Role) -> Vec<u16> {
    match payload {
        Payload::TicTacToe(s) => tictactoe::legal(s),
        Payload::Kuhn(s) => kuhn::legal(s),
        Payload::Negotiation(s) => negotiation::legal(s, active),
        Payload::Pig(s) => pig::legal(s),
        Payload::LiarsDice(s) => liars_dice::legal(s),
        Payload::ConnectFour(s) => connect_four::legal(s),
        Payload::Toy(s) => toy::legal(s),
    }
}

/// Apply a legal action. Returns `Some(rho)` when the game ends naturally.
///
/// `turn_after` is the turn counter after this action; games that rotate
/// internal seating (Kuhn rounds) derive the next first actor from it.
pub(crate) fn apply(
    payload: &mut Payload,
    active: Role,
    index: u16,
    rng: &mut ChaCha8Rng,
    turn_after: u32,
) -> Option<i8> {
    match payload {
        Payload::TicTacToe(s) => tictactoe::apply(s, active, index),
        Payload::Kuhn(s) => kuhn::apply(s, active, index, rng, turn_after),
        Payload::Negotiation(s) => negotiation::apply(s, active, index),
        Payload::Pig(s) => pig::apply(s, active, index, rng),
        Payload::LiarsDice(s) => liars_dice::apply(s, active, index),
        Payload::ConnectFour(s) => connect_four::apply(s, active, index),
        Payload::Toy(s) => toy::apply(s, turn_after),
    }
}

/// Outcome when the hard turn limit cuts a match off.
///
/// Games with a natural settling rule (Kuhn chip totals, negotiation
/// portfolio gains) settle; the rest score a draw.
pub(crate) fn turn_limit_outcome(payload: &Payload) -> i8 {
    match payload {
        Payload::Kuhn(s) => kuhn::settle_match(s),
        Payload::Negotiation(s) => negotiation::settle_sign(s),
        _ => 0,
    }
}

/// Observation-key body for `role`; the full key also carries game and role.
pub(crate) fn observe(payload: &Payload, role: Role, turn: u32) -> String {
    match payload {
        Payload::TicTacToe(s) => tictactoe::observe(s),
        Payload::Kuhn(s) => kuhn::observe(s, role),
        Payload::Negotiation(s) => negotiation::observe(s, role, turn),
        Payload::Pig(s) => pig::observe(s, role),
        Payload::LiarsDice(s) => liars_dice::observe(s, role),
        Payload::ConnectFour(s) => connect_four::observe(s),
        Payload::Toy(_) => toy::observe(turn),
    }
}
