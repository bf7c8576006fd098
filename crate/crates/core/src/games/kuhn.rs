//! Kuhn Poker: three cards (J, Q, K), one dealt to each player per round,
//! one betting round with a single-chip bet on top of one-chip antes.
//!
//! A match is best-of-`rounds_total` by total chips: the terminal outcome is
//! `sign(chip_delta)` from player 0's perspective. Within a round the first
//! actor is whichever player's turn parity comes up when the round starts;
//! the first actor of round 0 is player 0.
//!
//! Alphabet: `check`, `bet`, `call`, `fold`. With no outstanding bet the
//! legal pair is `{check, bet}`; facing a bet it is `{call, fold}`.
//!
//! Observation key: `c=<J|Q|K>|h=<comma-separated round history>`, own card
//! only, never the opponent's. With `kuhn_obs_includes_round` the round
//! index is inserted: `c=K|r=2|h=check,bet`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::env::{EnvParams, Role};

pub const ALPHABET_SIZE: usize = 4;

pub const CHECK: u16 = 0;
pub const BET: u16 = 1;
pub const CALL: u16 = 2;
pub const FOLD: u16 = 3;

const CARD_NAMES: [char; 3] = ['J', 'Q', 'K'];
const ACTION_NAMES: [&str; 4] = ["check", "bet", "call", "fold"];

/// The six equally likely deals as (first card, second card) by match player:
/// `DEALS[i] = (card of player 0, card of player 1)`, cards 0=J, 1=Q, 2=K.
pub const DEALS: [(u8, u8); 6] = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];

#[derive(Clone, Debug)]
pub struct KuhnPokerState {
    pub rounds_total: u8,
    pub round_index: u8,
    /// Cards indexed by match player (0=J, 1=Q, 2=K).
    pub cards: [u8; 2],
    /// Betting history of the current round, alphabet indices.
    pub betting_history: Vec<u16>,
    /// Match player acting first in the current round.
    pub round_first_actor: Role,
    /// Total chips won by player 0 minus chips lost, across settled rounds.
    pub chip_delta: i32,
    pub obs_includes_round: bool,
}

pub fn symbol(index: u16) -> String {
    ACTION_NAMES[index as usize].to_string()
}

pub fn parse_symbol(symbol: &str) -> Option<u16> {
    ACTION_NAMES.iter().position(|&s| s == symbol).map(|i| i as u16)
}

pub fn card_name(card: u8) -> char {
    CARD_NAMES[card as usize]
}

fn deal(rng: &mut ChaCha8Rng) -> [u8; 2] {
    let (a, b) = DEALS[rng.random_range(0..6)];
    [a, b]
}

pub fn reset(rng: &mut ChaCha8Rng, params: &EnvParams) -> KuhnPokerState {
    KuhnPokerState {
        rounds_total: params.kuhn_rounds.max(1),
        round_index: 0,
        cards: deal(rng),
        betting_history: Vec::new(),
        round_first_actor: Role::P0,
        chip_delta: 0,
        obs_includes_round: params.kuhn_obs_includes_round,
    }
}

/// Construct a single-round state with a forced deal; lets enumeration
/// oracles branch over chance explicitly.
pub(crate) fn with_deal(cards: [u8; 2]) -> KuhnPokerState {
    KuhnPokerState {
        rounds_total: 1,
        round_index: 0,
        cards,
        betting_history: Vec::new(),
        round_first_actor: Role::P0,
        chip_delta: 0,
        obs_includes_round: false,
    }
}

pub fn legal(state: &KuhnPokerState) -> Vec<u16> {
    if state.betting_history.last() == Some(&BET) {
        vec![CALL, FOLD]
    } else {
        vec![CHECK, BET]
    }
}

/// Whether a within-round history is terminal for the round.
pub fn history_is_terminal(history: &[u16]) -> bool {
    matches!(
        history,
        [CHECK, CHECK] | [BET, CALL] | [BET, FOLD] | [CHECK, BET, CALL] | [CHECK, BET, FOLD]
    )
}

/// Chip delta of a settled round for the round's **first actor**.
///
/// Both players ante 1; a bet adds 1 more. A fold loses the ante (and any
/// own bet stays lost with it); a showdown awards the pot to the higher
/// card, netting the winner the loser's ante plus any called bet.
pub fn settle_round(first_card: u8, second_card: u8, history: &[u16]) -> Result<i8, NonTerminalHistory> {
    let showdown = |stake: i8| if first_card > second_card { stake } else { -stake };
    match history {
        [CHECK, CHECK] => Ok(showdown(1)),
        [BET, CALL] => Ok(showdown(2)),
        [BET, FOLD] => Ok(1),
        [CHECK, BET, CALL] => Ok(showdown(2)),
        [CHECK, BET, FOLD] => Ok(-1),
        _ => Err(NonTerminalHistory),
    }
}

/// Error for settling a round whose betting has not finished.
#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
#[error("betting history is not terminal for a round")]
pub struct NonTerminalHistory;

/// Match outcome so far from chip totals: `sign(chip_delta)`.
pub fn settle_match(state: &KuhnPokerState) -> i8 {
    state.chip_delta.signum() as i8
}

pub fn apply(
    state: &mut KuhnPokerState,
    active: Role,
    index: u16,
    rng: &mut ChaCha8Rng,
    turn_after: u32,
) -> Option<i8> {
    debug_assert_eq!(
        active,
        in_round_actor(state),
        "turn parity must match the in-round acting order"
    );
    state.betting_history.push(index);
    if !history_is_terminal(&state.betting_history) {
        return None;
    }
    let first = state.round_first_actor;
    let delta = settle_round(
        state.cards[first.index()],
        state.cards[first.opponent().index()],
        &state.betting_history,
    )
    .expect("history checked terminal") as i32;
    state.chip_delta += if first == Role::P0 { delta } else { -delta };
    state.round_index += 1;
    if state.round_index >= state.rounds_total {
        return Some(settle_match(state));
    }
    state.cards = deal(rng);
    state.betting_history.clear();
    state.round_first_actor = Role::of_turn(turn_after);
    None
}

/// Match player due to act given the round's first actor and history length.
pub fn in_round_actor(state: &KuhnPokerState) -> Role {
    if state.betting_history.len() % 2 == 0 {
        state.round_first_actor
    } else {
        state.round_first_actor.opponent()
    }
}

pub fn observe(state: &KuhnPokerState, role: Role) -> String {
    let history: Vec<&str> =
        state.betting_history.iter().map(|&i| ACTION_NAMES[i as usize]).collect();
    if state.obs_includes_round {
        format!("c={}|r={}|h={}", card_name(state.cards[role.index()]), state.round_index, history.join(","))
    } else {
        format!("c={}|h={}", card_name(state.cards[role.index()]), history.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deal_produces_distinct_cards() {
        for seed in 0..64 {
            let mut rng = crate::seeds::rng(seed);
            let cards = deal(&mut rng);
            assert_ne!(cards[0], cards[1]);
        }
    }

    #[test]
    fn showdown_of_antes_pays_one() {
        // K vs Q, check-check: first actor wins the opponent's ante.
        assert_eq!(settle_round(2, 1, &[CHECK, CHECK]).unwrap(), 1);
        assert_eq!(settle_round(1, 2, &[CHECK, CHECK]).unwrap(), -1);
    }

    #[test]
    fn fold_loses_exactly_the_ante() {
        // First actor bets, second folds: +1 to first.
        assert_eq!(settle_round(0, 2, &[BET, FOLD]).unwrap(), 1);
        // First actor checks then folds to a bet: -1.
        assert_eq!(settle_round(0, 1, &[CHECK, BET, FOLD]).unwrap(), -1);
    }

    #[test]
    fn called_bets_double_the_stake() {
        assert_eq!(settle_round(2, 0, &[BET, CALL]).unwrap(), 2);
        assert_eq!(settle_round(0, 2, &[CHECK, BET, CALL]).unwrap(), -2);
    }

    #[test]
    fn settle_rejects_unfinished_history() {
        assert_eq!(settle_round(0, 1, &[CHECK]), Err(NonTerminalHistory));
        assert_eq!(settle_round(0, 1, &[BET]), Err(NonTerminalHistory));
    }

    #[test]
    fn all_round_deltas_are_in_range() {
        for (a, b) in DEALS {
            for history in [
                vec![CHECK, CHECK],
                vec![BET, CALL],
                vec![BET, FOLD],
                vec![CHECK, BET, CALL],
                vec![CHECK, BET, FOLD],
            ] {
                let d = settle_round(a, b, &history).unwrap();
                assert!(matches!(d, -2 | -1 | 1 | 2));
            }
        }
    }

    #[test]
    fn facing_a_bet_offers_call_or_fold() {
        let mut rng = crate::seeds::rng(0);
        let mut state = reset(&mut rng, &EnvParams::default());
        assert_eq!(legal(&state), vec![CHECK, BET]);
        state.betting_history.push(BET);
        assert_eq!(legal(&state), vec![CALL, FOLD]);
    }

    #[test]
    fn observation_hides_the_opponent_card() {
        let state = with_deal([2, 0]);
        assert_eq!(observe(&state, Role::P0), "c=K|h=");
        assert_eq!(observe(&state, Role::P1), "c=J|h=");
    }

    #[test]
    fn round_rotation_follows_turn_parity() {
        // check-check ends round 0 after 2 actions; round 1 starts at turn 2,
        // so player 0 acts first again. A 3-action round flips the parity.
        let mut rng = crate::seeds::rng(1);
        let mut state = reset(&mut rng, &EnvParams::default());
        apply(&mut state, Role::P0, CHECK, &mut rng, 1);
        apply(&mut state, Role::P1, CHECK, &mut rng, 2);
        assert_eq!(state.round_index, 1);
        assert_eq!(state.round_first_actor, Role::P0);

        apply(&mut state, Role::P0, CHECK, &mut rng, 3);
        apply(&mut state, Role::P1, BET, &mut rng, 4);
        apply(&mut state, Role::P0, CALL, &mut rng, 5);
        assert_eq!(state.round_index, 2);
        assert_eq!(state.round_first_actor, Role::P1);
    }

    #[test]
    fn chip_total_decides_the_match() {
        let mut state = with_deal([2, 0]);
        state.rounds_total = 1;
        let mut rng = crate::seeds::rng(0);
        apply(&mut state, Role::P0, CHECK, &mut rng, 1);
        let rho = apply(&mut state, Role::P1, CHECK, &mut rng, 2);
        assert_eq!(rho, Some(1));
        assert_eq!(state.chip_delta, 1);
    }
}
