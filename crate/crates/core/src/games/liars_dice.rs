//! Liar's Dice, single-challenge variant: each player hides five d6 rolls,
//! claims about the combined dice escalate strictly, and one challenge ends
//! the game.
//!
//! A claim `(quantity, face)` asserts that at least `quantity` dice across
//! both hands show `face`. Each new claim must exceed the previous one in
//! the quantity-major, face-minor total order. A challenge counts the dice:
//! if the claim is unsupported the challenger wins, otherwise the claimant
//! wins.
//!
//! Alphabet: 60 claims `claim:<q>x<f>` (quantity 1..=10 major, face 1..=6
//! minor) followed by `challenge`; challenging is legal only once a claim
//! exists.
//!
//! Observation key: own sorted dice plus the current claim, e.g.
//! `d=12456|c=3x4`; the opponent's dice are never encoded.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::env::Role;

pub const DICE_PER_PLAYER: usize = 5;
pub const MAX_QUANTITY: u16 = 10;
pub const ALPHABET_SIZE: usize = (MAX_QUANTITY as usize) * 6 + 1;
pub const CHALLENGE: u16 = MAX_QUANTITY * 6;

#[derive(Clone, Debug)]
pub struct LiarsDiceState {
    /// Sorted faces per player, hidden from the opponent.
    pub dice: [[u8; DICE_PER_PLAYER]; 2],
    pub current_claim: Option<(u8, u8)>,
}

/// Claim encoded as `(quantity - 1) * 6 + (face - 1)`; the index order is
/// exactly the escalation order.
pub fn claim_index(quantity: u8, face: u8) -> u16 {
    (quantity as u16 - 1) * 6 + (face as u16 - 1)
}

pub fn claim_from_index(index: u16) -> Option<(u8, u8)> {
    (index < CHALLENGE).then(|| ((index / 6 + 1) as u8, (index % 6 + 1) as u8))
}

pub fn symbol(index: u16) -> String {
    match claim_from_index(index) {
        Some((q, f)) => format!("claim:{q}x{f}"),
        None => "challenge".to_string(),
    }
}

pub fn parse_symbol(symbol: &str) -> Option<u16> {
    if symbol == "challenge" {
        return Some(CHALLENGE);
    }
    let body = symbol.strip_prefix("claim:")?;
    let (q, f) = body.split_once('x')?;
    let q: u8 = q.parse().ok()?;
    let f: u8 = f.parse().ok()?;
    if q == 0 || q as u16 > MAX_QUANTITY || !(1..=6).contains(&f) {
        return None;
    }
    Some(claim_index(q, f))
}

pub fn reset(rng: &mut ChaCha8Rng) -> LiarsDiceState {
    let mut dice = [[0u8; DICE_PER_PLAYER]; 2];
    for hand in dice.iter_mut() {
        for die in hand.iter_mut() {
            *die = rng.random_range(1..=6u8);
        }
        hand.sort_unstable();
    }
    LiarsDiceState { dice, current_claim: None }
}

pub fn legal(state: &LiarsDiceState) -> Vec<u16> {
    let mut actions: Vec<u16> = match state.current_claim {
        Some((q, f)) => (claim_index(q, f) + 1..CHALLENGE).collect(),
        None => (0..CHALLENGE).collect(),
    };
    if state.current_claim.is_some() {
        actions.push(CHALLENGE);
    }
    actions
}

pub fn apply(state: &mut LiarsDiceState, active: Role, index: u16) -> Option<i8> {
    match claim_from_index(index) {
        Some(claim) => {
            state.current_claim = Some(claim);
            None
        }
        None => {
            let (quantity, face) = state.current_claim.expect("challenge requires a claim");
            let count = state
                .dice
                .iter()
                .flat_map(|hand| hand.iter())
                .filter(|&&d| d == face)
                .count();
            let supported = count >= quantity as usize;
            // Challenger is the active player; claimant is the previous actor.
            let winner = if supported { active.opponent() } else { active };
            Some(if winner == Role::P0 { 1 } else { -1 })
        }
    }
}

pub fn observe(state: &LiarsDiceState, role: Role) -> String {
    let hand: String = state.dice[role.index()].iter().map(|d| d.to_string()).collect();
    let claim = match state.current_claim {
        Some((q, f)) => format!("{q}x{f}"),
        None => "none".to_string(),
    };
    format!("d={hand}|c={claim}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_with(dice: [[u8; 5]; 2], claim: Option<(u8, u8)>) -> LiarsDiceState {
        LiarsDiceState { dice, current_claim: claim }
    }

    #[test]
    fn claims_must_strictly_escalate() {
        let state = state_with([[1; 5], [2; 5]], Some((2, 4)));
        let legal = legal(&state);
        assert!(!legal.contains(&claim_index(2, 4)));
        assert!(!legal.contains(&claim_index(2, 3)));
        assert!(!legal.contains(&claim_index(1, 6)));
        assert!(legal.contains(&claim_index(2, 5)));
        assert!(legal.contains(&claim_index(3, 1)));
        assert!(legal.contains(&CHALLENGE));
    }

    #[test]
    fn challenge_requires_a_claim() {
        let mut rng = crate::seeds::rng(0);
        let state = reset(&mut rng);
        assert!(!legal(&state).contains(&CHALLENGE));
        assert_eq!(legal(&state).len(), 60);
    }

    #[test]
    fn unsupported_claim_loses_to_the_challenger() {
        // Three 4s claimed, only two exist; player 1 challenges and wins.
        let mut state = state_with([[4, 4, 1, 2, 3], [5, 5, 6, 6, 2]], Some((3, 4)));
        assert_eq!(apply(&mut state, Role::P1, CHALLENGE), Some(-1));
    }

    #[test]
    fn supported_claim_beats_the_challenger() {
        let mut state = state_with([[4, 4, 1, 2, 3], [4, 5, 6, 6, 2]], Some((3, 4)));
        assert_eq!(apply(&mut state, Role::P1, CHALLENGE), Some(1));
    }

    #[test]
    fn maximal_claim_leaves_only_the_challenge() {
        let state = state_with([[1; 5], [1; 5]], Some((10, 6)));
        assert_eq!(legal(&state), vec![CHALLENGE]);
    }

    #[test]
    fn observation_hides_opponent_dice() {
        let state = state_with([[1, 2, 4, 5, 6], [3; 5]], Some((3, 4)));
        assert_eq!(observe(&state, Role::P0), "d=12456|c=3x4");
        assert_eq!(observe(&state, Role::P1), "d=33333|c=3x4");
    }

    #[test]
    fn symbols_round_trip() {
        for index in 0..ALPHABET_SIZE as u16 {
            assert_eq!(parse_symbol(&symbol(index)), Some(index));
        }
        assert_eq!(parse_symbol("claim:0x3"), None);
        assert_eq!(parse_symbol("claim:11x1"), None);
    }
}
