//! Simple Negotiation: two players trade Wood and Gold under opposing
//! private valuations, each maximizing the value of their final portfolio.
//!
//! Both players start with 10 wood and 10 gold. Player 0 values wood at 5
//! and gold at 10 points; player 1 values wood at 10 and gold at 5. The
//! valuations are fixed constants of the game, hidden between players but
//! known to the implementation.
//!
//! Alphabet: 1296 offers `offer:<gw>,<gg>,<tw>,<tg>` with each component in
//! 0..=5 (the proposer gives `gw` wood and `gg` gold, and takes `tw` wood
//! and `tg` gold), then `accept`, then `deny`. Accept is legal only while an
//! offer is pending and the trade keeps every inventory non-negative. Deny
//! rejects a pending offer; with no offer pending it counts as a pass, and
//! two consecutive passes end the match. The match also ends after 8 turns.
//!
//! Scoring: `gain_i` is the change in player `i`'s portfolio value under
//! their own valuation; the outcome is `sign(gain_0 - gain_1)`.
//!
//! Observation key: own and opponent inventories, the pending offer from the
//! observer's perspective (`get` = what accepting would receive, `pay` =
//! what it would cost), the consecutive-pass count, and the turn index, e.g.
//! `w=10,g=10|ow=10,og=10|off=get2,0;pay0,2|pp=0|t=1`.

use crate::env::Role;

/// 6^4 offers plus accept and deny.
pub const ALPHABET_SIZE: usize = 1298;
pub const OFFER_COMPONENT_RANGE: u16 = 6;
pub const ACCEPT: u16 = 1296;
pub const DENY: u16 = 1297;

pub const STARTING_WOOD: i32 = 10;
pub const STARTING_GOLD: i32 = 10;
/// `VALUATIONS[player] = (wood value, gold value)`.
pub const VALUATIONS: [(i32, i32); 2] = [(5, 10), (10, 5)];
pub const MAX_TURNS: u32 = 8;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Offer {
    pub give_wood: u8,
    pub give_gold: u8,
    pub take_wood: u8,
    pub take_gold: u8,
}

#[derive(Clone, Debug)]
pub struct NegotiationState {
    pub wood: [i32; 2],
    pub gold: [i32; 2],
    /// Offer made by the previous actor, if any.
    pub pending_offer: Option<Offer>,
    /// Consecutive deny-with-no-pending-offer actions.
    pub consecutive_passes: u8,
}

pub fn offer_index(offer: Offer) -> u16 {
    let r = OFFER_COMPONENT_RANGE;
    offer.give_wood as u16 * r * r * r
        + offer.give_gold as u16 * r * r
        + offer.take_wood as u16 * r
        + offer.take_gold as u16
}

pub fn offer_from_index(index: u16) -> Option<Offer> {
    if index >= ACCEPT {
        return None;
    }
    let r = OFFER_COMPONENT_RANGE;
    Some(Offer {
        give_wood: (index / (r * r * r)) as u8,
        give_gold: (index / (r * r) % r) as u8,
        take_wood: (index / r % r) as u8,
        take_gold: (index % r) as u8,
    })
}

pub fn symbol(index: u16) -> String {
    match index {
        ACCEPT => "accept".to_string(),
        DENY => "deny".to_string(),
        _ => {
            let o = offer_from_index(index).expect("offer index");
            format!("offer:{},{},{},{}", o.give_wood, o.give_gold, o.take_wood, o.take_gold)
        }
    }
}

pub fn parse_symbol(symbol: &str) -> Option<u16> {
    match symbol {
        "accept" => Some(ACCEPT),
        "deny" => Some(DENY),
        _ => {
            let body = symbol.strip_prefix("offer:")?;
            let parts: Vec<u8> = body.split(',').map(|p| p.parse().ok()).collect::<Option<_>>()?;
            if parts.len() != 4 || parts.iter().any(|&c| c as u16 >= OFFER_COMPONENT_RANGE) {
                return None;
            }
            Some(offer_index(Offer {
                give_wood: parts[0],
                give_gold: parts[1],
                take_wood: parts[2],
                take_gold: parts[3],
            }))
        }
    }
}

pub fn reset() -> NegotiationState {
    NegotiationState {
        wood: [STARTING_WOOD; 2],
        gold: [STARTING_GOLD; 2],
        pending_offer: None,
        consecutive_passes: 0,
    }
}

/// A trade is feasible when the proposer can cover what they give and the
/// acceptor can cover what they pay.
fn feasible(state: &NegotiationState, acceptor: Role, offer: Offer) -> bool {
    let proposer = acceptor.opponent().index();
    let acceptor = acceptor.index();
    state.wood[proposer] >= offer.give_wood as i32
        && state.gold[proposer] >= offer.give_gold as i32
        && state.wood[acceptor] >= offer.take_wood as i32
        && state.gold[acceptor] >= offer.take_gold as i32
}

pub fn legal(state: &NegotiationState, active: Role) -> Vec<u16> {
    let mut actions: Vec<u16> = (0..ACCEPT).collect();
    if let Some(offer) = state.pending_offer {
        if feasible(state, active, offer) {
            actions.push(ACCEPT);
        }
    }
    actions.push(DENY);
    actions
}

pub fn apply(state: &mut NegotiationState, active: Role, index: u16) -> Option<i8> {
    match index {
        ACCEPT => {
            let offer = state.pending_offer.take().expect("accept requires a pending offer");
            let acceptor = active.index();
            let proposer = active.opponent().index();
            state.wood[proposer] += offer.take_wood as i32 - offer.give_wood as i32;
            state.gold[proposer] += offer.take_gold as i32 - offer.give_gold as i32;
            state.wood[acceptor] += offer.give_wood as i32 - offer.take_wood as i32;
            state.gold[acceptor] += offer.give_gold as i32 - offer.take_gold as i32;
            debug_assert!(state.wood.iter().chain(state.gold.iter()).all(|&v| v >= 0));
            state.consecutive_passes = 0;
            None
        }
        DENY => {
            if state.pending_offer.take().is_some() {
                state.consecutive_passes = 0;
                None
            } else {
                state.consecutive_passes += 1;
                (state.consecutive_passes >= 2).then(|| settle_sign(state))
            }
        }
        _ => {
            state.pending_offer = Some(offer_from_index(index).expect("offer index"));
            state.consecutive_passes = 0;
            None
        }
    }
}

/// Portfolio gains relative to the starting inventories, one per player,
/// each measured under that player's own valuation.
pub fn gains(state: &NegotiationState) -> [i32; 2] {
    let mut out = [0; 2];
    for p in 0..2 {
        let (wood_value, gold_value) = VALUATIONS[p];
        let initial = STARTING_WOOD * wood_value + STARTING_GOLD * gold_value;
        out[p] = state.wood[p] * wood_value + state.gold[p] * gold_value - initial;
    }
    out
}

/// Outcome when the negotiation ends: `sign(gain_0 - gain_1)`.
pub fn settle_sign(state: &NegotiationState) -> i8 {
    let [g0, g1] = gains(state);
    (g0 - g1).signum() as i8
}

pub fn observe(state: &NegotiationState, role: Role, turn: u32) -> String {
    let own = role.index();
    let opp = role.opponent().index();
    let offer = match state.pending_offer {
        Some(o) => format!("get{},{};pay{},{}", o.give_wood, o.give_gold, o.take_wood, o.take_gold),
        None => "none".to_string(),
    };
    format!(
        "w={},g={}|ow={},og={}|off={}|pp={}|t={}",
        state.wood[own], state.gold[own], state.wood[opp], state.gold[opp], offer, state.consecutive_passes, turn
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offer_indices_round_trip() {
        for index in [0u16, 1, 215, 1295] {
            let offer = offer_from_index(index).unwrap();
            assert_eq!(offer_index(offer), index);
            assert_eq!(parse_symbol(&symbol(index)), Some(index));
        }
        assert_eq!(parse_symbol("accept"), Some(ACCEPT));
        assert_eq!(parse_symbol("deny"), Some(DENY));
        assert_eq!(parse_symbol("offer:6,0,0,0"), None);
    }

    #[test]
    fn no_trades_is_a_draw() {
        let mut state = reset();
        assert_eq!(apply(&mut state, Role::P0, DENY), None);
        assert_eq!(apply(&mut state, Role::P1, DENY), Some(0));
        assert_eq!(gains(&state), [0, 0]);
    }

    #[test]
    fn mutually_beneficial_trade_is_a_draw() {
        // Player 0 gives 2 wood for 2 gold: both gain 10 points.
        let mut state = reset();
        let offer = Offer { give_wood: 2, give_gold: 0, take_wood: 0, take_gold: 2 };
        apply(&mut state, Role::P0, offer_index(offer));
        apply(&mut state, Role::P1, ACCEPT);
        assert_eq!(gains(&state), [10, 10]);
        assert_eq!(settle_sign(&state), 0);
    }

    #[test]
    fn accepting_a_bad_trade_loses() {
        // Player 1 offers 1 gold for 3 gold; player 0 accepting values
        // gold at 10, losing 20 while player 1 gains 10.
        let mut state = reset();
        apply(&mut state, Role::P0, DENY);
        let offer = Offer { give_wood: 0, give_gold: 1, take_wood: 0, take_gold: 3 };
        apply(&mut state, Role::P1, offer_index(offer));
        apply(&mut state, Role::P0, ACCEPT);
        let [g0, g1] = gains(&state);
        assert!(g0 < 0 && 0 <= g1);
        assert_eq!(settle_sign(&state), -1);
    }

    #[test]
    fn resources_are_conserved_by_accepted_trades() {
        let mut state = reset();
        let offer = Offer { give_wood: 5, give_gold: 1, take_wood: 0, take_gold: 4 };
        apply(&mut state, Role::P0, offer_index(offer));
        apply(&mut state, Role::P1, ACCEPT);
        assert_eq!(state.wood[0] + state.wood[1], 2 * STARTING_WOOD);
        assert_eq!(state.gold[0] + state.gold[1], 2 * STARTING_GOLD);
    }

    #[test]
    fn accept_is_illegal_without_a_feasible_offer() {
        let state = reset();
        assert!(!legal(&state, Role::P0).contains(&ACCEPT));
        // An infeasible offer (proposer gives more wood than they hold after
        // first shipping 10 away) cannot be accepted.
        let mut state = reset();
        state.wood[0] = 3;
        let offer = Offer { give_wood: 5, give_gold: 0, take_wood: 0, take_gold: 0 };
        state.pending_offer = Some(offer);
        assert!(!legal(&state, Role::P1).contains(&ACCEPT));
    }

    #[test]
    fn counteroffers_replace_pending_offers() {
        let mut state = reset();
        let first = Offer { give_wood: 1, give_gold: 0, take_wood: 0, take_gold: 1 };
        let second = Offer { give_wood: 0, give_gold: 2, take_wood: 2, take_gold: 0 };
        apply(&mut state, Role::P0, offer_index(first));
        apply(&mut state, Role::P1, offer_index(second));
        assert_eq!(state.pending_offer, Some(second));
    }

    #[test]
    fn observation_orients_offer_to_the_acceptor() {
        let mut state = reset();
        let offer = Offer { give_wood: 2, give_gold: 0, take_wood: 0, take_gold: 2 };
        apply(&mut state, Role::P0, offer_index(offer));
        assert_eq!(observe(&state, Role::P1, 1), "w=10,g=10|ow=10,og=10|off=get2,0;pay0,2|pp=0|t=1");
    }
}
