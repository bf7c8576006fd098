//! Fixed-horizon diagnostic game.
//!
//! `Toy(h=H,k=K,m=M)` runs exactly `H` turns. Every turn offers the same
//! `M`-token alphabet `a0..a<M-1>` of which the first `K` are legal, so a
//! uniform full-alphabet policy plays a valid action with probability `K/M`
//! at every turn. Reaching the horizon ends the match in a draw. The game
//! exists to calibrate invalid-move dynamics and gradient checks against
//! closed-form expectations.
//!
//! Observation key: the turn index, `t=<turn>`.

use crate::env::ToySpec;

#[derive(Clone, Debug)]
pub struct ToyState {
    pub spec: ToySpec,
}

pub fn symbol(index: u16) -> String {
    format!("a{index}")
}

pub fn parse_symbol(symbol: &str) -> Option<u16> {
    symbol.strip_prefix('a')?.parse().ok()
}

pub fn reset(spec: ToySpec) -> ToyState {
    assert!(spec.horizon >= 1 && spec.legal >= 1 && spec.legal <= spec.alphabet);
    ToyState { spec }
}

pub fn legal(state: &ToyState) -> Vec<u16> {
    (0..state.spec.legal as u16).collect()
}

pub fn apply(state: &mut ToyState, turn_after: u32) -> Option<i8> {
    (turn_after >= state.spec.horizon as u32).then_some(0)
}

pub fn observe(turn: u32) -> String {
    format!("t={turn}")
}
