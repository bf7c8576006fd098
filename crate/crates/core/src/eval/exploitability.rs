//! Exact best-response oracle for single-round Kuhn Poker.
//!
//! The within-round strategy of each role lives on 12 information sets:
//! player 0 decides at `(card, "")` and `(card, "check,bet")`, player 1 at
//! `(card, "check")` and `(card, "bet")`. This module computes expected
//! values and exact best responses by direct enumeration over the 6 deals
//! and all betting lines, with its own payoff arithmetic — it shares no
//! code with the game engine, so the two act as independent routes that
//! cross-check each other in tests.
//!
//! Exploitability is the average best-response gain over both roles beyond
//! the game value (-1/18 to the first actor); it is zero exactly at a Nash
//! equilibrium, e.g. the classic one-parameter family `nash_strategy`.

use serde::Serialize;

use crate::env::EnvParams;
use crate::games::kuhn;
use crate::policy::{Mask, PolicyParams};
use crate::scalar::Scalar;

/// Game value of single-round Kuhn Poker to the first actor under optimal play.
pub const GAME_VALUE_P0: f64 = -1.0 / 18.0;

/// Behavior strategy on the 12 single-round information sets, indexed by
/// card (0=J, 1=Q, 2=K). Each entry is the probability of the aggressive
/// action (bet or call); the passive complement is check or fold.
#[derive(Clone, Debug, PartialEq)]
pub struct KuhnStrategy<F: Scalar> {
    /// P(bet | card) for player 0 at the empty history.
    pub p0_bet: [F; 3],
    /// P(call | card) for player 0 facing check-bet.
    pub p0_call: [F; 3],
    /// P(bet | card) for player 1 facing a check.
    pub p1_bet: [F; 3],
    /// P(call | card) for player 1 facing a bet.
    pub p1_call: [F; 3],
}

impl<F: Scalar> KuhnStrategy<F> {
    pub fn uniform() -> Self {
        let half = F::from_f64_lossy(0.5);
        KuhnStrategy { p0_bet: [half; 3], p0_call: [half; 3], p1_bet: [half; 3], p1_call: [half; 3] }
    }
}

/// The classic one-parameter Nash family, valid for `alpha` in [0, 1/3]:
/// player 0 bets J with probability `alpha`, never bets Q, bets K with
/// `3*alpha`, and after check-bet calls Q with `alpha + 1/3`; player 1 bets
/// J with 1/3 and K always after a check, and calls Q with 1/3 facing a bet.
pub fn nash_strategy<F: Scalar>(alpha: f64) -> KuhnStrategy<F> {
    assert!((0.0..=1.0 / 3.0 + 1e-12).contains(&alpha), "alpha must lie in [0, 1/3]");
    let f = F::from_f64_lossy;
    KuhnStrategy {
        p0_bet: [f(alpha), f(0.0), f(3.0 * alpha)],
        p0_call: [f(0.0), f(alpha + 1.0 / 3.0), f(1.0)],
        p1_bet: [f(1.0 / 3.0), f(0.0), f(1.0)],
        p1_call: [f(0.0), f(1.0 / 3.0), f(1.0)],
    }
}

fn sign<F: Scalar>(a: usize, b: usize) -> F {
    if a > b {
        F::one()
    } else {
        -F::one()
    }
}

/// Expected return to player 0 of a strategy pair, by exact enumeration
/// over the 6 deals and all betting lines.
pub fn expected_value<F: Scalar>(strategy: &KuhnStrategy<F>) -> F {
    let sixth = F::from_f64_lossy(1.0 / 6.0);
    let one = F::one();
    let two = F::from_f64_lossy(2.0);
    let mut total = F::zero();
    for &(c0, c1) in &kuhn::DEALS {
        let (c0, c1) = (c0 as usize, c1 as usize);
        let w: F = sign(c0, c1);
        let bet = strategy.p0_bet[c0];
        let check = one - bet;
        // bet line: player 1 calls (showdown for 2) or folds (+1).
        let bet_value = strategy.p1_call[c1] * two * w + (one - strategy.p1_call[c1]) * one;
        // check line: player 1 bets (player 0 calls for 2 or folds -1) or
        // checks (showdown for 1).
        let call_value = strategy.p0_call[c0] * two * w + (one - strategy.p0_call[c0]) * -one;
        let check_value =
            strategy.p1_bet[c1] * call_value + (one - strategy.p1_bet[c1]) * w;
        total += sixth * (bet * bet_value + check * check_value);
    }
    total
}

/// Value to a best-responding player 1 against the strategy's player-0 half.
pub fn best_response_value_p1<F: Scalar>(strategy: &KuhnStrategy<F>) -> F {
    let sixth = F::from_f64_lossy(1.0 / 6.0);
    let one = F::one();
    let two = F::from_f64_lossy(2.0);
    let mut total = F::zero();
    for c1 in 0..3usize {
        // Facing a bet: pooled over opponent cards weighted by bet reach.
        let mut call = F::zero();
        let mut fold = F::zero();
        // Facing a check: respond bet (player 0 then calls or folds) or check.
        let mut raise = F::zero();
        let mut check_back = F::zero();
        for c0 in (0..3usize).filter(|&c| c != c1) {
            let w: F = sign(c1, c0); // sign from player 1's perspective
            let bet_reach = sixth * strategy.p0_bet[c0];
            call += bet_reach * two * w;
            fold += bet_reach * -one;
            let check_reach = sixth * (one - strategy.p0_bet[c0]);
            raise += check_reach
                * (strategy.p0_call[c0] * two * w + (one - strategy.p0_call[c0]) * one);
            check_back += check_reach * w;
        }
        total += call.max(fold) + raise.max(check_back);
    }
    total
}

/// Value to a best-responding player 0 against the strategy's player-1 half.
pub fn best_response_value_p0<F: Scalar>(strategy: &KuhnStrategy<F>) -> F {
    let sixth = F::from_f64_lossy(1.0 / 6.0);
    let one = F::one();
    let two = F::from_f64_lossy(2.0);
    let mut total = F::zero();
    for c0 in 0..3usize {
        let mut bet_value = F::zero();
        // Check line splits into the pooled call/fold decision at check-bet
        // and the showdown when player 1 checks behind.
        let mut check_showdown = F::zero();
        let mut call_after = F::zero();
        let mut fold_after = F::zero();
        for c1 in (0..3usize).filter(|&c| c != c0) {
            let w: F = sign(c0, c1);
            bet_value += sixth * (strategy.p1_call[c1] * two * w + (one - strategy.p1_call[c1]) * one);
            let bet_reach = sixth * strategy.p1_bet[c1];
            call_after += bet_reach * two * w;
            fold_after += bet_reach * -one;
            check_showdown += sixth * (one - strategy.p1_bet[c1]) * w;
        }
        let check_value = check_showdown + call_after.max(fold_after);
        total += bet_value.max(check_value);
    }
    total
}

/// Exploitability of a strategy pair: the mean best-response gain over both
/// roles beyond the game value. Non-negative; zero exactly at Nash.
pub fn exploitability_of_strategy<F: Scalar>(strategy: &KuhnStrategy<F>) -> F {
    let v0 = F::from_f64_lossy(GAME_VALUE_P0);
    let v1 = -v0;
    let br1 = best_response_value_p1(strategy) - v1;
    let br0 = best_response_value_p0(strategy) - v0;
    (br0 + br1) / F::from_f64_lossy(2.0)
}

/// Exploitability report for a policy checkpoint.
#[derive(Clone, Debug, Serialize)]
pub struct ExploitabilityReport {
    pub checkpoint_id: String,
    /// Best-response value against the policy playing role 0 (value to the
    /// responding player 1) and against role 1 (value to player 0).
    pub best_response_value: [f64; 2],
    /// Game value to each role under optimal play.
    pub game_value: [f64; 2],
    /// Best-response gain beyond the game value, per responded-to role.
    pub nash_gap: [f64; 2],
    /// Mean of the two gaps; zero iff the policy pair is a Nash equilibrium.
    pub exploitability: f64,
}

/// Extract the single-round strategy a policy induces, reading its masked
/// (legal-only, temperature 1) distributions at the 12 information sets.
/// Unseen keys fall back to uniform.
pub fn extract_strategy<F: Scalar>(params: &PolicyParams<F>, env: &EnvParams) -> KuhnStrategy<F> {
    use crate::env::{GameId, ObservationKey, Role};
    let cards = ['J', 'Q', 'K'];
    let key = |role: u8, card: char, history: &str| ObservationKey {
        game: GameId::KuhnPoker,
        role: Role(role),
        key: if env.kuhn_obs_includes_round {
            format!("c={card}|r=0|h={history}")
        } else {
            format!("c={card}|h={history}")
        },
    };
    // Legal pairs in canonical (sorted) order with the aggressive member named.
    let aggressive = |role: u8, card: char, history: &str, legal: [u16; 2], action: u16| {
        let probs = params
            .action_distribution(&key(role, card, history), F::one(), Mask::LegalOnly(&legal))
            .expect("legal pair is non-empty");
        probs[action as usize]
    };
    let mut strategy = KuhnStrategy::uniform();
    for (i, &card) in cards.iter().enumerate() {
        strategy.p0_bet[i] = aggressive(0, card, "", [kuhn::CHECK, kuhn::BET], kuhn::BET);
        strategy.p0_call[i] = aggressive(0, card, "check,bet", [kuhn::CALL, kuhn::FOLD], kuhn::CALL);
        strategy.p1_bet[i] = aggressive(1, card, "check", [kuhn::CHECK, kuhn::BET], kuhn::BET);
        strategy.p1_call[i] = aggressive(1, card, "bet", [kuhn::CALL, kuhn::FOLD], kuhn::CALL);
    }
    strategy
}

/// Exploitability of a policy checkpoint on single-round Kuhn Poker.
pub fn kuhn_exploitability<F: Scalar>(
    params: &PolicyParams<F>,
    env: &EnvParams,
    checkpoint_id: &str,
) -> ExploitabilityReport {
    let strategy = extract_strategy(params, env);
    report_for(&strategy, checkpoint_id)
}

/// Report for an explicit strategy.
pub fn report_for<F: Scalar>(strategy: &KuhnStrategy<F>, id: &str) -> ExploitabilityReport {
    let br1 = best_response_value_p1(strategy).to_f64_lossy();
    let br0 = best_response_value_p0(strategy).to_f64_lossy();
    let v0 = GAME_VALUE_P0;
    let v1 = -GAME_VALUE_P0;
    ExploitabilityReport {
        checkpoint_id: id.to_string(),
        best_response_value: [br1, br0],
        game_value: [v0, v1],
        nash_gap: [br1 - v1, br0 - v0],
        exploitability: ((br1 - v1) + (br0 - v0)) / 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nash_pair_has_the_classical_game_value() {
        for alpha in [0.0, 1.0 / 6.0, 1.0 / 3.0] {
            let strategy = nash_strategy::<f64>(alpha);
            let ev = expected_value(&strategy);
            assert!(
                (ev - GAME_VALUE_P0).abs() < 1e-12,
                "alpha {alpha}: EV {ev} vs {GAME_VALUE_P0}"
            );
        }
    }

    #[test]
    fn nash_family_is_unexploitable() {
        for alpha in [0.0, 0.1, 1.0 / 6.0, 0.25, 1.0 / 3.0] {
            let strategy = nash_strategy::<f64>(alpha);
            let exploitability = exploitability_of_strategy(&strategy);
            assert!(exploitability.abs() <= 1e-12, "alpha {alpha}: {exploitability}");
        }
    }

    #[test]
    fn best_response_dominates_self_play_value() {
        use rand::Rng;
        let mut rng = crate::seeds::rng(21);
        for _ in 0..200 {
            let mut random: KuhnStrategy<f64> = KuhnStrategy::uniform();
            for i in 0..3 {
                random.p0_bet[i] = rng.random();
                random.p0_call[i] = rng.random();
                random.p1_bet[i] = rng.random();
                random.p1_call[i] = rng.random();
            }
            let ev = expected_value(&random);
            assert!(best_response_value_p0(&random) >= ev - 1e-12);
            assert!(best_response_value_p1(&random) >= -ev - 1e-12);
            assert!(exploitability_of_strategy(&random) >= -1e-12);
        }
    }

    #[test]
    fn uniform_strategy_expected_value() {
        // Hand enumeration: every line contributes w*(1/4+1/8+1/4) + 1/8.
        let ev = expected_value(&KuhnStrategy::<f64>::uniform());
        assert!((ev - 0.125).abs() < 1e-12, "{ev}");
    }

    #[test]
    fn extraction_reads_the_policy_table() {
        use crate::env::{GameId, ObservationKey, Role};
        let mut params: PolicyParams<f64> = PolicyParams::new();
        // Make betting with K near-certain for player 0.
        let key = ObservationKey { game: GameId::KuhnPoker, role: Role(0), key: "c=K|h=".to_string() };
        params.logits_mut(&key)[kuhn::BET as usize] = 50.0;
        let strategy = extract_strategy(&params, &EnvParams::default());
        assert!(strategy.p0_bet[2] > 0.999999);
        // Untouched infosets stay uniform.
        assert!((strategy.p1_call[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn report_is_consistent() {
        let report = report_for(&KuhnStrategy::<f64>::uniform(), "test");
        assert!(report.exploitability > 0.0);
        assert!((report.nash_gap[0] + report.nash_gap[1]) / 2.0 - report.exploitability < 1e-15);
    }
}
