//! Role-conditioned advantage estimation.
//!
//! One EMA baseline per (game, role) pair tracks that role's expected
//! return; the advantage of a trajectory is its return minus the baseline.
//! Batch processing follows a strict per-trajectory order: the baseline is
//! updated first, then the advantage is computed against the new value, so
//! one update from `b_old` yields `advantage = alpha * (R - b_old)`.
//!
//! Baselines are owned by the learner phase and mutated serially; reads are
//! safe to share between update phases.

use std::collections::BTreeMap;

use crate::env::{GameId, Role};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineEntry<F: Scalar> {
    pub value: F,
    pub update_count: u64,
}

/// Per-(game, role) EMA baselines with decay rate `alpha`.
///
/// Entries initialize to zero and materialize on first update; reading an
/// absent entry yields the zero baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineTable<F: Scalar> {
    alpha: F,
    entries: BTreeMap<(GameId, Role), BaselineEntry<F>>,
}

/// Advantage of one trajectory return for one role.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdvantageRecord<F: Scalar> {
    pub game: GameId,
    pub role: Role,
    pub return_value: F,
    pub advantage: F,
}

impl<F: Scalar> BaselineTable<F> {
    pub fn new(alpha: F) -> Self {
        assert!(alpha >= F::zero() && alpha <= F::one(), "alpha must lie in [0, 1]");
        BaselineTable { alpha, entries: BTreeMap::new() }
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    /// Current baseline; absent entries read as zero.
    pub fn baseline(&self, game: GameId, role: Role) -> F {
        self.entries.get(&(game, role)).map_or(F::zero(), |e| e.value)
    }

    pub fn update_count(&self, game: GameId, role: Role) -> u64 {
        self.entries.get(&(game, role)).map_or(0, |e| e.update_count)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(GameId, Role), &BaselineEntry<F>)> {
        self.entries.iter()
    }

    pub(crate) fn insert_raw(&mut self, game: GameId, role: Role, entry: BaselineEntry<F>) {
        self.entries.insert((game, role), entry);
    }

    /// EMA update: `b <- alpha * b + (1 - alpha) * R`.
    pub fn update_baseline(&mut self, game: GameId, role: Role, return_value: F) {
        assert!(return_value.is_finite());
        let entry = self
            .entries
            .entry((game, role))
            .or_insert(BaselineEntry { value: F::zero(), update_count: 0 });
        entry.value = self.alpha * entry.value + (F::one() - self.alpha) * return_value;
        entry.update_count += 1;
    }

    /// Advantage against the current baseline; does not mutate the table.
    pub fn advantage(&self, game: GameId, role: Role, return_value: F) -> AdvantageRecord<F> {
        AdvantageRecord {
            game,
            role,
            return_value,
            advantage: return_value - self.baseline(game, role),
        }
    }

    /// Process one batch of trajectory returns in order.
    ///
    /// For each trajectory and each role: update the baseline, then compute
    /// the advantage — update precedes advantage.
    pub fn process_batch(&mut self, batch: &[(GameId, [F; 2])]) -> Vec<[AdvantageRecord<F>; 2]> {
        batch
            .iter()
            .map(|&(game, returns)| {
                [Role::P0, Role::P1].map(|role| {
                    let r = returns[role.index()];
                    self.update_baseline(game, role, r);
                    self.advantage(game, role, r)
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 0.95;

    #[test]
    fn first_update_from_zero() {
        let mut table: BaselineTable<f64> = BaselineTable::new(A);
        table.update_baseline(GameId::KuhnPoker, Role::P0, 1.0);
        assert!((table.baseline(GameId::KuhnPoker, Role::P0) - 0.05).abs() < 1e-15);
        assert_eq!(table.update_count(GameId::KuhnPoker, Role::P0), 1);
    }

    #[test]
    fn matching_return_is_a_fixed_point() {
        let mut table: BaselineTable<f64> = BaselineTable::new(A);
        for _ in 0..10 {
            table.update_baseline(GameId::PigDice, Role::P1, 0.5);
        }
        let b = table.baseline(GameId::PigDice, Role::P1);
        table.update_baseline(GameId::PigDice, Role::P1, b);
        // A fixed point only once the baseline has converged to the return.
        let mut table2: BaselineTable<f64> = BaselineTable::new(A);
        table2.insert_raw(GameId::PigDice, Role::P1, BaselineEntry { value: 0.5, update_count: 0 });
        table2.update_baseline(GameId::PigDice, Role::P1, 0.5);
        assert_eq!(table2.baseline(GameId::PigDice, Role::P1), 0.5);
    }

    #[test]
    fn advantage_reads_without_mutating() {
        let mut table: BaselineTable<f64> = BaselineTable::new(A);
        table.update_baseline(GameId::TicTacToe, Role::P0, 4.0);
        let before = table.clone();
        let record = table.advantage(GameId::TicTacToe, Role::P0, 1.0);
        assert!((record.advantage - (1.0 - 0.2)).abs() < 1e-15);
        assert_eq!(table, before);
    }

    #[test]
    fn fresh_table_has_zero_baseline() {
        let table: BaselineTable<f64> = BaselineTable::new(A);
        let record = table.advantage(GameId::LiarsDice, Role::P1, -1.0);
        assert_eq!(record.advantage, -1.0);
    }

    #[test]
    fn update_then_advantage_composition() {
        let mut table: BaselineTable<f64> = BaselineTable::new(A);
        let records = table.process_batch(&[(GameId::KuhnPoker, [1.0, -1.0])]);
        assert!((records[0][0].advantage - 0.95).abs() < 1e-15);
        assert!((table.baseline(GameId::KuhnPoker, Role::P0) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn two_step_ema_matches_hand_computation() {
        let mut table: BaselineTable<f64> = BaselineTable::new(A);
        let batch = [(GameId::KuhnPoker, [1.0, -1.0]), (GameId::KuhnPoker, [1.0, -1.0])];
        let records = table.process_batch(&batch);
        assert!((records[0][0].advantage - 0.95).abs() < 1e-15);
        assert!((records[1][0].advantage - 0.9025).abs() < 1e-15);
    }

    #[test]
    fn advantage_equals_alpha_times_residual() {
        // One update from b_old: A = R - (a*b_old + (1-a)*R) = a*(R - b_old).
        let mut rng = crate::seeds::rng(5);
        use rand::Rng;
        let mut table: BaselineTable<f64> = BaselineTable::new(A);
        for _ in 0..1000 {
            let r: f64 = rng.random_range(-1.0..1.0);
            let b_old = table.baseline(GameId::ConnectFour, Role::P0, );
            table.update_baseline(GameId::ConnectFour, Role::P0, r);
            let record = table.advantage(GameId::ConnectFour, Role::P0, r);
            assert!((record.advantage - A * (r - b_old)).abs() <= 1e-12);
        }
    }

    #[test]
    fn games_do_not_cross_contaminate() {
        let mut table: BaselineTable<f64> = BaselineTable::new(A);
        table.update_baseline(GameId::TicTacToe, Role::P0, 1.0);
        let ttt_before = table.baseline(GameId::TicTacToe, Role::P0);
        table.process_batch(&[(GameId::KuhnPoker, [-1.0, 1.0])]);
        assert_eq!(table.baseline(GameId::TicTacToe, Role::P0), ttt_before);
        assert_eq!(table.baseline(GameId::TicTacToe, Role::P1), 0.0);
        assert_eq!(table.update_count(GameId::TicTacToe, Role::P1), 0);
    }

    #[test]
    fn baseline_stays_within_observed_return_range() {
        use rand::Rng;
        let mut rng = crate::seeds::rng(17);
        let mut table: BaselineTable<f64> = BaselineTable::new(A);
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for _ in 0..5000 {
            let r = if rng.random_range(0..2) == 0 { -1.0 } else { 1.0 };
            lo = lo.min(r);
            hi = hi.max(r);
            table.update_baseline(GameId::PigDice, Role::P0, r);
            let b = table.baseline(GameId::PigDice, Role::P0);
            assert!(b >= lo - 1e-12 && b <= hi + 1e-12);
        }
    }
}
