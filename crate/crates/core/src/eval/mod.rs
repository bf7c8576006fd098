//! Evaluation harness: seeded match play between agents, head-to-head
//! tournaments, and the exact oracles (TicTacToe minimax, Kuhn Poker best
//! response, full-tree expected returns).

pub mod enumerate;
pub mod exploitability;
pub mod minimax;

pub use enumerate::{enumerate_expected_return, EvalDist, EvalError};
pub use exploitability::{
    exploitability_of_strategy, extract_strategy, kuhn_exploitability, nash_strategy,
    ExploitabilityReport, KuhnStrategy,
};
pub use minimax::tictactoe_minimax;

use serde::Serialize;

use crate::agents::Agent;
use crate::env::{EnvParams, GameId, OutcomeReason, Role};
use crate::scalar::Scalar;
use crate::seeds;

/// Aggregate result of a seeded match series between two agents.
#[derive(Clone, Debug, Serialize)]
pub struct MatchReport {
    pub game: GameId,
    pub agent_a: String,
    pub agent_b: String,
    pub n_games: usize,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
    /// Wins over all games.
    pub win_rate: f64,
    /// 95% Wilson score interval on `win_rate`.
    pub win_rate_ci: (f64, f64),
    /// Wins over decisive games; 0.5 when every game drew.
    pub decisive_win_rate: f64,
    /// Wins plus draws over all games.
    pub non_loss_rate: f64,
    pub mean_game_length: f64,
    /// Fraction of each agent's turns that played an illegal token.
    pub invalid_move_freq: [f64; 2],
    /// Mean sampling entropy per agent, when the agent reports one.
    pub mean_entropy: [Option<f64>; 2],
    /// Count of matches ended by forfeit or the turn limit.
    pub forfeits: usize,
    pub turn_limit_ends: usize,
}

fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054f64;
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Play `n_games` independent seeded games between two agents.
///
/// The role assignment of agent A is randomized per game (drawn from the
/// match stream), so first-move advantage cancels in expectation.
pub fn play_match<F: Scalar>(
    agent_a: &dyn Agent<F>,
    agent_b: &dyn Agent<F>,
    game: GameId,
    n_games: usize,
    seed: u64,
    env_params: &EnvParams,
) -> Result<MatchReport, crate::agents::AgentError> {
    use rand::Rng;
    let mut wins = 0;
    let mut draws = 0;
    let mut losses = 0;
    let mut total_turns = 0u64;
    let mut invalid = [0u64; 2];
    let mut turns_by_agent = [0u64; 2];
    let mut entropy_sum = [0.0f64; 2];
    let mut entropy_count = [0u64; 2];
    let mut forfeits = 0;
    let mut turn_limit_ends = 0;

    for game_index in 0..n_games {
        use rand::RngCore;
        let mut stream = seeds::rng(seeds::derive_labeled(seed, "match", game_index as u64));
        let a_role = Role(stream.random_range(0..2u8));
        let env_seed = stream.next_u64();
        let mut state = crate::env::reset_with(game, env_seed, env_params);
        while !state.is_terminal() {
            let role = state.active_role().expect("non-terminal");
            let agent_index = if role == a_role { 0 } else { 1 };
            let agent: &dyn Agent<F> = if agent_index == 0 { agent_a } else { agent_b };
            let legal = state.legal_indices().expect("non-terminal");
            let mv = agent.act(&state, &mut stream)?;
            turns_by_agent[agent_index] += 1;
            if legal.binary_search(&mv.action.index).is_err() {
                invalid[agent_index] += 1;
            }
            if let Some(h) = mv.entropy {
                entropy_sum[agent_index] += h.to_f64_lossy();
                entropy_count[agent_index] += 1;
            }
            state = state.apply(mv.action)?;
        }
        let outcome = state.outcome().expect("terminal");
        match outcome.reason {
            OutcomeReason::InvalidMoveForfeit => forfeits += 1,
            OutcomeReason::TurnLimit => turn_limit_ends += 1,
            OutcomeReason::NaturalEnd => {}
        }
        total_turns += state.turn() as u64;
        let reward_a = outcome.reward(a_role);
        if reward_a > 0 {
            wins += 1;
        } else if reward_a < 0 {
            losses += 1;
        } else {
            draws += 1;
        }
    }

    let n = n_games.max(1) as f64;
    let decisive = wins + losses;
    Ok(MatchReport {
        game,
        agent_a: agent_a.name(),
        agent_b: agent_b.name(),
        n_games,
        wins,
        draws,
        losses,
        win_rate: wins as f64 / n,
        win_rate_ci: wilson_interval(wins, n_games),
        decisive_win_rate: if decisive == 0 { 0.5 } else { wins as f64 / decisive as f64 },
        non_loss_rate: (wins + draws) as f64 / n,
        mean_game_length: total_turns as f64 / n,
        invalid_move_freq: [
            if turns_by_agent[0] == 0 { 0.0 } else { invalid[0] as f64 / turns_by_agent[0] as f64 },
            if turns_by_agent[1] == 0 { 0.0 } else { invalid[1] as f64 / turns_by_agent[1] as f64 },
        ],
        mean_entropy: [
            (entropy_count[0] > 0).then(|| entropy_sum[0] / entropy_count[0] as f64),
            (entropy_count[1] > 0).then(|| entropy_sum[1] / entropy_count[1] as f64),
        ],
        forfeits,
        turn_limit_ends,
    })
}

/// Round-robin head-to-head among named agents, reporting both the per-pair
/// match reports and each agent's pooled rate over all its games.
#[derive(Clone, Debug, Serialize)]
pub struct TournamentReport {
    pub game: GameId,
    pub per_pair: Vec<MatchReport>,
    /// Pooled (wins, draws, losses, win_rate) per agent across all pairs.
    pub pooled: Vec<PooledStanding>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PooledStanding {
    pub agent: String,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
    pub win_rate: f64,
}

pub fn tournament<F: Scalar>(
    agents: &[&dyn Agent<F>],
    game: GameId,
    games_per_pair: usize,
    seed: u64,
    env_params: &EnvParams,
) -> Result<TournamentReport, crate::agents::AgentError> {
    let mut per_pair = Vec::new();
    let mut tallies: Vec<(usize, usize, usize)> = vec![(0, 0, 0); agents.len()];
    for i in 0..agents.len() {
        for j in i + 1..agents.len() {
            let pair_seed = seeds::derive_labeled(seed, "pair", (i * agents.len() + j) as u64);
            let report = play_match(agents[i], agents[j], game, games_per_pair, pair_seed, env_params)?;
            tallies[i].0 += report.wins;
            tallies[i].1 += report.draws;
            tallies[i].2 += report.losses;
            tallies[j].0 += report.losses;
            tallies[j].1 += report.draws;
            tallies[j].2 += report.wins;
            per_pair.push(report);
        }
    }
    let pooled = agents
        .iter()
        .zip(&tallies)
        .map(|(agent, &(wins, draws, losses))| {
            let n = (wins + draws + losses).max(1);
            PooledStanding {
                agent: agent.name(),
                wins,
                draws,
                losses,
                win_rate: wins as f64 / n as f64,
            }
        })
        .collect();
    Ok(TournamentReport { game, per_pair, pooled })
}

/// Aligned-text rendering of match reports, one row per report.
pub fn render_table(reports: &[MatchReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<18} {:<22} {:<22} {:>6} {:>6} {:>6} {:>6} {:>8} {:>8} {:>8} {:>8}\n",
        "game", "agent_a", "agent_b", "n", "wins", "draws", "losses", "win", "dec_win", "nonloss", "len"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<18} {:<22} {:<22} {:>6} {:>6} {:>6} {:>6} {:>8.4} {:>8.4} {:>8.4} {:>8.2}\n",
            r.game.name(),
            truncate(&r.agent_a, 22),
            truncate(&r.agent_b, 22),
            r.n_games,
            r.wins,
            r.draws,
            r.losses,
            r.win_rate,
            r.decisive_win_rate,
            r.non_loss_rate,
            r.mean_game_length,
        ));
    }
    out
}

/// CSV rendering of match reports with a fixed column order.
pub fn render_csv(reports: &[MatchReport]) -> String {
    let mut out = String::from(
        "game,agent_a,agent_b,n_games,wins,draws,losses,win_rate,ci_lo,ci_hi,decisive_win_rate,non_loss_rate,mean_game_length,invalid_freq_a,invalid_freq_b,forfeits,turn_limit_ends\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.game.name(),
            r.agent_a,
            r.agent_b,
            r.n_games,
            r.wins,
            r.draws,
            r.losses,
            r.win_rate,
            r.win_rate_ci.0,
            r.win_rate_ci.1,
            r.decisive_win_rate,
            r.non_loss_rate,
            r.mean_game_length,
            r.invalid_move_freq[0],
            r.invalid_move_freq[1],
            r.forfeits,
            r.turn_limit_ends,
        ));
    }
    out
}

fn truncate(s: &str, n: usize) -> String {
    if s.len() <= n {
        s.to_string()
    } else {
        s[..n].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::RandomAgent;

    #[test]
    fn report_counts_are_consistent() {
        let report = play_match::<f64>(
            &RandomAgent,
            &RandomAgent,
            GameId::TicTacToe,
            200,
            7,
            &EnvParams::default(),
        )
        .unwrap();
        assert_eq!(report.wins + report.draws + report.losses, report.n_games);
        assert_eq!(report.invalid_move_freq, [0.0, 0.0]);
        assert!(report.mean_game_length > 4.0 && report.mean_game_length <= 9.0);
    }

    #[test]
    fn matches_replay_exactly() {
        let a = play_match::<f64>(&RandomAgent, &RandomAgent, GameId::PigDice, 50, 3, &EnvParams::default())
            .unwrap();
        let b = play_match::<f64>(&RandomAgent, &RandomAgent, GameId::PigDice, 50, 3, &EnvParams::default())
            .unwrap();
        assert_eq!(a.wins, b.wins);
        assert_eq!(a.mean_game_length, b.mean_game_length);
    }

    #[test]
    fn mirror_match_is_symmetric_within_noise() {
        // Same agent on both sides with randomized starting assignment:
        // decisive win rate within 3 sigma of one half.
        let report = play_match::<f64>(
            &RandomAgent,
            &RandomAgent,
            GameId::KuhnPoker,
            2000,
            11,
            &EnvParams::default(),
        )
        .unwrap();
        let decisive = (report.wins + report.losses) as f64;
        let sigma = 0.5 / decisive.sqrt();
        assert!((report.decisive_win_rate - 0.5).abs() <= 3.0 * sigma);
    }

    #[test]
    fn wilson_interval_sane() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo < 1e-12 && hi < 0.06);
    }

    #[test]
    fn tournament_pools_standings() {
        let agents: Vec<&dyn Agent<f64>> = vec![&RandomAgent, &RandomAgent, &RandomAgent];
        let report =
            tournament(&agents, GameId::TicTacToe, 20, 5, &EnvParams::default()).unwrap();
        assert_eq!(report.per_pair.len(), 3);
        for standing in &report.pooled {
            assert_eq!(standing.wins + standing.draws + standing.losses, 40);
        }
    }
}
