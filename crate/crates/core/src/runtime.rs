//! Synchronous actor-learner training loop.
//!
//! Each step: take an immutable policy snapshot, collect a full batch of
//! self-play (or fixed-opponent) trajectories on `K` parallel actors, hand
//! the batch to the learner behind a step barrier, emit one metrics row,
//! and checkpoint on cadence. Every trajectory is fully determined by
//! `(config, master seed, step, assignment index)`, and the batch keeps its
//! canonical assignment order, so runs are bit-reproducible for any actor
//! count and resume exactly from any checkpoint.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::advantage::BaselineTable;
use crate::agents::{Agent, AgentError, PolicyAgent, RandomAgent, ScriptedAgent};
use crate::checkpoint::{config_sha256, Checkpoint, CheckpointError};
use crate::config::{
    parse_reference, EvalAction, OpponentKind, ReferenceOpponent, RunConfig,
};
use crate::env::{self, GameId, Role};
use crate::eval::{self, MatchReport};
use crate::learner::{self, LearnerError, OptimizerState};
use crate::metrics::{column_game_name, MetricsRow, MetricsSchema, MetricsWriter};
use crate::policy::{Mask, MaskMode, PolicyParams, PolicySnapshot};
use crate::scalar::Scalar;
use crate::seeds;
use crate::trajectory::{Trajectory, TurnRecord};

const COLLECTION_RETRIES: u32 = 3;
const MAX_CONSECUTIVE_ABORTS: u32 = 3;

#[derive(Error, Debug)]
pub enum RuntimeError {
    #[error("environment error: {0}")]
    Env(#[from] env::EnvError),
    #[error("agent error: {0}")]
    Agent(#[from] AgentError),
    #[error("learner error: {0}")]
    Learner(#[from] LearnerError),
    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] CheckpointError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("trajectory {index} failed after {attempts} attempts: {message}")]
    CollectionFailed { index: usize, attempts: u32, message: String },
    #[error("training aborted after {0} consecutive non-finite gradient steps")]
    TrainingAborted(u32),
    #[error("batch zero-sum ledger violated: sum of returns is {0}")]
    ZeroSumLedger(i64),
}

/// Where a run writes its outputs.
#[derive(Clone, Debug)]
pub struct TrainOptions {
    pub out_dir: PathBuf,
    /// Resume from this checkpoint file; steps continue after its step.
    pub resume_from: Option<PathBuf>,
    pub quiet: bool,
}

/// Result of a completed run.
#[derive(Debug)]
pub struct TrainOutput {
    pub final_step: u64,
    pub final_checkpoint: PathBuf,
    pub metrics_rows: Vec<MetricsRow>,
    /// Filled at each eval step: (step, lagged decisive win rate per game).
    pub lag_winrates: Vec<(u64, GameId, f64)>,
}

/// Sample a game id from normalized weights using one uniform draw.
fn pick_game(weights: &[(GameId, f64)], draw: f64) -> GameId {
    let mut cumulative = 0.0;
    for &(game, w) in weights {
        cumulative += w;
        if draw < cumulative {
            return game;
        }
    }
    weights.last().expect("non-empty game list").0
}

/// Play one full trajectory from its derived seed.
///
/// The per-trajectory stream drives, in order: the game pick, the learner
/// role pick (fixed-opponent runs only), the environment seed, then one
/// draw per turn (policy sample or opponent move).
fn play_trajectory<F: Scalar>(
    snapshot: &PolicySnapshot<F>,
    config: &RunConfig,
    opponent: Option<&dyn Agent<F>>,
    traj_seed: u64,
) -> Result<Trajectory<F>, AgentError> {
    let mut stream = seeds::rng(traj_seed);
    let weights = config.game_weights();
    let game = pick_game(&weights, stream.random());
    let learner_role = opponent.map(|_| Role(stream.random_range(0..2u8)));
    let env_seed = stream.next_u64();
    let temperature = F::from_f64_lossy(config.policy.temperature);

    let mut state = env::reset_with(game, env_seed, &config.env);
    let mut turns = Vec::new();
    while !state.is_terminal() {
        let role = state.active_role()?;
        let legal = state.legal_indices()?;
        let obs = state.observe(role)?;
        let policy_turn = learner_role.map_or(true, |r| r == role);
        let record = if policy_turn {
            let mask = match config.policy.mask {
                MaskMode::FullAlphabet => Mask::FullAlphabet,
                MaskMode::LegalOnly => Mask::LegalOnly(&legal),
            };
            let draw = F::from_f64_lossy(stream.random::<f64>());
            let sample = snapshot.sample(&obs, temperature, mask, draw)?;
            let is_legal = legal.binary_search(&sample.index).is_ok();
            let record = TurnRecord {
                t: state.turn(),
                role,
                obs_key: obs,
                action: sample.index,
                legal: is_legal,
                logprob: Some(sample.logprob),
                entropy: Some(sample.distribution_entropy),
                legal_set: legal,
                annotation: String::new(),
            };
            state = state.apply(sample.action)?;
            record
        } else {
            let mv = opponent.expect("opponent turn").act(&state, &mut stream)?;
            let is_legal = legal.binary_search(&mv.action.index).is_ok();
            let record = TurnRecord {
                t: state.turn(),
                role,
                obs_key: obs,
                action: mv.action.index,
                legal: is_legal,
                logprob: None,
                entropy: None,
                legal_set: legal,
                annotation: String::new(),
            };
            state = state.apply(mv.action)?;
            record
        };
        turns.push(record);
    }
    let outcome = state.outcome().expect("terminal");
    Ok(Trajectory {
        game,
        seed: env_seed,
        params: config.env,
        turns,
        rho: outcome.rho,
        reason: outcome.reason,
    })
}

/// Collect exactly `batch_size` trajectories in canonical assignment order.
///
/// `K = config.run.actors` worker threads split the assignment indices; the
/// result is byte-identical for every `K` because trajectory `i` depends
/// only on `(step_seed, i)`.
pub fn collect_batch<F: Scalar>(
    snapshot: &PolicySnapshot<F>,
    config: &RunConfig,
    step_seed: u64,
    opponent: Option<&dyn Agent<F>>,
) -> Result<Vec<Trajectory<F>>, RuntimeError> {
    let batch_size = config.run.batch_size;
    let actors = config.run.actors.max(1).min(batch_size.max(1));

    let collect_one = |index: usize| -> Result<Trajectory<F>, RuntimeError> {
        let mut attempt = 0u32;
        loop {
            let traj_seed = seeds::derive_labeled(step_seed, "traj", (index as u64) << 8 | attempt as u64);
            match play_trajectory(snapshot, config, opponent, traj_seed) {
                Ok(traj) => return Ok(traj),
                Err(err) if attempt < COLLECTION_RETRIES => {
                    attempt += 1;
                    let _ = err;
                }
                Err(err) => {
                    return Err(RuntimeError::CollectionFailed {
                        index,
                        attempts: attempt + 1,
                        message: err.to_string(),
                    })
                }
            }
        }
    };

    let mut batch: Vec<Option<Trajectory<F>>> = (0..batch_size).map(|_| None).collect();
    if actors == 1 {
        for (index, slot) in batch.iter_mut().enumerate() {
            *slot = Some(collect_one(index)?);
        }
    } else {
        let results = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for worker in 0..actors {
                let collect_one = &collect_one;
                handles.push(scope.spawn(move || {
                    let mut collected = Vec::new();
                    let mut index = worker;
                    while index < batch_size {
                        collected.push((index, collect_one(index)));
                        index += actors;
                    }
                    collected
                }));
            }
            let mut merged = Vec::new();
            for handle in handles {
                merged.extend(handle.join().expect("actor thread panicked"));
            }
            merged
        });
        for (index, result) in results {
            batch[index] = Some(result?);
        }
    }
    let batch: Vec<Trajectory<F>> = batch.into_iter().map(|t| t.expect("slot filled")).collect();

    let ledger: i64 = batch.iter().map(|t| t.rho as i64 + (-t.rho) as i64).sum();
    if ledger != 0 {
        return Err(RuntimeError::ZeroSumLedger(ledger));
    }
    Ok(batch)
}

/// Resolve the configured collection opponent. `None` means shared-policy
/// self-play.
pub fn build_opponent<F: Scalar>(
    config: &RunConfig,
) -> Result<Option<Box<dyn Agent<F>>>, RuntimeError> {
    match config.opponent.kind {
        OpponentKind::SelfPlayShared => Ok(None),
        OpponentKind::UniformRandomLegal => Ok(Some(Box::new(RandomAgent))),
        OpponentKind::Scripted => {
            let script = config.opponent.script.clone().expect("validated");
            Ok(Some(Box::new(ScriptedAgent::new(script))))
        }
        OpponentKind::FrozenCheckpoint => {
            let path = config.opponent.checkpoint.clone().expect("validated");
            let checkpoint: Checkpoint<F> = Checkpoint::load(Path::new(&path))?;
            let agent = PolicyAgent::new(
                checkpoint.policy.snapshot(),
                F::from_f64_lossy(config.policy.temperature),
                MaskMode::LegalOnly,
                config.opponent.frozen_action,
            )
            .labeled(format!("frozen:{}", checkpoint.id()));
            Ok(Some(Box::new(agent)))
        }
    }
}

fn reference_agent<F: Scalar>(
    reference: &ReferenceOpponent,
) -> Result<Box<dyn Agent<F>>, RuntimeError> {
    match reference {
        ReferenceOpponent::Random => Ok(Box::new(RandomAgent)),
        ReferenceOpponent::Scripted(name) => Ok(Box::new(ScriptedAgent::new(name.clone()))),
        ReferenceOpponent::Checkpoint(path) => {
            let checkpoint: Checkpoint<F> = Checkpoint::load(Path::new(path))?;
            Ok(Box::new(
                PolicyAgent::new(checkpoint.policy.snapshot(), F::one(), MaskMode::LegalOnly, EvalAction::Greedy)
                    .labeled(format!("checkpoint:{}", checkpoint.id())),
            ))
        }
    }
}

fn checkpoint_path(out_dir: &Path, step: u64) -> PathBuf {
    out_dir.join("checkpoints").join(format!("step_{step:05}.json"))
}

/// Run the full training loop.
pub fn train<F: Scalar>(
    config: &RunConfig,
    options: &TrainOptions,
    stop: Option<&AtomicBool>,
) -> Result<TrainOutput, RuntimeError> {
    let out_dir = &options.out_dir;
    std::fs::create_dir_all(out_dir.join("checkpoints"))?;
    if config.run.trajectory_sample_rate > 0.0 {
        std::fs::create_dir_all(out_dir.join("trajectories"))?;
    }
    let resolved = config.to_toml();
    std::fs::write(out_dir.join("config.toml"), &resolved)?;
    let config_hash = config_sha256(&resolved);

    let mut log = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_dir.join("run.log"))?;

    let games: Vec<GameId> = config.games.iter().map(|g| g.id).collect();
    let mut policy: PolicyParams<F> = PolicyParams::new();
    let mut baselines: BaselineTable<F> = BaselineTable::new(F::from_f64_lossy(self::rae_alpha(config)));
    let mut optimizer: OptimizerState<F> = OptimizerState::new();
    let mut start_step = 0u64;

    if let Some(resume_path) = &options.resume_from {
        let checkpoint: Checkpoint<F> = Checkpoint::load(resume_path)?;
        if checkpoint.config_sha256 != config_hash {
            writeln!(
                log,
                "warning: resuming from a checkpoint with a different config hash ({} vs {})",
                checkpoint.config_sha256, config_hash
            )?;
        }
        start_step = checkpoint.step;
        policy = checkpoint.policy;
        baselines = checkpoint.baselines;
        optimizer = checkpoint.optimizer;
        writeln!(log, "resumed at step {start_step} from {}", resume_path.display())?;
    }

    let schema = MetricsSchema::new(config);
    let metrics_file = std::fs::File::create(out_dir.join("metrics.csv"))?;
    let mut metrics = MetricsWriter::new(schema, std::io::BufWriter::new(metrics_file))?;
    let mut rows = Vec::new();
    let mut lag_winrates = Vec::new();

    let save_checkpoint = |step: u64,
                           policy: &PolicyParams<F>,
                           baselines: &BaselineTable<F>,
                           optimizer: &OptimizerState<F>|
     -> Result<PathBuf, RuntimeError> {
        let path = checkpoint_path(out_dir, step);
        Checkpoint {
            step,
            config_sha256: config_hash.clone(),
            games: games.clone(),
            policy: policy.clone(),
            baselines: baselines.clone(),
            optimizer: optimizer.clone(),
        }
        .save(&path)?;
        Ok(path)
    };

    if start_step == 0 {
        save_checkpoint(0, &policy, &baselines, &optimizer)?;
    }

    let opponent = build_opponent::<F>(config)?;
    let learner_cfg = config.learner_config::<F>();
    let references: Vec<ReferenceOpponent> =
        config.eval.reference.iter().map(|r| parse_reference(r).expect("validated")).collect();
    let mut consecutive_aborts = 0u32;
    let mut final_step = start_step;

    for step in start_step + 1..=config.run.total_steps {
        if stop.map_or(false, |s| s.load(Ordering::Relaxed)) {
            writeln!(log, "stop signal received at step {step}")?;
            break;
        }
        let started = Instant::now();
        let step_seed = seeds::derive_labeled(config.run.seed, "step", step);
        let snapshot = policy.snapshot();
        let batch = collect_batch(&snapshot, config, step_seed, opponent.as_deref())?;

        let advantages: Vec<[F; 2]> = if config.rae.enabled {
            let items: Vec<(GameId, [F; 2])> = batch.iter().map(|t| (t.game, t.returns())).collect();
            baselines
                .process_batch(&items)
                .into_iter()
                .map(|records| [records[0].advantage, records[1].advantage])
                .collect()
        } else {
            learner::vanilla_advantages(&batch)
        };

        let report = match learner::proximal_step(&mut policy, &mut optimizer, &batch, &advantages, &learner_cfg) {
            Ok(report) => {
                consecutive_aborts = 0;
                report
            }
            Err(LearnerError::NonFiniteGradient) => {
                consecutive_aborts += 1;
                writeln!(log, "step {step}: non-finite gradient, step skipped ({consecutive_aborts} consecutive)")?;
                if consecutive_aborts >= MAX_CONSECUTIVE_ABORTS {
                    return Err(RuntimeError::TrainingAborted(consecutive_aborts));
                }
                continue;
            }
            Err(other) => return Err(other.into()),
        };

        let policy_turns: usize = batch.iter().map(|t| t.turns.iter().filter(|u| u.logprob.is_some()).count()).sum();
        let invalid_turns: usize = batch
            .iter()
            .map(|t| t.turns.iter().filter(|u| u.logprob.is_some() && !u.legal).count())
            .sum();
        let mean_length: f64 =
            batch.iter().map(|t| t.turns.len() as f64).sum::<f64>() / batch.len().max(1) as f64;

        let mut row = MetricsRow {
            step,
            grad_norm: report.gradient_norm_pre_clip.to_f64_lossy(),
            clipped: report.clipped,
            clip_fraction: report.ratio_clip_fraction.to_f64_lossy(),
            entropy: report.mean_entropy.to_f64_lossy(),
            invalid_move_freq: if policy_turns == 0 {
                0.0
            } else {
                invalid_turns as f64 / policy_turns as f64
            },
            mean_game_length: mean_length,
            baselines: games
                .iter()
                .flat_map(|&g| {
                    [Role::P0, Role::P1]
                        .map(|r| ((g, r), baselines.baseline(g, r).to_f64_lossy()))
                })
                .collect(),
            mean_advantage: report
                .mean_advantage
                .iter()
                .map(|(&k, &v)| (k, v.to_f64_lossy()))
                .collect(),
            eval: Default::default(),
        };

        if step % config.run.eval_every == 0 {
            let eval_agent = PolicyAgent::new(
                policy.snapshot(),
                F::from_f64_lossy(config.policy.temperature),
                MaskMode::LegalOnly,
                config.policy.eval_action,
            );
            for &game in &games {
                let g = column_game_name(game);
                for (ref_index, reference) in references.iter().enumerate() {
                    let agent = reference_agent::<F>(reference)?;
                    let seed = seeds::derive_labeled(step_seed, "eval-ref", ref_index as u64);
                    let report: MatchReport = eval::play_match(
                        &eval_agent,
                        agent.as_ref(),
                        game,
                        config.run.eval_games,
                        seed,
                        &config.env,
                    )?;
                    let r: String = config.eval.reference[ref_index]
                        .chars()
                        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                        .collect();
                    row.eval.insert(format!("win_{g}_vs_{r}"), report.win_rate);
                    row.eval.insert(format!("nonloss_{g}_vs_{r}"), report.non_loss_rate);
                }
                if config.eval.lag_eval && step >= config.eval.lag_steps {
                    let lag_step = step - config.eval.lag_steps;
                    let path = checkpoint_path(out_dir, lag_step);
                    if path.exists() {
                        let lagged: Checkpoint<F> = Checkpoint::load(&path)?;
                        let lag_agent = PolicyAgent::new(
                            lagged.policy.snapshot(),
                            F::from_f64_lossy(config.policy.temperature),
                            MaskMode::LegalOnly,
                            config.policy.eval_action,
                        )
                        .labeled(format!("lag:{}", lagged.id()));
                        let seed = seeds::derive_labeled(step_seed, "eval-lag", 0);
                        let report = eval::play_match(
                            &eval_agent,
                            &lag_agent,
                            game,
                            config.run.eval_games,
                            seed,
                            &config.env,
                        )?;
                        row.eval.insert(format!("windec_{g}_vs_lag"), report.decisive_win_rate);
                        lag_winrates.push((step, game, report.decisive_win_rate));
                    }
                }
            }
            if !options.quiet {
                println!(
                    "step {step}: grad_norm {:.6} entropy {:.4} invalid {:.4}",
                    row.grad_norm, row.entropy, row.invalid_move_freq
                );
            }
        }

        if config.run.trajectory_sample_rate > 0.0 {
            let mut lines = Vec::new();
            for (index, traj) in batch.iter().enumerate() {
                let h = seeds::derive_labeled(step_seed, "traj-log", index as u64);
                if (h as f64) / (u64::MAX as f64) < config.run.trajectory_sample_rate {
                    lines.push(traj.to_jsonl());
                }
            }
            if !lines.is_empty() {
                let path = out_dir.join("trajectories").join(format!("step_{step:05}.jsonl"));
                std::fs::write(path, lines.join("\n") + "\n")?;
            }
        }

        metrics.write_row(&row)?;
        rows.push(row);

        if step % config.run.checkpoint_every == 0 || step == config.run.total_steps {
            save_checkpoint(step, &policy, &baselines, &optimizer)?;
        }
        final_step = step;
        writeln!(
            log,
            "step {step} done in {:.1} ms (batch {}, policy keys {})",
            started.elapsed().as_secs_f64() * 1e3,
            batch.len(),
            policy.len(),
        )?;
    }

    let last_checkpoint = if checkpoint_path(out_dir, final_step).exists() {
        checkpoint_path(out_dir, final_step)
    } else {
        save_checkpoint(final_step, &policy, &baselines, &optimizer)?
    };

    Ok(TrainOutput { final_step, final_checkpoint: last_checkpoint, metrics_rows: rows, lag_winrates })
}

fn rae_alpha(config: &RunConfig) -> f64 {
    config.rae.alpha
}
