//! Comparison suites: training arms that share step seeds so differences
//! are attributable to the arm.
//!
//! `rq2` compares self-play collection against fixed opponents (uniform
//! random, scripted heuristic, frozen checkpoint of the self-play arm's
//! midpoint). `rq4` compares role-conditioned baselines against vanilla
//! REINFORCE and reports gradient-norm dispersion per arm.

use std::path::Path;

use serde::Serialize;

use crate::config::{OpponentKind, RunConfig};
use crate::env::GameId;
use crate::metrics::MetricsRow;
use crate::runtime::{train, RuntimeError, TrainOptions, TrainOutput};
use crate::scalar::Scalar;

/// Default script used for a game's scripted arm.
pub fn default_script(game: GameId) -> Option<&'static str> {
    match game {
        GameId::TicTacToe => Some("win-block-else-random"),
        GameId::PigDice => Some("hold-at-20"),
        GameId::KuhnPoker => Some("nash"),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArmSummary {
    pub name: String,
    pub steps: Vec<u64>,
    pub grad_norm: Vec<f64>,
    pub entropy: Vec<f64>,
    pub invalid_move_freq: Vec<f64>,
    pub mean_game_length: Vec<f64>,
    /// Win-rate columns captured at eval steps, in metrics column order.
    pub eval_columns: Vec<(String, Vec<(u64, f64)>)>,
}

fn summarize(name: &str, rows: &[MetricsRow]) -> ArmSummary {
    let mut eval_columns: std::collections::BTreeMap<String, Vec<(u64, f64)>> = Default::default();
    for row in rows {
        for (column, value) in &row.eval {
            eval_columns.entry(column.clone()).or_default().push((row.step, *value));
        }
    }
    ArmSummary {
        name: name.to_string(),
        steps: rows.iter().map(|r| r.step).collect(),
        grad_norm: rows.iter().map(|r| r.grad_norm).collect(),
        entropy: rows.iter().map(|r| r.entropy).collect(),
        invalid_move_freq: rows.iter().map(|r| r.invalid_move_freq).collect(),
        mean_game_length: rows.iter().map(|r| r.mean_game_length).collect(),
        eval_columns: eval_columns.into_iter().collect(),
    }
}

/// Coefficient of variation (sd / mean) of a series.
pub fn coefficient_of_variation(series: &[f64]) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Side-by-side CSV over the arms' shared step axis.
pub fn arms_csv(arms: &[ArmSummary]) -> String {
    let mut header = vec!["step".to_string()];
    for arm in arms {
        header.push(format!("{}_grad_norm", arm.name));
        header.push(format!("{}_entropy", arm.name));
        header.push(format!("{}_invalid", arm.name));
        header.push(format!("{}_game_length", arm.name));
    }
    let mut out = header.join(",") + "\n";
    let steps = &arms[0].steps;
    for (i, step) in steps.iter().enumerate() {
        let mut cells = vec![step.to_string()];
        for arm in arms {
            let lookup = arm.steps.iter().position(|s| s == step);
            match lookup {
                Some(j) => {
                    cells.push(arm.grad_norm[j].to_string());
                    cells.push(arm.entropy[j].to_string());
                    cells.push(arm.invalid_move_freq[j].to_string());
                    cells.push(arm.mean_game_length[j].to_string());
                }
                None => cells.extend([String::new(), String::new(), String::new(), String::new()]),
            }
            let _ = i;
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Rq4Report {
    pub arm_on: ArmSummary,
    pub arm_off: ArmSummary,
    /// Coefficient of variation of the gradient-norm series per arm.
    pub grad_norm_cv_on: f64,
    pub grad_norm_cv_off: f64,
    /// Mean baseline magnitude at the end per arm (always 0 for off).
    pub final_entropy_on: f64,
    pub final_entropy_off: f64,
}

/// Run the baseline ablation: identical configs and seeds, baselines on
/// versus off. Returns the per-arm series and dispersion statistics; also
/// writes `rq4.csv` plus each arm's run directory under `out_dir`.
pub fn run_rq4<F: Scalar>(base: &RunConfig, out_dir: &Path) -> Result<Rq4Report, RuntimeError> {
    let mut on = base.clone();
    on.rae.enabled = true;
    let mut off = base.clone();
    off.rae.enabled = false;

    let out_on = train::<F>(&on, &TrainOptions { out_dir: out_dir.join("rae_on"), resume_from: None, quiet: true }, None)?;
    let out_off = train::<F>(&off, &TrainOptions { out_dir: out_dir.join("rae_off"), resume_from: None, quiet: true }, None)?;

    let arm_on = summarize("rae_on", &out_on.metrics_rows);
    let arm_off = summarize("rae_off", &out_off.metrics_rows);
    let report = Rq4Report {
        grad_norm_cv_on: coefficient_of_variation(&arm_on.grad_norm),
        grad_norm_cv_off: coefficient_of_variation(&arm_off.grad_norm),
        final_entropy_on: *arm_on.entropy.last().unwrap_or(&0.0),
        final_entropy_off: *arm_off.entropy.last().unwrap_or(&0.0),
        arm_on,
        arm_off,
    };
    std::fs::write(out_dir.join("rq4.csv"), arms_csv(&[report.arm_on.clone(), report.arm_off.clone()]))?;
    std::fs::write(
        out_dir.join("rq4.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct Rq2Report {
    pub arms: Vec<ArmSummary>,
}

/// Run the opponent-type comparison with shared step seeds.
///
/// Arms: self-play, uniform-random opponent, scripted opponent (the game's
/// default script), and a frozen checkpoint of the self-play arm's midpoint.
pub fn run_rq2<F: Scalar>(base: &RunConfig, out_dir: &Path) -> Result<Rq2Report, RuntimeError> {
    let mut selfplay = base.clone();
    selfplay.opponent.kind = OpponentKind::SelfPlayShared;
    let selfplay_out: TrainOutput =
        train::<F>(&selfplay, &TrainOptions { out_dir: out_dir.join("self_play"), resume_from: None, quiet: true }, None)?;

    let mut random = base.clone();
    random.opponent.kind = OpponentKind::UniformRandomLegal;
    let random_out = train::<F>(&random, &TrainOptions { out_dir: out_dir.join("random"), resume_from: None, quiet: true }, None)?;

    let mut arms = vec![
        summarize("self_play", &selfplay_out.metrics_rows),
        summarize("random", &random_out.metrics_rows),
    ];

    let primary_game = base.games[0].id;
    if let Some(script) = base.opponent.script.clone().or_else(|| default_script(primary_game).map(String::from)) {
        let mut scripted = base.clone();
        scripted.opponent.kind = OpponentKind::Scripted;
        scripted.opponent.script = Some(script);
        let scripted_out = train::<F>(&scripted, &TrainOptions { out_dir: out_dir.join("scripted"), resume_from: None, quiet: true }, None)?;
        arms.push(summarize("scripted", &scripted_out.metrics_rows));
    }

    // Frozen arm: train against the self-play arm's midpoint checkpoint.
    let mid_step = (base.run.total_steps / 2 / base.run.checkpoint_every.max(1))
        * base.run.checkpoint_every.max(1);
    let frozen_path = out_dir.join("self_play").join("checkpoints").join(format!("step_{mid_step:05}.json"));
    if frozen_path.exists() {
        let mut frozen = base.clone();
        frozen.opponent.kind = OpponentKind::FrozenCheckpoint;
        frozen.opponent.checkpoint = Some(frozen_path.display().to_string());
        let frozen_out = train::<F>(&frozen, &TrainOptions { out_dir: out_dir.join("frozen"), resume_from: None, quiet: true }, None)?;
        arms.push(summarize("frozen", &frozen_out.metrics_rows));
    }

    std::fs::write(out_dir.join("rq2.csv"), arms_csv(&arms))?;
    let report = Rq2Report { arms };
    std::fs::write(
        out_dir.join("rq2.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cv_of_constant_series_is_zero() {
        assert_eq!(coefficient_of_variation(&[2.0, 2.0, 2.0]), 0.0);
    }

    #[test]
    fn cv_grows_with_dispersion() {
        let tight = coefficient_of_variation(&[1.0, 1.1, 0.9]);
        let wide = coefficient_of_variation(&[1.0, 2.0, 0.0]);
        assert!(wide > tight);
    }

    #[test]
    fn default_scripts_cover_the_training_games() {
        assert!(default_script(GameId::KuhnPoker).is_some());
        assert!(default_script(GameId::TicTacToe).is_some());
        assert!(default_script(GameId::LiarsDice).is_none());
    }
}
