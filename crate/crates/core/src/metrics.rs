//! Per-step training telemetry and its CSV format.
//!
//! The column set is fixed by the run configuration (one baseline and mean-
//! advantage column per configured (game, role), one win-rate column per
//! (game, reference opponent), plus lagged self-play columns), so files from
//! identical configs are byte-comparable. Evaluation columns are empty on
//! steps where no evaluation ran. Wall-clock timings go to the run log, not
//! the CSV, to keep the file bit-reproducible.

use std::collections::BTreeMap;
use std::io::Write;

use crate::config::RunConfig;
use crate::env::{GameId, Role};

/// Sanitized game name usable inside a CSV header.
pub fn column_game_name(game: GameId) -> String {
    game.name()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect::<String>()
        .trim_matches('_')
        .replace("__", "_")
}

/// One row of metrics; evaluation fields appear only on eval steps.
#[derive(Clone, Debug, Default)]
pub struct MetricsRow {
    pub step: u64,
    pub grad_norm: f64,
    pub clipped: bool,
    pub clip_fraction: f64,
    pub entropy: f64,
    pub invalid_move_freq: f64,
    pub mean_game_length: f64,
    pub baselines: BTreeMap<(GameId, Role), f64>,
    pub mean_advantage: BTreeMap<(GameId, Role), f64>,
    /// Keyed by full column name, e.g. `win_KuhnPoker_vs_random`.
    pub eval: BTreeMap<String, f64>,
}

/// Builds the header for a config and formats rows against it.
#[derive(Clone, Debug)]
pub struct MetricsSchema {
    columns: Vec<String>,
    games: Vec<GameId>,
}

impl MetricsSchema {
    pub fn new(config: &RunConfig) -> MetricsSchema {
        let games: Vec<GameId> = config.games.iter().map(|g| g.id).collect();
        let mut columns = vec![
            "step".to_string(),
            "grad_norm".to_string(),
            "clipped".to_string(),
            "clip_fraction".to_string(),
            "entropy".to_string(),
            "invalid_move_freq".to_string(),
            "mean_game_length".to_string(),
        ];
        for &game in &games {
            let g = column_game_name(game);
            for role in 0..2 {
                columns.push(format!("baseline_{g}_{role}"));
            }
            for role in 0..2 {
                columns.push(format!("mean_adv_{g}_{role}"));
            }
        }
        for &game in &games {
            let g = column_game_name(game);
            for reference in &config.eval.reference {
                let r: String = reference.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
                columns.push(format!("win_{g}_vs_{r}"));
                columns.push(format!("nonloss_{g}_vs_{r}"));
            }
            if config.eval.lag_eval {
                columns.push(format!("windec_{g}_vs_lag"));
            }
        }
        MetricsSchema { columns, games }
    }

    pub fn header(&self) -> String {
        self.columns.join(",")
    }

    pub fn format_row(&self, row: &MetricsRow) -> String {
        let mut cells = vec![
            row.step.to_string(),
            row.grad_norm.to_string(),
            (row.clipped as u8).to_string(),
            row.clip_fraction.to_string(),
            row.entropy.to_string(),
            row.invalid_move_freq.to_string(),
            row.mean_game_length.to_string(),
        ];
        for &game in &self.games {
            for role in [Role::P0, Role::P1] {
                cells.push(row.baselines.get(&(game, role)).map_or_else(|| "0".to_string(), |v| v.to_string()));
            }
            for role in [Role::P0, Role::P1] {
                cells.push(row.mean_advantage.get(&(game, role)).map_or_else(String::new, |v| v.to_string()));
            }
        }
        for column in &self.columns[7 + 4 * self.games.len()..] {
            cells.push(row.eval.get(column).map_or_else(String::new, |v| v.to_string()));
        }
        cells.join(",")
    }
}

/// Streaming CSV writer; flushes per row so interrupted runs keep their rows.
pub struct MetricsWriter<W: Write> {
    schema: MetricsSchema,
    out: W,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(schema: MetricsSchema, mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{}", schema.header())?;
        Ok(MetricsWriter { schema, out })
    }

    /// Resume an existing file without rewriting the header.
    pub fn append(schema: MetricsSchema, out: W) -> Self {
        MetricsWriter { schema, out }
    }

    pub fn write_row(&mut self, row: &MetricsRow) -> std::io::Result<()> {
        writeln!(self.out, "{}", self.schema.format_row(row))?;
        self.out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_stable_for_a_config() {
        let config = RunConfig::default();
        let schema = MetricsSchema::new(&config);
        assert_eq!(schema.header(), MetricsSchema::new(&config).header());
        assert!(schema.header().starts_with("step,grad_norm,clipped,"));
        assert!(schema.header().contains("baseline_KuhnPoker_0"));
        assert!(schema.header().contains("win_KuhnPoker_vs_random"));
        assert!(schema.header().contains("windec_KuhnPoker_vs_lag"));
    }

    #[test]
    fn eval_cells_are_empty_on_non_eval_steps() {
        let config = RunConfig::default();
        let schema = MetricsSchema::new(&config);
        let row = MetricsRow { step: 3, ..MetricsRow::default() };
        let line = schema.format_row(&row);
        assert!(line.ends_with(",,,"));
        assert_eq!(line.split(',').count(), schema.header().split(',').count());
    }

    #[test]
    fn toy_names_sanitize() {
        let toy = GameId::Toy(crate::env::ToySpec { horizon: 2, legal: 1, alphabet: 4 });
        assert_eq!(column_game_name(toy), "Toy_h_2_k_1_m_4");
    }
}
