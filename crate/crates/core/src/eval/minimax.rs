//! Exact TicTacToe solver.
//!
//! Full-tree minimax with memoization on the canonical form of the board
//! (minimum encoding over the eight square symmetries). Values are from
//! player 0's perspective: +1 X wins, 0 draw, -1 O wins under optimal play.

use std::collections::HashMap;

use crate::env::EnvError;
use crate::games::tictactoe::{validate_counts, winner, Cell, Verdict};

/// Memoized solver; reusable across queries.
#[derive(Debug, Default)]
pub struct Solver {
    memo: HashMap<u32, i8>,
}

impl Solver {
    pub fn new() -> Solver {
        Solver { memo: HashMap::new() }
    }

    /// Game-theoretic value and the set of value-preserving moves for the
    /// side to move. Terminal positions return their outcome and no moves.
    pub fn solve(&mut self, cells: &[Cell; 9]) -> Result<(i8, Vec<u16>), EnvError> {
        validate_counts(cells)?;
        let verdict = winner(cells)?;
        match verdict {
            Verdict::Player0 => return Ok((1, Vec::new())),
            Verdict::Player1 => return Ok((-1, Vec::new())),
            Verdict::Draw => return Ok((0, Vec::new())),
            Verdict::Ongoing => {}
        }
        let to_move = side_to_move(cells);
        let value = self.value(cells);
        let mut optimal = Vec::new();
        for cell in 0..9u16 {
            if cells[cell as usize] != Cell::Empty {
                continue;
            }
            let mut child = *cells;
            child[cell as usize] = to_move;
            if self.value(&child) == value {
                optimal.push(cell);
            }
        }
        Ok((value, optimal))
    }

    fn value(&mut self, cells: &[Cell; 9]) -> i8 {
        let canonical = canonical_code(cells);
        if let Some(&v) = self.memo.get(&canonical) {
            return v;
        }
        let value = match winner(cells).expect("reachable position") {
            Verdict::Player0 => 1,
            Verdict::Player1 => -1,
            Verdict::Draw => 0,
            Verdict::Ongoing => {
                let to_move = side_to_move(cells);
                let mut best: i8 = if to_move == Cell::X { -2 } else { 2 };
                for cell in 0..9 {
                    if cells[cell] != Cell::Empty {
                        continue;
                    }
                    let mut child = *cells;
                    child[cell] = to_move;
                    let v = self.value(&child);
                    if to_move == Cell::X {
                        best = best.max(v);
                    } else {
                        best = best.min(v);
                    }
                }
                best
            }
        };
        self.memo.insert(canonical, value);
        value
    }
}

fn side_to_move(cells: &[Cell; 9]) -> Cell {
    let x = cells.iter().filter(|&&c| c == Cell::X).count();
    let o = cells.iter().filter(|&&c| c == Cell::O).count();
    if x == o {
        Cell::X
    } else {
        Cell::O
    }
}

/// The 8 square symmetries as cell permutations.
const SYMMETRIES: [[usize; 9]; 8] = [
    [0, 1, 2, 3, 4, 5, 6, 7, 8],
    [2, 5, 8, 1, 4, 7, 0, 3, 6],
    [8, 7, 6, 5, 4, 3, 2, 1, 0],
    [6, 3, 0, 7, 4, 1, 8, 5, 2],
    [2, 1, 0, 5, 4, 3, 8, 7, 6],
    [6, 7, 8, 3, 4, 5, 0, 1, 2],
    [0, 3, 6, 1, 4, 7, 2, 5, 8],
    [8, 5, 2, 7, 4, 1, 6, 3, 0],
];

fn encode(cells: &[Cell; 9], map: &[usize; 9]) -> u32 {
    let mut code = 0u32;
    for &i in map {
        code = code * 3
            + match cells[i] {
                Cell::Empty => 0,
                Cell::X => 1,
                Cell::O => 2,
            };
    }
    code
}

fn canonical_code(cells: &[Cell; 9]) -> u32 {
    SYMMETRIES.iter().map(|map| encode(cells, map)).min().expect("eight symmetries")
}

/// Solve a single position with a fresh memo.
pub fn tictactoe_minimax(cells: &[Cell; 9]) -> Result<(i8, Vec<u16>), EnvError> {
    Solver::new().solve(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::tictactoe::cells_from_string;

    fn board(s: &str) -> [Cell; 9] {
        cells_from_string(s).unwrap()
    }

    #[test]
    fn empty_board_is_a_draw() {
        let (value, optimal) = tictactoe_minimax(&board(".........")).unwrap();
        assert_eq!(value, 0);
        assert!(!optimal.is_empty());
    }

    #[test]
    fn immediate_win_is_found() {
        // X to move with two in the top row: value +1 and 2 is optimal.
        let (value, optimal) = tictactoe_minimax(&board("XX.OO....")).unwrap();
        assert_eq!(value, 1);
        assert!(optimal.contains(&2));
    }

    #[test]
    fn immediate_win_for_o() {
        let (value, optimal) = tictactoe_minimax(&board("XX..OO.X.")).unwrap();
        assert_eq!(value, -1);
        assert!(optimal.contains(&3));
    }

    #[test]
    fn illegal_positions_are_rejected() {
        assert!(tictactoe_minimax(&board("XXX..XOO.")).is_err());
        assert!(tictactoe_minimax(&board("OO.......")).is_err());
    }

    #[test]
    fn symmetry_preserves_value() {
        let a = tictactoe_minimax(&board("X...O....")).unwrap().0;
        let b = tictactoe_minimax(&board("..X.O....")).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn terminal_position_reports_outcome() {
        let (value, optimal) = tictactoe_minimax(&board("XXXOO....")).unwrap();
        assert_eq!(value, 1);
        assert!(optimal.is_empty());
    }
}
