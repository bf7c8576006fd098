//! Connect Four: drop discs into a 6×7 grid with gravity; four in a line
//! (horizontal, vertical or diagonal) wins, a full board draws.
//!
//! Alphabet: column indices `"0"`..`"6"`. A column is legal while its top
//! cell is empty. Observation key: 42 cells row-major from the top row, over
//! `{'.', 'X', 'O'}` with player 0 as X.

use crate::env::Role;

pub const ROWS: usize = 6;
pub const COLS: usize = 7;
pub const ALPHABET_SIZE: usize = COLS;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cell {
    Empty,
    X,
    O,
}

#[derive(Clone, Debug)]
pub struct ConnectFourState {
    /// `grid[row][col]`, row 0 at the top.
    pub grid: [[Cell; COLS]; ROWS],
}

pub fn symbol(index: u16) -> String {
    index.to_string()
}

pub fn parse_symbol(symbol: &str) -> Option<u16> {
    symbol.parse().ok()
}

pub fn reset() -> ConnectFourState {
    ConnectFourState { grid: [[Cell::Empty; COLS]; ROWS] }
}

pub fn legal(state: &ConnectFourState) -> Vec<u16> {
    (0..COLS as u16).filter(|&c| state.grid[0][c as usize] == Cell::Empty).collect()
}

pub fn apply(state: &mut ConnectFourState, active: Role, index: u16) -> Option<i8> {
    let col = index as usize;
    let row = (0..ROWS).rev().find(|&r| state.grid[r][col] == Cell::Empty).expect("legal column");
    let mark = if active == Role::P0 { Cell::X } else { Cell::O };
    state.grid[row][col] = mark;
    if wins_at(&state.grid, row, col) {
        return Some(if active == Role::P0 { 1 } else { -1 });
    }
    if state.grid[0].iter().all(|&c| c != Cell::Empty) {
        return Some(0);
    }
    None
}

/// Whether the disc at `(row, col)` completes a four-in-a-row.
fn wins_at(grid: &[[Cell; COLS]; ROWS], row: usize, col: usize) -> bool {
    let mark = grid[row][col];
    for (dr, dc) in [(0i32, 1i32), (1, 0), (1, 1), (1, -1)] {
        let mut run = 1;
        for sign in [1i32, -1] {
            let (mut r, mut c) = (row as i32 + sign * dr, col as i32 + sign * dc);
            while (0..ROWS as i32).contains(&r)
                && (0..COLS as i32).contains(&c)
                && grid[r as usize][c as usize] == mark
            {
                run += 1;
                r += sign * dr;
                c += sign * dc;
            }
        }
        if run >= 4 {
            return true;
        }
    }
    false
}

/// Full-board line scan; the oracle-facing counterpart of [`wins_at`].
pub fn scan_winner(grid: &[[Cell; COLS]; ROWS]) -> Option<Cell> {
    for row in 0..ROWS {
        for col in 0..COLS {
            let mark = grid[row][col];
            if mark == Cell::Empty {
                continue;
            }
            for (dr, dc) in [(0usize, 1usize), (1, 0), (1, 1)] {
                if row + 3 * dr < ROWS && col + 3 * dc < COLS
                    && (1..4).all(|i| grid[row + i * dr][col + i * dc] == mark)
                {
                    return Some(mark);
                }
            }
            // Anti-diagonal.
            if row + 3 < ROWS && col >= 3 && (1..4).all(|i| grid[row + i][col - i] == mark) {
                return Some(mark);
            }
        }
    }
    None
}

pub fn observe(state: &ConnectFourState) -> String {
    state
        .grid
        .iter()
        .flat_map(|row| row.iter())
        .map(|c| match c {
            Cell::Empty => '.',
            Cell::X => 'X',
            Cell::O => 'O',
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discs_fall_to_the_bottom() {
        let mut state = reset();
        apply(&mut state, Role::P0, 3);
        apply(&mut state, Role::P1, 3);
        assert_eq!(state.grid[ROWS - 1][3], Cell::X);
        assert_eq!(state.grid[ROWS - 2][3], Cell::O);
    }

    #[test]
    fn full_column_becomes_illegal() {
        let mut state = reset();
        for turn in 0..ROWS as u32 {
            apply(&mut state, Role::of_turn(turn), 2);
        }
        let legal = legal(&state);
        assert_eq!(legal.len(), 6);
        assert!(!legal.contains(&2));
    }

    #[test]
    fn vertical_four_wins() {
        let mut state = reset();
        for _ in 0..3 {
            apply(&mut state, Role::P0, 0);
            apply(&mut state, Role::P1, 1);
        }
        assert_eq!(apply(&mut state, Role::P0, 0), Some(1));
    }

    #[test]
    fn diagonal_four_wins() {
        let mut state = reset();
        // Build a / diagonal for X at columns 0-3.
        let moves = [(0u16, 0), (1, 1), (1, 0), (2, 1), (2, 0), (3, 1), (2, 0), (3, 1), (3, 0), (6, 1), (3, 0)];
        let mut outcome = None;
        for (i, &(col, _)) in moves.iter().enumerate() {
            outcome = apply(&mut state, Role::of_turn(i as u32), col);
        }
        assert_eq!(outcome, Some(1));
    }

    #[test]
    fn scan_agrees_with_incremental_detection() {
        let mut state = reset();
        for _ in 0..3 {
            apply(&mut state, Role::P0, 5);
            apply(&mut state, Role::P1, 6);
        }
        assert_eq!(scan_winner(&state.grid), None);
        apply(&mut state, Role::P0, 5);
        assert_eq!(scan_winner(&state.grid), Some(Cell::X));
    }
}
