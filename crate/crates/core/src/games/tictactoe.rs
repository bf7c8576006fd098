//! TicTacToe: 3×3 grid, player 0 is X and moves first, three in a line wins.
//!
//! Alphabet: cell indices `"0"`..`"8"` in row-major order. Observation key:
//! the nine cells as one row-major string over `{'.', 'X', 'O'}`, e.g.
//! `"X...O...."`-style; full state, perfect information.

use crate::env::{EnvError, Role};

pub const ALPHABET_SIZE: usize = 9;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cell {
    Empty,
    X,
    O,
}

#[derive(Clone, Debug)]
pub struct TicTacToeState {
    pub cells: [Cell; 9],
}

/// Result of scanning a board for a winner.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Player0,
    Player1,
    Draw,
    Ongoing,
}

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

pub fn symbol(index: u16) -> String {
    index.to_string()
}

pub fn parse_symbol(symbol: &str) -> Option<u16> {
    symbol.parse().ok()
}

pub fn reset() -> TicTacToeState {
    TicTacToeState { cells: [Cell::Empty; 9] }
}

pub fn legal(state: &TicTacToeState) -> Vec<u16> {
    (0..9u16).filter(|&i| state.cells[i as usize] == Cell::Empty).collect()
}

pub fn apply(state: &mut TicTacToeState, active: Role, index: u16) -> Option<i8> {
    debug_assert_eq!(state.cells[index as usize], Cell::Empty);
    state.cells[index as usize] = if active == Role::P0 { Cell::X } else { Cell::O };
    match winner(&state.cells).expect("state reached by legal play") {
        Verdict::Player0 => Some(1),
        Verdict::Player1 => Some(-1),
        Verdict::Draw => Some(0),
        Verdict::Ongoing => None,
    }
}

pub fn observe(state: &TicTacToeState) -> String {
    cells_string(&state.cells)
}

pub fn cells_string(cells: &[Cell; 9]) -> String {
    cells
        .iter()
        .map(|c| match c {
            Cell::Empty => '.',
            Cell::X => 'X',
            Cell::O => 'O',
        })
        .collect()
}

pub fn cells_from_string(s: &str) -> Option<[Cell; 9]> {
    if s.len() != 9 {
        return None;
    }
    let mut cells = [Cell::Empty; 9];
    for (i, ch) in s.chars().enumerate() {
        cells[i] = match ch {
            '.' => Cell::Empty,
            'X' => Cell::X,
            'O' => Cell::O,
            _ => return None,
        };
    }
    Some(cells)
}

fn has_line(cells: &[Cell; 9], mark: Cell) -> bool {
    LINES.iter().any(|line| line.iter().all(|&i| cells[i] == mark))
}

/// Winner scan for a legally reachable board.
pub fn winner(cells: &[Cell; 9]) -> Result<Verdict, EnvError> {
    let x_line = has_line(cells, Cell::X);
    let o_line = has_line(cells, Cell::O);
    if x_line && o_line {
        return Err(EnvError::IllegalPosition("both players have winning lines".to_string()));
    }
    if x_line {
        Ok(Verdict::Player0)
    } else if o_line {
        Ok(Verdict::Player1)
    } else if cells.iter().all(|&c| c != Cell::Empty) {
        Ok(Verdict::Draw)
    } else {
        Ok(Verdict::Ongoing)
    }
}

/// Check mark-count parity for positions supplied from outside regular play.
pub fn validate_counts(cells: &[Cell; 9]) -> Result<(), EnvError> {
    let x = cells.iter().filter(|&&c| c == Cell::X).count() as i32;
    let o = cells.iter().filter(|&&c| c == Cell::O).count() as i32;
    if !(x - o == 0 || x - o == 1) {
        return Err(EnvError::IllegalPosition(format!("mark counts X={x} O={o}")));
    }
    Ok(())
}
