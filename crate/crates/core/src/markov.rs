//! One-step transition matrix of the game chain.
//!
//! Entries are stored as integer sixths, so row sums and zero blocks are
//! checked exactly; [`TransitionMatrix::prob`] converts at the boundary.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::board::{Board, Cell, CELLS, FINISH};

/// Faces on the die.
pub const FACES: u8 = 6;

#[derive(Debug, Error)]
pub enum MarkovError {
    #[error("invalid state permutation: {0}")]
    InvalidPermutation(String),
    #[error("entry ({row},{col}) = {value} is not a probability")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// How rows of entrance cells are filled in. A piece never rests on an
/// entrance, so these rows never affect gameplay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntranceRows {
    /// Deterministic jump to the component's resolved exit.
    #[default]
    Jump,
    /// Filled as if the entrance were an ordinary cell.
    DieRoll,
}

type SixthsRows = Box<[[u8; CELLS]; CELLS]>;

fn zero_rows() -> SixthsRows {
    Box::new([[0u8; CELLS]; CELLS])
}

/// The 100×100 row-stochastic one-step matrix of a board.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    board: Board,
    rows: SixthsRows,
}

impl TransitionMatrix {
    /// Builds the matrix with the default entrance-row convention. Chained
    /// boards are normalized first.
    pub fn new(board: &Board) -> Self {
        Self::with_entrance_rows(board, EntranceRows::Jump)
    }

    pub fn with_entrance_rows(board: &Board, entrance_rows: EntranceRows) -> Self {
        let board = if board.is_normalized() {
            board.clone()
        } else {
            board.normalize()
        };
        let mut landing = [0usize; CELLS];
        for c in Cell::all() {
            landing[c.index()] = board.resolve_landing(c).index();
        }
        let mask = board.mask();
        let mut rows = zero_rows();
        for from in 0..CELLS {
            let cell = Cell::from_index(from);
            if cell == FINISH {
                rows[from][from] = FACES;
            } else if mask.is_entrance(cell) && entrance_rows == EntranceRows::Jump {
                rows[from][landing[from]] = FACES;
            } else {
                for d in 1..=FACES as usize {
                    let target = from + d;
                    if target >= CELLS {
                        // overshoot: the piece stays put
                        rows[from][from] += 1;
                    } else {
                        rows[from][landing[target]] += 1;
                    }
                }
            }
        }
        TransitionMatrix { board, rows }
    }

    /// The normalized board this matrix was built from.
    pub fn board(&self) -> &Board {
        &self.board
    }

    /// Probability in sixths, between zero-based state indices.
    pub fn sixths_idx(&self, from: usize, to: usize) -> u8 {
        self.rows[from][to]
    }

    pub fn sixths(&self, from: Cell, to: Cell) -> u8 {
        self.rows[from.index()][to.index()]
    }

    pub fn prob(&self, from: Cell, to: Cell) -> f64 {
        f64::from(self.sixths(from, to)) / f64::from(FACES)
    }

    pub fn prob_idx(&self, from: usize, to: usize) -> f64 {
        f64::from(self.rows[from][to]) / f64::from(FACES)
    }

    pub fn row_sixths(&self, from: usize) -> &[u8; CELLS] {
        &self.rows[from]
    }

    /// Positive-probability successors of a state, as `(index, sixths)`.
    pub fn successors(&self, from: usize) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.rows[from]
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(j, &s)| (j, s))
    }

    /// Exact row sum in sixths.
    pub fn row_sum_sixths(&self, from: usize) -> u32 {
        self.rows[from].iter().map(|&s| u32::from(s)).sum()
    }

    /// Dense floating-point copy.
    pub fn to_dense(&self) -> Vec<[f64; CELLS]> {
        self.rows
            .iter()
            .map(|r| {
                let mut out = [0.0; CELLS];
                for (o, &s) in out.iter_mut().zip(r.iter()) {
                    *o = f64::from(s) / f64::from(FACES);
                }
                out
            })
            .collect()
    }

    /// Rows and columns simultaneously reindexed: entry `(a, b)` of the
    /// result is `p[order[a]][order[b]]`.
    pub fn permute(&self, perm: &StatePermutation) -> PermutedMatrix {
        let mut rows = zero_rows();
        for (a, ca) in perm.order.iter().enumerate() {
            for (b, cb) in perm.order.iter().enumerate() {
                rows[a][b] = self.rows[ca.index()][cb.index()];
            }
        }
        PermutedMatrix {
            order: perm.clone(),
            rows,
        }
    }

    /// ASCII dump: 100 lines of 100 space-separated `a/6` entries.
    pub fn write_ascii<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        write_sixths_ascii(&self.rows, out)
    }
}

fn write_sixths_ascii<W: Write + ?Sized>(rows: &[[u8; CELLS]; CELLS], out: &mut W) -> io::Result<()> {
    for row in rows.iter() {
        let line: Vec<String> = row.iter().map(|s| format!("{s}/{FACES}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// An ordering of the 100 states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePermutation {
    order: Vec<Cell>,
}

impl StatePermutation {
    pub fn identity() -> Self {
        StatePermutation {
            order: Cell::all().collect(),
        }
    }

    pub fn new(order: Vec<Cell>) -> Result<Self, MarkovError> {
        if order.len() != CELLS {
            return Err(MarkovError::InvalidPermutation(format!(
                "expected {CELLS} states, got {}",
                order.len()
            )));
        }
        let mut seen = [false; CELLS];
        for c in &order {
            if std::mem::replace(&mut seen[c.index()], true) {
                return Err(MarkovError::InvalidPermutation(format!(
                    "state {c} listed twice"
                )));
            }
        }
        Ok(StatePermutation { order })
    }

    /// Lists `first` (in the given order) followed by every other state in
    /// ascending order.
    pub fn first_then_rest(first: &[Cell]) -> Result<Self, MarkovError> {
        let mut listed = [false; CELLS];
        for c in first {
            listed[c.index()] = true;
        }
        let mut order = first.to_vec();
        order.extend(Cell::all().filter(|c| !listed[c.index()]));
        StatePermutation::new(order)
    }

    pub fn order(&self) -> &[Cell] {
        &self.order
    }

    /// Listing position of a state.
    pub fn position(&self, cell: Cell) -> usize {
        self.order
            .iter()
            .position(|&c| c == cell)
            .expect("permutation is a bijection")
    }
}

/// A transition matrix with its states relisted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutedMatrix {
    order: StatePermutation,
    rows: SixthsRows,
}

impl PermutedMatrix {
    pub fn order(&self) -> &StatePermutation {
        &self.order
    }

    /// Entry in sixths at listing positions `(a, b)`.
    pub fn sixths(&self, a: usize, b: usize) -> u8 {
        self.rows[a][b]
    }

    pub fn prob(&self, a: usize, b: usize) -> f64 {
        f64::from(self.rows[a][b]) / f64::from(FACES)
    }

    pub fn row_sum_sixths(&self, a: usize) -> u32 {
        self.rows[a].iter().map(|&s| u32::from(s)).sum()
    }

    /// True when every entry with row in `rows` and column in `cols` is
    /// exactly zero.
    pub fn block_is_zero(
        &self,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> bool {
        rows.into_iter()
            .all(|a| self.rows[a][cols.clone()].iter().all(|&s| s == 0))
    }

    pub fn write_ascii<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        write_sixths_ascii(&self.rows, out)
    }
}

/// Anything that can be drawn as a 100×100 probability heatmap, indexed by
/// listing position.
pub trait ProbabilityGrid {
    fn probability(&self, row: usize, col: usize) -> f64;
}

impl ProbabilityGrid for TransitionMatrix {
    fn probability(&self, row: usize, col: usize) -> f64 {
        self.prob_idx(row, col)
    }
}

impl ProbabilityGrid for PermutedMatrix {
    fn probability(&self, row: usize, col: usize) -> f64 {
        self.prob(row, col)
    }
}

impl ProbabilityGrid for [[f64; CELLS]] {
    fn probability(&self, row: usize, col: usize) -> f64 {
        self[row][col]
    }
}

impl ProbabilityGrid for Vec<[f64; CELLS]> {
    fn probability(&self, row: usize, col: usize) -> f64 {
        self[row][col]
    }
}

/// Pixel shade for a probability: white for 0, black for 1.
pub fn shade(p: f64) -> u8 {
    (255.0 * (1.0 - p)).round() as u8
}

/// Writes a binary (P5) 100×100 graymap, maxval 255, rows top to bottom in
/// listing order.
pub fn write_pgm<G, W>(grid: &G, out: &mut W) -> Result<(), MarkovError>
where
    G: ProbabilityGrid + ?Sized,
    W: Write + ?Sized,
{
    let mut pixels = Vec::with_capacity(CELLS * CELLS);
    for r in 0..CELLS {
        for c in 0..CELLS {
            let p = grid.probability(r, c);
            if !(0.0..=1.0).contains(&p) {
                return Err(MarkovError::ProbabilityOutOfRange {
                    row: r,
                    col: c,
                    value: p,
                });
            }
            pixels.push(shade(p));
        }
    }
    write!(out, "P5\n{CELLS} {CELLS}\n255\n")?;
    out.write_all(&pixels)?;
    Ok(())
}

pub fn render_heatmap<G>(grid: &G, path: &Path) -> Result<(), MarkovError>
where
    G: ProbabilityGrid + ?Sized,
{
    let mut out = BufWriter::new(File::create(path)?);
    write_pgm(grid, &mut out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(i: u8) -> Cell {
        Cell::new(i.into()).unwrap()
    }

    #[test]
    fn finish_row_is_absorbing() {
        for (_, b) in fixtures::all() {
            let m = TransitionMatrix::new(&b);
            for j in 0..CELLS {
                let expect = if j == 99 { 6 } else { 0 };
                assert_eq!(m.sixths_idx(99, j), expect);
            }
        }
    }

    #[test]
    fn overshoot_stays() {
        let m = TransitionMatrix::new(&fixtures::zero());
        assert_eq!(m.sixths(c(98), c(98)), 4);
        assert_eq!(m.sixths(c(98), c(99)), 1);
        assert_eq!(m.sixths(c(98), c(100)), 1);
        assert_eq!(m.row_sum_sixths(97), 6);
    }

    #[test]
    fn delta_first_row() {
        let m = TransitionMatrix::new(&fixtures::delta());
        assert_eq!(m.sixths(c(1), c(99)), 1);
        for j in 3..=7 {
            assert_eq!(m.sixths(c(1), c(j)), 1);
        }
        assert_eq!(m.sixths(c(1), c(2)), 0);
    }

    #[test]
    fn u_rows() {
        let m = TransitionMatrix::new(&fixtures::u());
        for j in [89, 69, 48, 42, 61, 81] {
            assert_eq!(m.sixths(c(93), c(j)), 1);
        }
        assert_eq!(m.sixths(c(94), c(89)), 6);
    }

    #[test]
    fn die_roll_entrance_rows() {
        let m = TransitionMatrix::with_entrance_rows(&fixtures::u(), EntranceRows::DieRoll);
        // 94 + 1 = 95 lands on the 95>69 chute
        assert_eq!(m.sixths(c(94), c(69)), 1);
        assert_eq!(m.sixths(c(94), c(94)), 0);
        assert_eq!(m.row_sum_sixths(93), 6);
    }

    #[test]
    fn chained_boards_are_normalized() {
        let chained = Board::from_pairs(&[(84, 82), (82, 90)]).unwrap();
        let m = TransitionMatrix::new(&chained);
        assert!(m.board().is_normalized());
        assert_eq!(m.sixths(c(81), c(90)), 2);
    }

    #[test]
    fn permutation_validation() {
        assert!(StatePermutation::new(vec![c(1)]).is_err());
        let mut order: Vec<Cell> = Cell::all().collect();
        order[5] = c(1);
        assert!(StatePermutation::new(order).is_err());
        let p = StatePermutation::first_then_rest(&[c(50), c(3)]).unwrap();
        assert_eq!(p.order()[0], c(50));
        assert_eq!(p.order()[2], c(1));
        assert_eq!(p.position(c(3)), 1);
    }

    #[test]
    fn identity_permutation_is_noop() {
        let m = TransitionMatrix::new(&fixtures::g0());
        let p = m.permute(&StatePermutation::identity());
        for a in 0..CELLS {
            for b in 0..CELLS {
                assert_eq!(p.sixths(a, b), m.sixths_idx(a, b));
            }
        }
    }

    #[test]
    fn pgm_encoding() {
        let zero = vec![[0.0; CELLS]; CELLS];
        let mut buf = Vec::new();
        write_pgm(&zero, &mut buf).unwrap();
        let header = b"P5\n100 100\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + CELLS * CELLS);
        assert!(buf[header.len()..].iter().all(|&px| px == 255));

        let m = TransitionMatrix::new(&fixtures::zero());
        let mut buf = Vec::new();
        write_pgm(&m, &mut buf).unwrap();
        let px = &buf[header.len()..];
        assert_eq!(px[99 * CELLS + 99], 0);
        // 1/6 -> round(212.5) = 213
        assert_eq!(px[1], 213);

        let mut bad = vec![[0.0; CELLS]; CELLS];
        bad[3][4] = 1.5;
        assert!(matches!(
            write_pgm(&bad, &mut Vec::new()),
            Err(MarkovError::ProbabilityOutOfRange { row: 3, col: 4, .. })
        ));
    }

    #[test]
    fn ascii_dump_shape() {
        let m = TransitionMatrix::new(&fixtures::delta());
        let mut buf = Vec::new();
        m.write_ascii(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 100);
        assert!(lines.iter().all(|l| l.split(' ').count() == 100));
        assert_eq!(lines[99].split(' ').last(), Some("6/6"));
        assert_eq!(lines[0].split(' ').nth(98), Some("1/6"));
    }
}
