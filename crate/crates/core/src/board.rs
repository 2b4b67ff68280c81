//! Board model: cells, components, validation, canonical naming and
//! chain normalization.
//!
//! A board is a set of one-way jumps ("components") on a 100-cell track.
//! Cells 1 and 100 never host a component, entrances are pairwise distinct,
//! and a piece never comes to rest on an entrance.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of cells on the track.
pub const CELLS: usize = 100;

/// The starting cell.
pub const START: Cell = Cell(1);

/// The finishing cell.
pub const FINISH: Cell = Cell(100);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("two components start at cell {0}")]
    DuplicateEntrance(u8),
    #[error("component {0} touches cell 1 or cell 100")]
    ForbiddenCell(Component),
    #[error("component {0} starts and ends on the same cell")]
    SelfLoop(Component),
    #[error("cell {0} is outside 1..=100")]
    OutOfRange(u64),
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("components starting at {0:?} form a cycle with no resolved exit")]
    ComponentCycle(Vec<u8>),
    #[error("failed to read board file: {0}")]
    Io(String),
}

/// A cell index in `1..=100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u8")]
pub struct Cell(u8);

impl Cell {
    pub fn new(index: u64) -> Result<Self, BoardError> {
        if (1..=CELLS as u64).contains(&index) {
            Ok(Cell(index as u8))
        } else {
            Err(BoardError::OutOfRange(index))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based state index, `0..100`.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        debug_assert!(index < CELLS);
        Cell(index as u8 + 1)
    }

    pub fn all() -> impl Iterator<Item = Cell> {
        (1..=CELLS as u8).map(Cell)
    }

    fn is_terminal(self) -> bool {
        self == START || self == FINISH
    }
}

impl TryFrom<u64> for Cell {
    type Error = BoardError;
    fn try_from(value: u64) -> Result<Self, Self::Error> {
        Cell::new(value)
    }
}

impl From<Cell> for u8 {
    fn from(c: Cell) -> u8 {
        c.0
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    Chute,
    Ladder,
}

/// A chute or ladder: a one-way jump from `entrance` to `exit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Component {
    pub entrance: Cell,
    pub exit: Cell,
}

impl Component {
    /// Builds a component, rejecting self-loops and the terminal cells.
    pub fn new(entrance: Cell, exit: Cell) -> Result<Self, BoardError> {
        let c = Component { entrance, exit };
        if entrance == exit {
            return Err(BoardError::SelfLoop(c));
        }
        if entrance.is_terminal() || exit.is_terminal() {
            return Err(BoardError::ForbiddenCell(c));
        }
        Ok(c)
    }

    /// Convenience constructor from raw cell numbers.
    pub fn from_cells(entrance: u64, exit: u64) -> Result<Self, BoardError> {
        Component::new(Cell::new(entrance)?, Cell::new(exit)?)
    }

    pub fn kind(&self) -> ComponentKind {
        if self.entrance > self.exit {
            ComponentKind::Chute
        } else {
            ComponentKind::Ladder
        }
    }

    pub fn is_chute(&self) -> bool {
        self.kind() == ComponentKind::Chute
    }

    pub fn is_ladder(&self) -> bool {
        self.kind() == ComponentKind::Ladder
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.entrance, self.exit)
    }
}

/// Per-cell view of a board: which component (if any) starts at each cell,
/// and which cells are exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardKindMask {
    entrance_of: [Option<Component>; CELLS],
    exit_cells: BTreeSet<Cell>,
}

impl BoardKindMask {
    pub fn entrance_of(&self, cell: Cell) -> Option<Component> {
        self.entrance_of[cell.index()]
    }

    pub fn is_entrance(&self, cell: Cell) -> bool {
        self.entrance_of[cell.index()].is_some()
    }

    pub fn is_exit(&self, cell: Cell) -> bool {
        self.exit_cells.contains(&cell)
    }

    pub fn exit_cells(&self) -> &BTreeSet<Cell> {
        &self.exit_cells
    }

    /// Neither an entrance nor an exit.
    pub fn is_non_component(&self, cell: Cell) -> bool {
        !self.is_entrance(cell) && !self.is_exit(cell)
    }
}

/// A validated board. Components are kept sorted by entrance, which is also
/// the canonical order used for naming and equality.
///
/// Chained components (an exit that is another component's entrance) are
/// accepted; [`Board::normalize`] collapses them. Chains that loop back on
/// themselves are rejected at construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Component>", into = "Vec<Component>")]
pub struct Board {
    components: Vec<Component>,
}

impl TryFrom<Vec<Component>> for Board {
    type Error = BoardError;
    fn try_from(value: Vec<Component>) -> Result<Self, Self::Error> {
        Board::new(value)
    }
}

impl From<Board> for Vec<Component> {
    fn from(b: Board) -> Self {
        b.components
    }
}

impl Board {
    /// The board with no components.
    pub fn empty() -> Self {
        Board::default()
    }

    pub fn new(mut components: Vec<Component>) -> Result<Self, BoardError> {
        for c in &components {
            // Re-check in case the component was built as a struct literal.
            Component::new(c.entrance, c.exit)?;
        }
        components.sort();
        for pair in components.windows(2) {
            if pair[0].entrance == pair[1].entrance {
                return Err(BoardError::DuplicateEntrance(pair[0].entrance.get()));
            }
        }
        let board = Board { components };
        board.check_cycles()?;
        Ok(board)
    }

    /// Builds a board from `(entrance, exit)` pairs.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Result<Self, BoardError> {
        let components = pairs
            .iter()
            .map(|&(e, x)| Component::from_cells(e, x))
            .collect::<Result<Vec<_>, _>>()?;
        Board::new(components)
    }

    /// Builds a board from the two rows of its name matrix: entrances on top,
    /// exits below.
    pub fn from_rows(entrances: &[u64], exits: &[u64]) -> Result<Self, BoardError> {
        if entrances.len() != exits.len() {
            return Err(BoardError::Syntax {
                position: 0,
                message: format!(
                    "{} entrances but {} exits",
                    entrances.len(),
                    exits.len()
                ),
            });
        }
        let pairs: Vec<_> = entrances.iter().copied().zip(exits.iter().copied()).collect();
        Board::from_pairs(&pairs)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn chutes(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.is_chute())
    }

    pub fn ladders(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.is_ladder())
    }

    pub fn component_at(&self, entrance: Cell) -> Option<Component> {
        self.components
            .binary_search_by_key(&entrance, |c| c.entrance)
            .ok()
            .map(|i| self.components[i])
    }

    pub fn is_entrance(&self, cell: Cell) -> bool {
        self.component_at(cell).is_some()
    }

    pub fn mask(&self) -> BoardKindMask {
        let mut entrance_of = [None; CELLS];
        let mut exit_cells = BTreeSet::new();
        for c in &self.components {
            entrance_of[c.entrance.index()] = Some(*c);
            exit_cells.insert(c.exit);
        }
        BoardKindMask {
            entrance_of,
            exit_cells,
        }
    }

    /// True when no exit is also an entrance.
    pub fn is_normalized(&self) -> bool {
        self.components.iter().all(|c| !self.is_entrance(c.exit))
    }

    /// True when all entrances and exits are pairwise distinct cells, the
    /// family counted by the exact board-count formulas.
    pub fn has_distinct_cells(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.components
            .iter()
            .all(|c| seen.insert(c.entrance) && seen.insert(c.exit))
    }

    /// Where a piece landing on `cell` comes to rest: the end of the chain of
    /// components starting at `cell`, or `cell` itself.
    pub fn resolve_landing(&self, cell: Cell) -> Cell {
        let mut at = cell;
        // Cycles are excluded at construction, so a chain has at most
        // `len()` links.
        for _ in 0..=self.components.len() {
            match self.component_at(at) {
                Some(c) => at = c.exit,
                None => return at,
            }
        }
        unreachable!("component cycle in a validated board")
    }

    /// Rewrites every chained component to end where its chain ends. The
    /// result has no exit that is also an entrance and plays identically.
    pub fn normalize(&self) -> Board {
        let components = self
            .components
            .iter()
            .map(|c| Component {
                entrance: c.entrance,
                exit: self.resolve_landing(c.exit),
            })
            .collect();
        Board { components }
    }

    /// Canonical `N([e1,...],[x1,...])` name with entrances ascending.
    pub fn name(&self) -> String {
        let join = |f: fn(&Component) -> Cell| {
            self.components
                .iter()
                .map(|c| f(c).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "{}([{}],[{}])",
            self.components.len(),
            join(|c| c.entrance),
            join(|c| c.exit)
        )
    }

    /// The inline `e>x,e>x` form accepted by [`parse_board`].
    pub fn to_board_string(&self) -> String {
        self.components
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn check_cycles(&self) -> Result<(), BoardError> {
        // 0 = unvisited, 1 = on current chain, 2 = resolved
        let mut state = [0u8; CELLS];
        for start in &self.components {
            let mut chain = Vec::new();
            let mut at = start.entrance;
            loop {
                match state[at.index()] {
                    2 => break,
                    1 => {
                        let from = chain.iter().position(|&c| c == at).unwrap_or(0);
                        let mut cyc: Vec<u8> = chain[from..].iter().map(|c: &Cell| c.get()).collect();
                        cyc.sort_unstable();
                        return Err(BoardError::ComponentCycle(cyc));
                    }
                    _ => {}
                }
                match self.component_at(at) {
                    Some(c) => {
                        state[at.index()] = 1;
                        chain.push(at);
                        at = c.exit;
                    }
                    None => break,
                }
            }
            for c in chain {
                state[c.index()] = 2;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Board {
    type Err = BoardError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_board(s)
    }
}

/// Parses the inline grammar `board := "" | pair ("," pair)*`,
/// `pair := int ">" int`. Whitespace around tokens is ignored. The
/// `N([e1,...],[x1,...])` name form produced by [`format_name`] is accepted
/// as well.
pub fn parse_board(text: &str) -> Result<Board, BoardError> {
    if text.trim().is_empty() {
        return Ok(Board::empty());
    }
    if text.contains('[') {
        return parse_name(text);
    }
    let mut components = Vec::new();
    let mut offset = 0;
    for piece in text.split(',') {
        components.push(parse_pair(piece, offset)?);
        offset += piece.len() + 1;
    }
    Board::new(components)
}

pub fn format_name(board: &Board) -> String {
    board.name()
}

fn parse_name(text: &str) -> Result<Board, BoardError> {
    let syntax = |message: &str| BoardError::Syntax {
        position: 0,
        message: format!("{message} in {:?}", text.trim()),
    };
    let t = text.trim();
    let open = t.find('(').ok_or_else(|| syntax("expected `N([..],[..])`"))?;
    let n = parse_int(&t[..open]).ok_or_else(|| syntax("bad component count"))?;
    let body = t[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| syntax("missing closing `)`"))?;
    let (first, second) = body
        .split_once("],")
        .ok_or_else(|| syntax("expected two bracketed rows"))?;
    let row = |part: &str| -> Result<Vec<u64>, BoardError> {
        let part = part.trim();
        let inner = part.strip_prefix('[').ok_or_else(|| syntax("expected `[`"))?;
        let inner = inner.strip_suffix(']').unwrap_or(inner);
        if inner.trim().is_empty() {
            return Ok(Vec::new());
        }
        inner
            .split(',')
            .map(|v| parse_int(v).ok_or_else(|| syntax("bad cell")))
            .collect()
    };
    let entrances = row(first)?;
    let exits = row(second)?;
    if entrances.len() != exits.len() || entrances.len() as u64 != n {
        return Err(syntax("row lengths disagree with the component count"));
    }
    Board::from_rows(&entrances, &exits)
}

fn parse_pair(piece: &str, offset: usize) -> Result<Component, BoardError> {
    let syntax = |message: &str| BoardError::Syntax {
        position: offset,
        message: format!("{message} in {:?}", piece.trim()),
    };
    let (lhs, rhs) = piece.split_once('>').ok_or_else(|| syntax("expected `entrance>exit`"))?;
    let entrance = parse_int(lhs).ok_or_else(|| syntax("bad entrance"))?;
    let exit = parse_int(rhs).ok_or_else(|| syntax("bad exit"))?;
    Component::from_cells(entrance, exit)
}

fn parse_int(s: &str) -> Option<u64> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // Saturate huge literals so they report as out of range, not syntax.
    Some(s.parse::<u64>().unwrap_or(u64::MAX))
}

/// Parses the board file format: one `entrance exit` pair per line, with
/// blank lines and `#` comment lines ignored.
pub fn parse_board_file_contents(text: &str) -> Result<Board, BoardError> {
    let mut components = Vec::new();
    let mut offset = 0;
    for line in text.lines() {
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let bad = || BoardError::Syntax {
                position: offset,
                message: format!("expected `entrance exit` in {trimmed:?}"),
            };
            if fields.len() != 2 {
                return Err(bad());
            }
            let e = parse_int(fields[0]).ok_or_else(bad)?;
            let x = parse_int(fields[1]).ok_or_else(bad)?;
            components.push(Component::from_cells(e, x)?);
        }
        offset += line.len() + 1;
    }
    Board::new(components)
}

pub fn read_board_file(path: &Path) -> Result<Board, BoardError> {
    let text = std::fs::read_to_string(path).map_err(|e| BoardError::Io(e.to_string()))?;
    parse_board_file_contents(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn name_form_round_trips() {
        for text in ["", "23>10,5>60", "94>89,95>69,96>48,97>42,98>61,99>81", "84>82,82>90"] {
            let b = parse_board(text).unwrap();
            assert_eq!(parse_board(&format_name(&b)).unwrap(), b);
        }
        assert_eq!(format_name(&Board::empty()), "0([],[])");
        assert!(parse_board("2([5],[60])").is_err());
        assert!(parse_board("1([5],60)").is_err());
    }
    use crate::fixtures;

    #[test]
    fn empty_string_is_zero_board() {
        let b = parse_board("").unwrap();
        assert!(b.is_empty());
        assert_eq!(b.name(), "0([],[])");
        assert_eq!(parse_board("   ").unwrap(), b);
    }

    #[test]
    fn parse_sorts_xi() {
        let b = parse_board("51>32,43>98,52>33,53>34,54>35,55>36,56>37,99>2").unwrap();
        let entrances: Vec<u8> = b.components().iter().map(|c| c.entrance.get()).collect();
        assert_eq!(entrances, vec![43, 51, 52, 53, 54, 55, 56, 99]);
        assert_eq!(b, fixtures::xi());
    }

    #[test]
    fn canonical_name_orders_by_entrance() {
        let b = parse_board("23>10,5>60").unwrap();
        assert_eq!(b.name(), "2([5,23],[60,10])");
    }

    #[test]
    fn fixture_names() {
        assert_eq!(
            fixtures::u().name(),
            "6([94,95,96,97,98,99],[89,69,48,42,61,81])"
        );
        assert_eq!(
            fixtures::delta().name(),
            "7([2,54,55,56,57,58,59],[99,50,32,27,23,39,41])"
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_board("50>50"), Err(BoardError::SelfLoop(_))));
        assert!(matches!(parse_board("1>50"), Err(BoardError::ForbiddenCell(_))));
        assert!(matches!(parse_board("50>100"), Err(BoardError::ForbiddenCell(_))));
        assert!(matches!(parse_board("0>50"), Err(BoardError::OutOfRange(0))));
        assert!(matches!(parse_board("50>101"), Err(BoardError::OutOfRange(101))));
        assert!(matches!(
            parse_board("5>60,5>70"),
            Err(BoardError::DuplicateEntrance(5))
        ));
        assert!(matches!(parse_board("5-60"), Err(BoardError::Syntax { .. })));
        assert!(matches!(parse_board("5>60,"), Err(BoardError::Syntax { .. })));
        assert!(matches!(parse_board("+5>60"), Err(BoardError::Syntax { .. })));
        assert!(matches!(
            parse_board("99999999999999999999999>5"),
            Err(BoardError::OutOfRange(_))
        ));
    }

    #[test]
    fn whitespace_is_ignored() {
        assert_eq!(
            parse_board(" 23 > 10 ,\t5>60 ").unwrap(),
            parse_board("5>60,23>10").unwrap()
        );
    }

    #[test]
    fn normalize_collapses_chains() {
        let b = parse_board("84>82,82>90").unwrap();
        assert!(!b.is_normalized());
        assert_eq!(b.normalize(), parse_board("84>90,82>90").unwrap());

        let b = parse_board("10>20,20>30,30>40").unwrap();
        assert_eq!(b.normalize(), parse_board("10>40,20>40,30>40").unwrap());

        let b = parse_board("5>60").unwrap();
        assert_eq!(b.normalize(), b);
    }

    #[test]
    fn cycles_are_rejected() {
        assert_eq!(
            parse_board("10>20,20>10"),
            Err(BoardError::ComponentCycle(vec![10, 20]))
        );
        assert!(matches!(
            parse_board("5>6,10>20,20>30,30>10"),
            Err(BoardError::ComponentCycle(_))
        ));
    }

    #[test]
    fn landing_resolution() {
        assert_eq!(fixtures::xi().resolve_landing(Cell(51)), Cell(32));
        assert_eq!(Board::empty().resolve_landing(Cell(37)), Cell(37));
        assert_eq!(fixtures::delta().resolve_landing(Cell(2)), Cell(99));
    }

    #[test]
    fn mask_tracks_roles() {
        let m = fixtures::delta().mask();
        assert!(m.is_entrance(Cell(2)));
        assert!(m.is_exit(Cell(99)));
        assert!(m.is_non_component(Cell(3)));
        assert_eq!(m.entrance_of(Cell(54)).unwrap().exit, Cell(50));
        assert_eq!(m.exit_cells().len(), 7);
    }

    #[test]
    fn board_file_format() {
        let text = "# the 7(Delta) board\n2 99\n\n54 50\n55 32\n 56 27\n57 23\n58 39\n59 41\n";
        assert_eq!(parse_board_file_contents(text).unwrap(), fixtures::delta());
        assert!(matches!(
            parse_board_file_contents("2 99 4\n"),
            Err(BoardError::Syntax { .. })
        ));
    }

    #[test]
    fn distinct_cells_predicate() {
        assert!(fixtures::delta().has_distinct_cells());
        assert!(!fixtures::absorbing_unwinnable().has_distinct_cells());
    }

    #[test]
    fn serde_uses_component_list() {
        let b = fixtures::delta();
        let json = serde_json::to_string(&b).unwrap();
        let back: Board = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<Board>(r#"[{"entrance":5,"exit":5}]"#).is_err());
    }
}
