//! Monte-Carlo game engine and random board samplers.
//!
//! The generator is xoshiro256++ seeded through SplitMix64. Parallel work is
//! split into fixed-size chunks of games; chunk `k` draws from the stream
//! seeded with `stream_seed(seed, k)`, so results do not depend on how many
//! threads run the chunks.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::board::{Board, Cell, Component, CELLS};
use crate::classify::{self, ClassifyError, Verdict};
use crate::enumerate;
use crate::markov::{TransitionMatrix, FACES};

pub type GameRng = Xoshiro256PlusPlus;

pub const DEFAULT_MAX_MOVES: u32 = 10_000;

/// Games per independently seeded chunk.
pub const CHUNK_GAMES: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("cannot place {components} components ({reason})")]
    Infeasible { components: usize, reason: &'static str },
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for worker or chunk `k` derived from a base seed.
pub fn stream_seed(seed: u64, k: u64) -> u64 {
    mix64(seed ^ mix64(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

pub fn rng_from_seed(seed: u64) -> GameRng {
    GameRng::seed_from_u64(seed)
}

/// Uniform integer in `0..bound` by rejection, free of modulo bias.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let r = rng.next_u64();
        if r >= threshold {
            return r % bound;
        }
    }
}

/// One fair die face in `1..=6`.
pub fn roll<R: RngCore + ?Sized>(rng: &mut R) -> u8 {
    uniform_below(rng, u64::from(FACES)) as u8 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub games: u64,
    pub max_moves: u32,
    /// Stop a game as soon as it enters a closed class other than `{100}`.
    pub short_circuit: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            games: 100_000,
            max_moves: DEFAULT_MAX_MOVES,
            short_circuit: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Won(u32),
    Cutoff(u32),
    /// Entered the closed class with this index in the board's
    /// closed-class list.
    TrappedInClosedSet(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameTrace {
    pub resting_cells: Vec<Cell>,
    pub outcome: Outcome,
}

/// Precomputed landing table and trap map for fast play.
#[derive(Debug, Clone)]
pub struct Engine {
    landing: [u8; CELLS + 1],
    trap: [u32; CELLS + 1],
    short_circuit: bool,
}

const NO_TRAP: u32 = u32::MAX;

impl Engine {
    pub fn new(board: &Board, short_circuit: bool) -> Result<Self, ClassifyError> {
        let matrix = TransitionMatrix::new(board);
        let board = matrix.board();
        let mut landing = [0u8; CELLS + 1];
        for c in Cell::all() {
            landing[c.get() as usize] = board.resolve_landing(c).get();
        }
        let mut trap = [NO_TRAP; CELLS + 1];
        for (k, class) in classify::closed_classes_of(&matrix).iter().enumerate() {
            if class.len() == 1 && class.contains(&crate::board::FINISH) {
                continue;
            }
            for c in class {
                trap[c.get() as usize] = k as u32;
            }
        }
        Ok(Engine {
            landing,
            trap,
            short_circuit,
        })
    }

    fn trapped(&self, pos: u8) -> Option<usize> {
        let t = self.trap[pos as usize];
        (self.short_circuit && t != NO_TRAP).then_some(t as usize)
    }

    fn step<R: RngCore + ?Sized>(&self, pos: u8, rng: &mut R) -> u8 {
        let target = pos + roll(rng);
        if target as usize > CELLS {
            pos
        } else {
            self.landing[target as usize]
        }
    }

    /// Plays one game, recording every resting cell.
    pub fn play<R: RngCore + ?Sized>(&self, rng: &mut R, max_moves: u32) -> GameTrace {
        let mut pos = 1u8;
        let mut resting_cells = vec![Cell::from_index(0)];
        for moves in 1..=max_moves {
            pos = self.step(pos, rng);
            resting_cells.push(Cell::from_index(pos as usize - 1));
            if pos as usize == CELLS {
                return GameTrace {
                    resting_cells,
                    outcome: Outcome::Won(moves),
                };
            }
            if let Some(k) = self.trapped(pos) {
                return GameTrace {
                    resting_cells,
                    outcome: Outcome::TrappedInClosedSet(k),
                };
            }
        }
        GameTrace {
            resting_cells,
            outcome: Outcome::Cutoff(max_moves),
        }
    }

    /// Plays one game without recording the trace.
    pub fn outcome<R: RngCore + ?Sized>(&self, rng: &mut R, max_moves: u32) -> Outcome {
        let mut pos = 1u8;
        for moves in 1..=max_moves {
            pos = self.step(pos, rng);
            if pos as usize == CELLS {
                return Outcome::Won(moves);
            }
            if let Some(k) = self.trapped(pos) {
                return Outcome::TrappedInClosedSet(k);
            }
        }
        Outcome::Cutoff(max_moves)
    }
}

/// Plays a single game from cell 1 with closed-set short-circuiting.
pub fn play_game<R: RngCore + ?Sized>(
    board: &Board,
    rng: &mut R,
    max_moves: u32,
) -> Result<GameTrace, SimError> {
    Ok(Engine::new(board, true)?.play(rng, max_moves))
}

/// Aggregated outcome of many simulated games.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinEstimate {
    pub games: u64,
    pub won: u64,
    pub trapped: u64,
    pub cutoff: u64,
    pub short_circuit: bool,
    pub estimate: f64,
    pub standard_error: f64,
    /// `length_histogram[n]` = games won in exactly `n` moves.
    #[serde(skip)]
    pub length_histogram: Vec<u64>,
}

impl WinEstimate {
    /// Fraction of all games won within `n` moves.
    pub fn empirical_cdf(&self, n: usize) -> f64 {
        let won: u64 = self.length_histogram.iter().take(n + 1).sum();
        won as f64 / self.games as f64
    }

    pub fn mean_winning_length(&self) -> Option<f64> {
        (self.won > 0).then(|| {
            let total: u64 = self
                .length_histogram
                .iter()
                .enumerate()
                .map(|(n, &k)| n as u64 * k)
                .sum();
            total as f64 / self.won as f64
        })
    }

    /// Standard error of [`mean_winning_length`](Self::mean_winning_length).
    pub fn winning_length_standard_error(&self) -> Option<f64> {
        let mean = self.mean_winning_length()?;
        if self.won < 2 {
            return None;
        }
        let ss: f64 = self
            .length_histogram
            .iter()
            .enumerate()
            .map(|(n, &k)| k as f64 * (n as f64 - mean).powi(2))
            .sum();
        Some((ss / (self.won - 1) as f64 / self.won as f64).sqrt())
    }

    /// Verdict suggested by the observed outcomes. With closed-set
    /// detection on, only a trapped game counts as evidence of a losing
    /// outcome; cutoffs are treated as undecided. Without it, a cutoff
    /// counts as a loss.
    pub fn verdict(&self) -> Verdict {
        let lost = self.trapped > 0 || (!self.short_circuit && self.cutoff > 0);
        if self.won == 0 {
            Verdict::Unwinnable
        } else if lost {
            Verdict::OccasionallyWinnable
        } else {
            Verdict::UltimatelyWinnable
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    won: u64,
    trapped: u64,
    cutoff: u64,
    histogram: Vec<u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.won += other.won;
        self.trapped += other.trapped;
        self.cutoff += other.cutoff;
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(other.histogram) {
            *a += b;
        }
        self
    }
}

/// Runs `cfg.games` independent games and reports the fraction won.
pub fn estimate_win_probability(board: &Board, cfg: &SimConfig) -> Result<WinEstimate, SimError> {
    let engine = Engine::new(board, cfg.short_circuit)?;
    let chunks = cfg.games.div_ceil(CHUNK_GAMES);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_from_seed(stream_seed(cfg.seed, k));
            let n = CHUNK_GAMES.min(cfg.games - k * CHUNK_GAMES);
            let mut t = Tally {
                histogram: vec![0; cfg.max_moves as usize + 1],
                ..Tally::default()
            };
            for _ in 0..n {
                match engine.outcome(&mut rng, cfg.max_moves) {
                    Outcome::Won(m) => {
                        t.won += 1;
                        t.histogram[m as usize] += 1;
                    }
                    Outcome::TrappedInClosedSet(_) => t.trapped += 1,
                    Outcome::Cutoff(_) => t.cutoff += 1,
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge);

    let games = cfg.games.max(1);
    let p = tally.won as f64 / games as f64;
    let mut histogram = tally.histogram;
    while histogram.last() == Some(&0) {
        histogram.pop();
    }
    Ok(WinEstimate {
        games: cfg.games,
        won: tally.won,
        trapped: tally.trapped,
        cutoff: tally.cutoff,
        short_circuit: cfg.short_circuit,
        estimate: p,
        standard_error: (p * (1.0 - p) / games as f64).sqrt(),
        length_histogram: histogram,
    })
}

/// Half-width of the Dvoretzky–Kiefer–Wolfowitz band for `n` samples at
/// confidence `1 - alpha`.
pub fn dkw_epsilon(n: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

const FIRST_USABLE: u8 = 2;
const USABLE: usize = enumerate::USABLE_CELLS;

/// Draws `k` distinct usable cells in uniformly random order.
fn distinct_cells<R: RngCore + ?Sized>(rng: &mut R, pool: &mut Vec<u8>, k: usize) -> Vec<u8> {
    for i in 0..k {
        let j = i + uniform_below(rng, (pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool[..k].to_vec()
}

fn usable_pool() -> Vec<u8> {
    (FIRST_USABLE..FIRST_USABLE + USABLE as u8).collect()
}

fn make_board(pairs: impl IntoIterator<Item = (u8, u8)>) -> Board {
    let comps: Vec<Component> = pairs
        .into_iter()
        .map(|(e, x)| Component::from_cells(e.into(), x.into()).expect("sampled cells are usable"))
        .collect();
    Board::new(comps).expect("sampled board is valid")
}

/// A random board with `n` components.
///
/// With `shared_exits = false` the draw is uniform over all boards whose
/// entrances and exits are pairwise distinct. With `shared_exits = true`
/// entrances are distinct and each exit is drawn independently from the
/// non-entrance cells; that family is not sampled uniformly.
pub fn random_board<R: RngCore + ?Sized>(
    n: usize,
    shared_exits: bool,
    rng: &mut R,
) -> Result<Board, SimError> {
    let mut pool = usable_pool();
    if !shared_exits {
        if 2 * n > USABLE {
            return Err(SimError::Infeasible {
                components: n,
                reason: "only 98 usable cells for distinct entrances and exits",
            });
        }
        // A uniform injective sequence of 2n cells; the first n are
        // entrances paired in order with the last n. Each board arises from
        // exactly n! sequences.
        let cells = distinct_cells(rng, &mut pool, 2 * n);
        return Ok(make_board((0..n).map(|i| (cells[i], cells[n + i]))));
    }
    if n >= USABLE {
        return Err(SimError::Infeasible {
            components: n,
            reason: "at least one usable cell must remain free for exits",
        });
    }
    let entrances = distinct_cells(rng, &mut pool, n);
    let free = &pool[n..];
    let pairs: Vec<(u8, u8)> = entrances
        .iter()
        .map(|&e| (e, free[uniform_below(rng, free.len() as u64) as usize]))
        .collect();
    Ok(make_board(pairs))
}

/// A random board with `n >= 6` distinct-cell components containing at
/// least one chute-barrier, built the way barrier boards are counted: a
/// six-chute barrier whose lowest entrance `M` is drawn with weight
/// `C(M-2, 6)`, six exits below it, then `n - 6` further components on the
/// remaining cells. Boards with several barriers are over-represented.
pub fn random_barrier_board<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<Board, SimError> {
    if !(6..=enumerate::MAX_DISTINCT_COMPONENTS).contains(&n) {
        return Err(SimError::Infeasible {
            components: n,
            reason: "a barrier board needs 6..=49 distinct-cell components",
        });
    }
    let weights: Vec<u64> = (8..=94usize)
        .map(|m| enumerate::binomial(m - 2, 6).try_into().expect("fits in u64"))
        .collect();
    let total: u64 = weights.iter().sum();
    let mut pick = uniform_below(rng, total);
    let mut lowest = 8u8;
    for (k, w) in weights.iter().enumerate() {
        if pick < *w {
            lowest = 8 + k as u8;
            break;
        }
        pick -= w;
    }

    let mut below: Vec<u8> = (FIRST_USABLE..lowest).collect();
    let exits = distinct_cells(rng, &mut below, 6);
    let mut pairs: Vec<(u8, u8)> = (0..6).map(|i| (lowest + i as u8, exits[i])).collect();

    let used: Vec<u8> = pairs.iter().flat_map(|&(e, x)| [e, x]).collect();
    let mut rest: Vec<u8> = usable_pool().into_iter().filter(|c| !used.contains(c)).collect();
    let extra = n - 6;
    let cells = distinct_cells(rng, &mut rest, 2 * extra);
    pairs.extend((0..extra).map(|i| (cells[i], cells[extra + i])));
    Ok(make_board(pairs))
}
