//! Snakes-and-ladders boards as absorbing Markov chains: exact transition
//! matrices, winnability classification, structural analysis, board
//! counting and Monte-Carlo play.
//!
//! ```
//! use moksha::{board::parse_board, classify::{classify_board, Verdict}};
//!
//! let board = parse_board("4>99").unwrap();
//! let c = classify_board(&board).unwrap();
//! assert_eq!(c.verdict, Verdict::UltimatelyWinnable);
//! ```

pub mod board;
pub mod census;
pub mod classify;
pub mod cli;
pub mod enumerate;
pub mod fixtures;
pub mod linalg;
pub mod markov;
pub mod simulate;
pub mod structural;
