#![allow(dead_code)]

use moksha::board::{Board, Cell, Component};
use moksha::simulate::{random_board, rng_from_seed, stream_seed};
use proptest::prelude::*;

/// Arbitrary valid boards, chained components included.
pub fn any_board(max_components: usize) -> impl Strategy<Value = Board> {
    prop::collection::btree_map(2u64..=99, 2u64..=99, 0..=max_components).prop_filter_map(
        "self-loops and cycles are invalid",
        |m| {
            let comps: Option<Vec<Component>> = m
                .into_iter()
                .map(|(e, x)| Component::from_cells(e, x).ok())
                .collect();
            Board::new(comps?).ok()
        },
    )
}

/// Uniform distinct-cell boards with a random component count.
pub fn distinct_board(max_components: usize) -> impl Strategy<Value = Board> {
    (0..=max_components, any::<u64>())
        .prop_map(|(n, seed)| random_board(n, false, &mut rng_from_seed(seed)).unwrap())
}

/// `count` boards cycling through `n_range`, drawn from independent seeds.
pub fn stratified_boards(seed: u64, count: u64, n_max: usize) -> Vec<Board> {
    (0..count)
        .map(|i| {
            let n = (i % (n_max as u64 + 1)) as usize;
            random_board(n, false, &mut rng_from_seed(stream_seed(seed, i))).unwrap()
        })
        .collect()
}

/// Follows components from `cell` on the raw (unnormalized) board.
pub fn follow(board: &Board, cell: u8) -> u8 {
    let mut at = cell;
    for _ in 0..100 {
        match board
            .components()
            .iter()
            .find(|c| c.entrance.get() == at)
        {
            Some(c) => at = c.exit.get(),
            None => return at,
        }
    }
    panic!("cycle through {cell}");
}

/// One-step transition counts (in sixths) obtained by playing all six die
/// faces from every cell of the raw board.
pub fn brute_force_sixths(board: &Board) -> Vec<[u8; 100]> {
    let mut rows = vec![[0u8; 100]; 100];
    for i in 1..=100u8 {
        let row = &mut rows[i as usize - 1];
        if i == 100 {
            row[99] = 6;
        } else if board.components().iter().any(|c| c.entrance.get() == i) {
            row[follow(board, i) as usize - 1] = 6;
        } else {
            for d in 1..=6u8 {
                let t = i + d;
                let land = if t > 100 { i } else { follow(board, t) };
                row[land as usize - 1] += 1;
            }
        }
    }
    rows
}

pub fn cell(i: u8) -> Cell {
    Cell::new(i.into()).unwrap()
}
