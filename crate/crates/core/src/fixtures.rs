//! Reference boards with known winnability.

use crate::board::Board;

fn rows(entrances: &[u64], exits: &[u64]) -> Board {
    Board::from_rows(entrances, exits).expect("fixture board is valid")
}

/// The 0 Board: no components. Ultimately winnable.
pub fn zero() -> Board {
    Board::empty()
}

/// 8(Ξ): a chute-barrier at 51..56 whose trap region has the escape ladder
/// 43>98. Ultimately winnable.
pub fn xi() -> Board {
    rows(
        &[43, 51, 52, 53, 54, 55, 56, 99],
        &[98, 32, 33, 34, 35, 36, 37, 2],
    )
}

/// 6(U): a chute-barrier on 94..99 in front of the finish. Unwinnable.
pub fn u() -> Board {
    rows(&[94, 95, 96, 97, 98, 99], &[89, 69, 48, 42, 61, 81])
}

/// 10(α): no chute-barrier. Ultimately winnable.
pub fn alpha() -> Board {
    rows(
        &[2, 9, 21, 26, 34, 50, 54, 88, 95, 97],
        &[23, 31, 63, 4, 65, 15, 90, 24, 53, 80],
    )
}

/// 7(Δ): closed region 23..53 behind a barrier at 54..59; the ladder 2>99 is
/// the only way past. Won with probability 1/6.
pub fn delta() -> Board {
    rows(&[2, 54, 55, 56, 57, 58, 59], &[99, 50, 32, 27, 23, 39, 41])
}

/// 14(G₀): two barriers; the ladder 10>71 feeds the closed region 52..73.
/// Unwinnable.
pub fn g0() -> Board {
    rows(
        &[10, 34, 35, 36, 37, 38, 39, 41, 74, 75, 76, 77, 78, 79],
        &[71, 30, 12, 7, 3, 19, 21, 81, 70, 52, 54, 56, 58, 60],
    )
}

/// Six chutes from 51..56 all exiting at 50: unwinnable, yet every closed
/// class is a single absorbing state.
pub fn absorbing_unwinnable() -> Board {
    rows(&[51, 52, 53, 54, 55, 56], &[50, 50, 50, 50, 50, 50])
}

/// All named fixtures with a short label.
pub fn all() -> Vec<(&'static str, Board)> {
    vec![
        ("0", zero()),
        ("8(Xi)", xi()),
        ("6(U)", u()),
        ("10(alpha)", alpha()),
        ("7(Delta)", delta()),
        ("14(G0)", g0()),
        ("6(absorbing)", absorbing_unwinnable()),
    ]
}
