//! Expected game length and the distribution of the number of moves.
use moksha::classify::{expected_game_length, game_length_distribution};
use moksha::fixtures;

fn main() {
    for (name, board) in [("0", fixtures::zero()), ("10(alpha)", fixtures::alpha()), ("7(Delta)", fixtures::delta())] {
        let f = game_length_distribution(&board, 100);
        match expected_game_length(&board) {
            Ok(e) => print!("{name:<10} mean {e:7.3} moves"),
            Err(e) => print!("{name:<10} {e}"),
        }
        println!("  P(done in 20) {:.4}  P(done in 50) {:.4}", f[19], f[49]);
    }
}
