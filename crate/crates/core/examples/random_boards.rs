//! Uniform random boards and boards with a planted chute-barrier.
use moksha::classify::classify_board;
use moksha::simulate::{random_barrier_board, random_board, rng_from_seed};

fn main() {
    let mut rng = rng_from_seed(3);
    for n in [5, 20, 40] {
        let b = random_board(n, false, &mut rng).unwrap();
        println!("{}: {}", classify_board(&b).unwrap().verdict, b);
    }
    for _ in 0..3 {
        let b = random_barrier_board(12, &mut rng).unwrap();
        println!("{}: {}", classify_board(&b).unwrap().verdict, b);
    }
}
