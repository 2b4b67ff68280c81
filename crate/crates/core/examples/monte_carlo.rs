//! Simulated against exact win probabilities.
use moksha::board::START;
use moksha::classify::absorption_probability;
use moksha::fixtures;
use moksha::simulate::{estimate_win_probability, SimConfig};

fn main() {
    let cfg = SimConfig { seed: 1, games: 1_000_000, ..SimConfig::default() };
    for (name, board) in fixtures::all() {
        let e = estimate_win_probability(&board, &cfg).unwrap();
        let exact = absorption_probability(&board, START).unwrap();
        println!(
            "{name:<14} simulated {:.5} +- {:.5}  exact {exact:.5}  (trapped {}, cutoff {})",
            e.estimate, e.standard_error, e.trapped, e.cutoff
        );
    }
}
