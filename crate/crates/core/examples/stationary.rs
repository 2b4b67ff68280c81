//! One stationary distribution per closed class.
use moksha::classify::stationary_distributions;
use moksha::fixtures;

fn main() {
    for (name, board) in fixtures::all() {
        let sds = stationary_distributions(&board).unwrap();
        let supports: Vec<String> = sds
            .iter()
            .map(|s| {
                let (lo, hi) = (s.support.first().unwrap(), s.support.last().unwrap());
                format!("{lo}..{hi} ({} states)", s.support.len())
            })
            .collect();
        println!("{name:<14} {}", supports.join(", "));
    }
}
