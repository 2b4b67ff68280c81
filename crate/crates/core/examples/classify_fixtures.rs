//! Winnability of the named boards.
use moksha::classify::classify_board;
use moksha::fixtures;

fn main() {
    for (name, board) in fixtures::all() {
        let c = classify_board(&board).unwrap();
        let classes: Vec<String> = c
            .closed_classes
            .iter()
            .map(|k| format!("{}..{}", k.first().unwrap(), k.last().unwrap()))
            .collect();
        println!(
            "{name:<14} {:<22} p(win) = {:<20} closed {}",
            c.verdict.to_string(),
            c.win_probability,
            classes.join(" ")
        );
    }
}
