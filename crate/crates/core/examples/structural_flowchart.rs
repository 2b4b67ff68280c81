//! Chute-barriers, trap regions and the flowchart verdict next to the
//! graph verdict.
use moksha::fixtures;
use moksha::structural::flowchart_classify;

fn main() {
    for (name, board) in fixtures::all() {
        let r = flowchart_classify(&board).unwrap();
        let regions: Vec<String> = r
            .trap_regions
            .iter()
            .map(|t| format!("{}{}", t.label(), if t.is_closed() { "" } else { "(open)" }))
            .collect();
        println!(
            "{name:<14} step {} {:<22} truth {:<22} regions {}",
            r.decided_at_step,
            r.flowchart_verdict.to_string(),
            r.ground_truth.to_string(),
            regions.join(" ")
        );
    }
}
