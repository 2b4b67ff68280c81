//! Verdict shares over sampled boards. Usage: census [samples]
use moksha::census::{census, CensusConfig};

fn main() {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let cfg = CensusConfig { min_components: 0, max_components: 49, samples, seed: 0 };
    let report = census(&cfg).unwrap();
    for s in &report.strata {
        println!(
            "N = {:>2}  ultimately {:.4}  barrier {:.4}  flowchart agrees {:.4}",
            s.components.unwrap(),
            s.ultimately_winnable_fraction,
            s.barrier_fraction,
            s.agreement_rate
        );
    }
    println!("disagreements: {}", report.disagreements.len());
}
