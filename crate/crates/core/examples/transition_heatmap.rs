//! Renders the 14(G0) transition matrix, states reordered so the reachable
//! block comes first. Usage: transition_heatmap [out.pgm]
use moksha::classify::block_certificate;
use moksha::fixtures;
use moksha::markov::{render_heatmap, TransitionMatrix};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "g0.pgm".into());
    let board = fixtures::g0();
    let m = TransitionMatrix::new(&board);
    let cert = block_certificate(&board).unwrap().expect("G0 is unwinnable");
    let permuted = m.permute(&cert.permutation());
    assert!(permuted.block_is_zero(0..cert.split, cert.split..100));
    render_heatmap(&permuted, path.as_ref()).unwrap();
    println!("wrote {path} (first block: {} states)", cert.split);
}
