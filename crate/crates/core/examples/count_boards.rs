//! Exact board counts and the winnable-fraction bounds.
use moksha::enumerate::*;

fn main() {
    for n in [0, 1, 2, 10, 20, 49] {
        let c = count_boards(n).unwrap();
        println!("N = {n:>2}: {}", c.decimal_approx());
    }
    for bound in [winnable_lower_bound(), winnable_lower_bound_up_to(20).unwrap()] {
        println!(
            "N <= {}: T = {}, C < {}, T - C > {}, share > {:.5}",
            bound.max_components,
            bound.total,
            bound.barrier_bound,
            bound.without_barrier,
            bound.fraction_f64()
        );
    }
    let shared = shared_exit_bounds();
    println!("shared exits: {} <= T <= {}", shared.lower, shared.upper);
}
