//! Parsing, canonical names and chain normalization.
use moksha::board::{format_name, parse_board};

fn main() {
    let b = parse_board("23>10,5>60").unwrap();
    println!("{}", format_name(&b));

    // 84 leads onto 82, which is itself a ladder
    let chained = parse_board("84>82,82>90").unwrap();
    println!("{} -> {}", chained, chained.normalize());

    for bad in ["50>50", "1>40", "10>20,20>10", "7>"] {
        println!("{bad:>12}: {}", parse_board(bad).unwrap_err());
    }
}
