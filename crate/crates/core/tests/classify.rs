mod common;

use std::collections::BTreeSet;

use common::{any_board, cell, stratified_boards};
use moksha::board::{Board, Cell, FINISH, START};
use moksha::classify::*;
use moksha::fixtures;
use moksha::markov::TransitionMatrix;
use moksha::simulate::{estimate_win_probability, SimConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn set(cells: impl IntoIterator<Item = u8>) -> StateSet {
    cells.into_iter().map(cell).collect()
}

#[test]
fn fixture_verdicts() {
    use Verdict::*;
    let expected = [
        ("0", UltimatelyWinnable),
        ("8(Xi)", UltimatelyWinnable),
        ("6(U)", Unwinnable),
        ("10(alpha)", UltimatelyWinnable),
        ("7(Delta)", OccasionallyWinnable),
        ("14(G0)", Unwinnable),
        ("6(absorbing)", Unwinnable),
    ];
    for ((name, b), (label, v)) in fixtures::all().into_iter().zip(expected) {
        assert_eq!(name, label);
        assert_eq!(classify_board(&b).unwrap().verdict, v, "{name}");
    }
}

#[test]
fn reachable_examples() {
    assert_eq!(reachable_set(&Board::empty(), START), set(1..=100));
    assert!(!reachable_set(&fixtures::u(), START).contains(&FINISH));
    let g0 = reachable_set(&fixtures::g0(), START);
    assert!(g0.iter().all(|c| c.get() <= 73));
}

#[test]
fn closed_class_examples() {
    assert_eq!(closed_classes(&Board::empty()), vec![set([100])]);
    assert_eq!(
        closed_classes(&fixtures::absorbing_unwinnable()),
        vec![set([50]), set([100])]
    );
    assert_eq!(closed_classes(&fixtures::delta()), vec![set(23..=53), set([100])]);
}

#[test]
fn absorption_examples() {
    assert_eq!(absorption_probability(&Board::empty(), START).unwrap(), 1.0);
    let d = fixtures::delta();
    assert!((absorption_probability(&d, START).unwrap() - 1.0 / 6.0).abs() < 1e-12);
    assert_eq!(
        absorption_probability_exact(&d, START).unwrap(),
        BigRational::new(BigInt::from(1), BigInt::from(6))
    );
    assert!((absorption_probability(&d, cell(99)).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(absorption_probability(&fixtures::u(), START).unwrap(), 0.0);
}

#[test]
fn length_distribution_examples() {
    let f = game_length_distribution(&Board::empty(), 17);
    assert_eq!(f[15], 0.0);
    assert!(f[16] > 0.0);
    let f = game_length_distribution(&fixtures::delta(), 2);
    assert!((f[1] - 1.0 / 36.0).abs() < 1e-15);
    assert!(game_length_distribution(&fixtures::u(), 300).iter().all(|&p| p == 0.0));
}

#[test]
fn expected_length_examples() {
    let e = expected_game_length(&Board::empty()).unwrap();
    assert!(e > 17.0 && e < 200.0);
    assert!(matches!(
        expected_game_length(&fixtures::u()),
        Err(ClassifyError::NotUltimatelyWinnable(Verdict::Unwinnable))
    ));
}

#[test]
fn expected_length_matches_monte_carlo() {
    for (b, seed) in [(Board::empty(), 21), (fixtures::alpha(), 22)] {
        let exact = expected_game_length(&b).unwrap();
        let cfg = SimConfig { seed, games: 1_000_000, ..SimConfig::default() };
        let est = estimate_win_probability(&b, &cfg).unwrap();
        assert_eq!(est.won, cfg.games);
        let mean = est.mean_winning_length().unwrap();
        let se = est.winning_length_standard_error().unwrap();
        assert!((mean - exact).abs() < 3.0 * se, "{b}: {mean} vs {exact} (se {se})");
    }
}

#[test]
fn stationary_examples() {
    let only = stationary_distributions(&Board::empty()).unwrap();
    assert_eq!(only.len(), 1);
    assert_eq!(only[0].support, set([100]));
    assert!(only_finish_stationary(&Board::empty()).unwrap());

    let sds = stationary_distributions(&fixtures::absorbing_unwinnable()).unwrap();
    let supports: Vec<StateSet> = sds.iter().map(|s| s.support.clone()).collect();
    assert_eq!(supports, vec![set([50]), set([100])]);
    assert_eq!(sds[0].pi[49], 1.0);

    let g0 = stationary_distributions(&fixtures::g0()).unwrap();
    assert!(g0.iter().any(|s| !s.support.contains(&FINISH)));
}

#[test]
fn certificate_examples() {
    let g0 = block_certificate(&fixtures::g0()).unwrap().unwrap();
    assert_eq!(g0.form, CertificateForm::UnwinnableForm);
    assert!(g0.verify(&TransitionMatrix::new(&fixtures::g0())));
    let d = block_certificate(&fixtures::delta()).unwrap().unwrap();
    assert_eq!(d.form, CertificateForm::OccasionallyForm);
    assert!(d.verify(&TransitionMatrix::new(&fixtures::delta())));
    assert!(block_certificate(&Board::empty()).unwrap().is_none());
}

/// Verdict from the sign pattern of the exact win probability.
fn exact_verdict(b: &Board) -> Verdict {
    let p = absorption_probability_exact(b, START).unwrap();
    if p == BigRational::from_integer(0.into()) {
        Verdict::Unwinnable
    } else if p == BigRational::from_integer(1.into()) {
        Verdict::UltimatelyWinnable
    } else {
        Verdict::OccasionallyWinnable
    }
}

#[test]
fn exact_and_float_agree_on_barrier_boards() {
    let mut rng = moksha::simulate::rng_from_seed(31);
    for i in 0..60 {
        let b = moksha::simulate::random_barrier_board(6 + i % 20, &mut rng).unwrap();
        let c = classify_board(&b).unwrap();
        let exact = rational_to_f64(&absorption_probability_exact(&b, START).unwrap());
        assert!((c.win_probability - exact).abs() < 1e-9, "{b}");
        assert_eq!(c.verdict, exact_verdict(&b), "{b}");
    }
}

fn check_classification(b: &Board) -> Result<(), TestCaseError> {
    let m = TransitionMatrix::new(b);
    let c = classify_matrix(&m).unwrap();
    let p = c.win_probability;
    match c.verdict {
        Verdict::Unwinnable => {
            prop_assert!(!c.reachable.contains(&FINISH));
            prop_assert!(p.abs() <= 1e-9);
        }
        Verdict::OccasionallyWinnable => prop_assert!(p > 1e-9 && p < 1.0 - 1e-9),
        Verdict::UltimatelyWinnable => prop_assert!((p - 1.0).abs() <= 1e-9),
    }
    prop_assert!(c.closed_classes.contains(&set([100])));
    match &c.certificate {
        Some(cert) => prop_assert!(cert.verify(&m)),
        None => prop_assert_eq!(c.verdict, Verdict::UltimatelyWinnable),
    }

    // Stationary supports are exactly the closed classes.
    let sds = stationary_distributions_of(&m).unwrap();
    let supports: BTreeSet<StateSet> = sds.iter().map(|s| s.support.clone()).collect();
    let classes: BTreeSet<StateSet> = c.closed_classes.iter().cloned().collect();
    prop_assert_eq!(supports, classes);
    for s in &sds {
        prop_assert!(stationary_residual(&m, &s.pi) <= 1e-9);
        prop_assert!((s.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(s.pi.iter().all(|&x| x >= -1e-12));
    }
    if sds.len() == 1 {
        prop_assert_eq!(c.verdict, Verdict::UltimatelyWinnable);
    }

    let f = game_length_distribution_of(&m, 150);
    prop_assert!(f.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    prop_assert!(f.iter().all(|&x| x <= p + 1e-9));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn classification_invariants(b in any_board(60)) {
        check_classification(&b)?;
    }
}

#[test]
fn classification_invariants_on_barrier_boards() {
    let mut rng = moksha::simulate::rng_from_seed(32);
    for i in 0..200 {
        let b = moksha::simulate::random_barrier_board(6 + i % 30, &mut rng).unwrap();
        check_classification(&b).unwrap();
    }
}

#[test]
fn tarjan_matches_reachability_oracle() {
    // A closed class is a set C with reach(c) = C for every c in C.
    for b in stratified_boards(33, 150, 49) {
        let m = TransitionMatrix::new(&b);
        let reach: Vec<StateSet> = (0..100)
            .map(|i| {
                reachable_mask(&m, &[i])
                    .iter()
                    .enumerate()
                    .filter(|(_, &r)| r)
                    .map(|(j, _)| Cell::from_index(j))
                    .collect()
            })
            .collect();
        let mut oracle: Vec<StateSet> = Vec::new();
        for i in 0..100 {
            let r = &reach[i];
            if r.iter().all(|c| &reach[c.index()] == r) && !oracle.contains(r) {
                oracle.push(r.clone());
            }
        }
        oracle.sort_by_key(|c| *c.iter().next().unwrap());
        assert_eq!(closed_classes_of(&m), oracle, "{b}");
    }
}
