//! Sampled census of winnability over uniformly random boards.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::board::Board;
use crate::classify::{self, Verdict};
use crate::simulate::{self, SimError};
use crate::structural::{self, StructuralError, StructuralReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusConfig {
    pub min_components: usize,
    pub max_components: usize,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Stratum {
    pub components: Option<usize>,
    pub samples: u64,
    pub ultimately_winnable: u64,
    pub occasionally_winnable: u64,
    pub unwinnable: u64,
    pub with_barrier: u64,
    pub flowchart_agrees: u64,
    pub ultimately_winnable_fraction: f64,
    pub occasionally_winnable_fraction: f64,
    pub unwinnable_fraction: f64,
    pub barrier_fraction: f64,
    pub agreement_rate: f64,
}

impl Stratum {
    fn add(&mut self, s: &Sample) {
        self.samples += 1;
        match s.ground_truth {
            Verdict::UltimatelyWinnable => self.ultimately_winnable += 1,
            Verdict::OccasionallyWinnable => self.occasionally_winnable += 1,
            Verdict::Unwinnable => self.unwinnable += 1,
        }
        self.with_barrier += u64::from(s.has_barrier);
        self.flowchart_agrees += u64::from(s.flowchart == s.ground_truth);
    }

    fn finish(mut self) -> Self {
        let n = self.samples.max(1) as f64;
        self.ultimately_winnable_fraction = self.ultimately_winnable as f64 / n;
        self.occasionally_winnable_fraction = self.occasionally_winnable as f64 / n;
        self.unwinnable_fraction = self.unwinnable as f64 / n;
        self.barrier_fraction = self.with_barrier as f64 / n;
        self.agreement_rate = self.flowchart_agrees as f64 / n;
        self
    }

    /// Half-width of a normal-approximation interval on the ultimately
    /// winnable fraction at `z` standard errors.
    pub fn ultimately_winnable_margin(&self, z: f64) -> f64 {
        let p = self.ultimately_winnable_fraction;
        z * (p * (1.0 - p) / self.samples.max(1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub board: String,
    pub report: StructuralReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub config: CensusConfig,
    pub strata: Vec<Stratum>,
    pub aggregate: Stratum,
    pub disagreements: Vec<Disagreement>,
}

struct Sample {
    ground_truth: Verdict,
    flowchart: Verdict,
    has_barrier: bool,
    disagreement: Option<Disagreement>,
}

#[derive(Debug, thiserror::Error)]
pub enum CensusError {
    #[error(transparent)]
    Sample(#[from] SimError),
    #[error(transparent)]
    Structural(#[from] StructuralError),
}

fn sample_seed(seed: u64, n: usize, i: u64) -> u64 {
    simulate::stream_seed(simulate::stream_seed(seed, n as u64), i)
}

fn examine(board: &Board) -> Result<Sample, StructuralError> {
    if structural::find_chute_barriers(board).is_empty() {
        let verdict = classify::classify_board(board)?.verdict;
        return Ok(Sample {
            ground_truth: verdict,
            flowchart: Verdict::UltimatelyWinnable,
            has_barrier: false,
            disagreement: None,
        });
    }
    let report = structural::flowchart_classify(board)?;
    Ok(Sample {
        ground_truth: report.ground_truth,
        flowchart: report.flowchart_verdict,
        has_barrier: true,
        disagreement: (!report.agrees_with_ground_truth).then(|| Disagreement {
            board: board.to_board_string(),
            report,
        }),
    })
}

/// Draws `samples` uniform distinct-cell boards for every component count
/// in the range and classifies each. Sample `i` of stratum `n` uses its own
/// generator stream, so the report is identical for any thread count.
pub fn census(cfg: &CensusConfig) -> Result<CensusReport, CensusError> {
    let range: RangeInclusive<usize> = cfg.min_components..=cfg.max_components;
    let mut strata = Vec::new();
    let mut aggregate = Stratum::default();
    let mut disagreements = Vec::new();
    for n in range {
        let samples: Vec<Sample> = (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = simulate::rng_from_seed(sample_seed(cfg.seed, n, i));
                let board = simulate::random_board(n, false, &mut rng)?;
                Ok(examine(&board)?)
            })
            .collect::<Result<_, CensusError>>()?;
        let mut stratum = Stratum {
            components: Some(n),
            ..Stratum::default()
        };
        for s in samples {
            stratum.add(&s);
            aggregate.add(&s);
            disagreements.extend(s.disagreement);
        }
        strata.push(stratum.finish());
    }
    Ok(CensusReport {
        config: *cfg,
        strata,
        aggregate: aggregate.finish(),
        disagreements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_boards_are_all_winnable() {
        let cfg = CensusConfig {
            min_components: 0,
            max_components: 5,
            samples: 200,
            seed: 9,
        };
        let r = census(&cfg).unwrap();
        assert_eq!(r.strata.len(), 6);
        for s in &r.strata {
            assert_eq!(s.ultimately_winnable, 200);
            assert_eq!(s.with_barrier, 0);
            assert_eq!(s.agreement_rate, 1.0);
        }
        assert_eq!(r.aggregate.samples, 1200);
    }

    #[test]
    fn single_empty_sample() {
        let cfg = CensusConfig {
            min_components: 0,
            max_components: 0,
            samples: 1,
            seed: 0,
        };
        let r = census(&cfg).unwrap();
        assert_eq!(r.aggregate.ultimately_winnable, 1);
    }

    #[test]
    fn reproducible() {
        let cfg = CensusConfig {
            min_components: 18,
            max_components: 20,
            samples: 150,
            seed: 4,
        };
        assert_eq!(census(&cfg).unwrap(), census(&cfg).unwrap());
    }
}
