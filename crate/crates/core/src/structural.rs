//! Structural reading of a board: chute-barriers, the trap regions they
//! enclose, escape ladders, ladder-passes and ladder-bridges, trappers, and
//! the decision flowchart built from them.
//!
//! The flowchart is a practical identification aid. Its verdict is compared
//! against [`crate::classify`] on every run and disagreements are reported
//! rather than raised.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, Cell, Component, CELLS};
use crate::classify::{self, ClassifyError, StateSet, Verdict};
use crate::markov::TransitionMatrix;

/// Minimum number of consecutive chutes (or ladders) forming a barrier
/// (or bridge): one per die face.
pub const RUN_THRESHOLD: usize = 6;

/// Hitting probability treated as certain when deciding trappers.
pub const TRAPPER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructuralError {
    #[error("trap region {0} has escape ladders and is not closed")]
    RegionNotClosed(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// A maximal run of at least six chutes on consecutive entrance cells, or a
/// merged pseudo-barrier spanning several runs with no exit between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChuteBarrier {
    pub first_entrance: Cell,
    /// Number of cells spanned, first entrance to last.
    pub length: usize,
    pub chutes: Vec<Component>,
    pub merged: bool,
}

impl ChuteBarrier {
    /// The cell just below the barrier.
    pub fn floor(&self) -> u8 {
        self.first_entrance.get() - 1
    }

    pub fn last_entrance(&self) -> u8 {
        self.first_entrance.get() + self.length as u8 - 1
    }
}

/// The interval `{m, ..., M}` below a barrier, found by repeatedly following
/// the lowest chute exit downwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapRegion {
    pub barrier: ChuteBarrier,
    pub m: u8,
    #[serde(rename = "M")]
    pub max: u8,
    /// `m1 = M + 1`, then strictly decreasing lowest exits ending at `m`.
    pub m_sequence: Vec<u8>,
    pub escape_ladders: Vec<Component>,
}

impl TrapRegion {
    pub fn is_closed(&self) -> bool {
        self.escape_ladders.is_empty()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        (self.m..=self.max).contains(&cell.get())
    }

    pub fn cells(&self) -> StateSet {
        (self.m..=self.max)
            .map(|c| Cell::new(c.into()).expect("region inside the board"))
            .collect()
    }

    pub fn label(&self) -> String {
        format!("{}..{}", self.m, self.max)
    }

    fn mask(&self) -> [bool; CELLS] {
        let mut mask = [false; CELLS];
        for c in self.m..=self.max {
            mask[c as usize - 1] = true;
        }
        mask
    }
}

/// Bypass structure of one closed region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedSetReport {
    pub region: String,
    pub cells: StateSet,
    pub ladder_passes: Vec<Vec<Component>>,
    pub ladder_bridges: Vec<Vec<Component>>,
    /// Parallel to `ladder_bridges`.
    pub functional_bridges: Vec<bool>,
    pub trappers: Vec<Component>,
}

impl ClosedSetReport {
    pub fn has_functional_bridge(&self) -> bool {
        self.functional_bridges.iter().any(|&f| f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub barriers: Vec<ChuteBarrier>,
    pub trap_regions: Vec<TrapRegion>,
    pub escape_ladders: Vec<Component>,
    pub closed_sets: Vec<ClosedSetReport>,
    pub ladder_passes: Vec<Vec<Component>>,
    pub ladder_bridges: Vec<Vec<Component>>,
    pub trappers: BTreeMap<String, Vec<Component>>,
    pub flowchart_verdict: Verdict,
    /// Flowchart step (1, 2, 4, 5 or 6) that produced the verdict.
    pub decided_at_step: u8,
    pub ground_truth: Verdict,
    pub agrees_with_ground_truth: bool,
}

/// Maximal runs of consecutive cells satisfying `pred`, as lists of the
/// components starting there.
fn runs<F>(board: &Board, cells: std::ops::RangeInclusive<u8>, pred: F) -> Vec<Vec<Component>>
where
    F: Fn(&Component) -> bool,
{
    let mut out = Vec::new();
    let mut current: Vec<Component> = Vec::new();
    for c in cells {
        let comp = Cell::new(c.into())
            .ok()
            .and_then(|cell| board.component_at(cell))
            .filter(|comp| pred(comp));
        match comp {
            Some(comp) => current.push(comp),
            None if !current.is_empty() => out.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn exits_strictly_between(board: &Board, lo: u8, hi: u8) -> bool {
    board
        .components()
        .iter()
        .any(|c| c.exit.get() > lo && c.exit.get() < hi)
}

/// Maximal chute-barriers, followed (at equal first entrance) by merged
/// pseudo-barriers for runs of barriers with no component exit between
/// consecutive members.
pub fn find_chute_barriers(board: &Board) -> Vec<ChuteBarrier> {
    let board = normalized(board);
    let singles: Vec<ChuteBarrier> = runs(&board, 2..=99, Component::is_chute)
        .into_iter()
        .filter(|r| r.len() >= RUN_THRESHOLD)
        .map(|chutes| ChuteBarrier {
            first_entrance: chutes[0].entrance,
            length: chutes.len(),
            chutes,
            merged: false,
        })
        .collect();

    let mut out = singles.clone();
    let mut group: Vec<&ChuteBarrier> = Vec::new();
    let flush = |group: &mut Vec<&ChuteBarrier>, out: &mut Vec<ChuteBarrier>| {
        if group.len() >= 2 {
            let first = group[0];
            let last = group[group.len() - 1];
            out.push(ChuteBarrier {
                first_entrance: first.first_entrance,
                length: (last.last_entrance() - first.first_entrance.get() + 1) as usize,
                chutes: group.iter().flat_map(|b| b.chutes.iter().copied()).collect(),
                merged: true,
            });
        }
        group.clear();
    };
    for b in &singles {
        if let Some(prev) = group.last() {
            if exits_strictly_between(&board, prev.last_entrance(), b.first_entrance.get()) {
                flush(&mut group, &mut out);
            }
        }
        group.push(b);
    }
    flush(&mut group, &mut out);
    out.sort_by_key(|b| (b.first_entrance, b.merged));
    out
}

/// The trap region below `barrier`.
pub fn trap_region(board: &Board, barrier: &ChuteBarrier) -> TrapRegion {
    let board = normalized(board);
    let lowest_exit = |lo: u8, hi: u8| -> Option<u8> {
        // chutes with entrance strictly between lo and hi
        board
            .chutes()
            .filter(|c| c.entrance.get() > lo && c.entrance.get() < hi)
            .map(|c| c.exit.get())
            .min()
    };

    let m1 = barrier.first_entrance.get();
    let mut seq = vec![m1];
    let mut cur = barrier
        .chutes
        .iter()
        .map(|c| c.exit.get())
        .min()
        .expect("a barrier has chutes");
    let mut prev = m1;
    seq.push(cur);
    while let Some(next) = lowest_exit(cur, prev) {
        if next >= cur {
            break;
        }
        prev = cur;
        cur = next;
        seq.push(cur);
    }

    let max = barrier.floor();
    let top = barrier.last_entrance();
    let escape_ladders = board
        .ladders()
        .filter(|l| (cur..=max).contains(&l.entrance.get()) && l.exit.get() > top)
        .copied()
        .collect();
    TrapRegion {
        barrier: barrier.clone(),
        m: cur,
        max,
        m_sequence: seq,
        escape_ladders,
    }
}

fn require_closed(region: &TrapRegion) -> Result<(), StructuralError> {
    if region.is_closed() {
        Ok(())
    } else {
        Err(StructuralError::RegionNotClosed(region.label()))
    }
}

fn bypass_runs(board: &Board, region: &TrapRegion) -> Vec<Vec<Component>> {
    if region.m <= 2 {
        return Vec::new();
    }
    let max = region.max;
    runs(board, 2..=region.m - 1, |c| c.is_ladder() && c.exit.get() > max)
}

/// Runs of six or more consecutive ladders from below the region to above
/// it.
pub fn find_ladder_bridges(
    board: &Board,
    region: &TrapRegion,
) -> Result<Vec<Vec<Component>>, StructuralError> {
    require_closed(region)?;
    Ok(bypass_runs(&normalized(board), region)
        .into_iter()
        .filter(|r| r.len() >= RUN_THRESHOLD)
        .collect())
}

/// Runs of one to five consecutive ladders from below the region to above
/// it.
pub fn find_ladder_passes(
    board: &Board,
    region: &TrapRegion,
) -> Result<Vec<Vec<Component>>, StructuralError> {
    require_closed(region)?;
    Ok(bypass_runs(&normalized(board), region)
        .into_iter()
        .filter(|r| r.len() < RUN_THRESHOLD)
        .collect())
}

fn trappers_with(
    matrix: &TransitionMatrix,
    region: &TrapRegion,
) -> Result<Vec<Component>, StructuralError> {
    require_closed(region)?;
    let hit = classify::hitting_probabilities(matrix, &region.mask())?;
    Ok(matrix
        .board()
        .components()
        .iter()
        .filter(|c| !region.contains(c.entrance))
        .filter(|c| hit[c.exit.index()] >= 1.0 - TRAPPER_TOLERANCE)
        .copied()
        .collect())
}

/// Components outside the region whose exit enters the region with
/// probability 1.
pub fn find_trappers(board: &Board, region: &TrapRegion) -> Result<Vec<Component>, StructuralError> {
    trappers_with(&TransitionMatrix::new(board), region)
}

/// A bridge is functional when every trapper entrance lies between the
/// bridge's smallest entrance and its smallest exit, inclusive.
pub fn is_functional(bridge: &[Component], trappers: &[Component]) -> bool {
    let lo = bridge.iter().map(|c| c.entrance).min();
    let hi = bridge.iter().map(|c| c.exit).min();
    match (lo, hi) {
        (Some(lo), Some(hi)) => trappers.iter().all(|t| lo <= t.entrance && t.entrance <= hi),
        _ => true,
    }
}

fn normalized(board: &Board) -> Board {
    if board.is_normalized() {
        board.clone()
    } else {
        board.normalize()
    }
}

/// Runs the decision flowchart and compares it with the ground-truth
/// classifier.
pub fn flowchart_classify(board: &Board) -> Result<StructuralReport, StructuralError> {
    let matrix = TransitionMatrix::new(board);
    let board = matrix.board().clone();
    let ground_truth = classify::classify_matrix(&matrix)?.verdict;

    let barriers = find_chute_barriers(&board);
    let trap_regions: Vec<TrapRegion> = barriers.iter().map(|b| trap_region(&board, b)).collect();
    let mut escape_ladders: Vec<Component> = trap_regions
        .iter()
        .flat_map(|r| r.escape_ladders.iter().copied())
        .collect();
    escape_ladders.sort();
    escape_ladders.dedup();

    // A closed merged region stands in for the regions of its members.
    let mut superseded = vec![false; trap_regions.len()];
    for r in trap_regions.iter().filter(|r| r.barrier.merged && r.is_closed()) {
        let (lo, hi) = (r.barrier.first_entrance.get(), r.barrier.last_entrance());
        for (k, other) in trap_regions.iter().enumerate() {
            let b = &other.barrier;
            if !b.merged && b.first_entrance.get() >= lo && b.last_entrance() <= hi {
                superseded[k] = true;
            }
        }
    }
    let closed_regions: Vec<&TrapRegion> = trap_regions
        .iter()
        .enumerate()
        .filter(|(k, r)| r.is_closed() && !superseded[*k])
        .map(|(_, r)| r)
        .collect();

    let mut closed_sets = Vec::new();
    for region in &closed_regions {
        let runs = bypass_runs(&board, region);
        let (ladder_bridges, ladder_passes): (Vec<_>, Vec<_>) =
            runs.into_iter().partition(|r| r.len() >= RUN_THRESHOLD);
        let trappers = trappers_with(&matrix, region)?;
        let functional_bridges = ladder_bridges
            .iter()
            .map(|b| is_functional(b, &trappers))
            .collect();
        closed_sets.push(ClosedSetReport {
            region: region.label(),
            cells: region.cells(),
            ladder_passes,
            ladder_bridges,
            functional_bridges,
            trappers,
        });
    }

    let has_barrier = barriers.iter().any(|b| !b.merged);
    let (flowchart_verdict, decided_at_step) = if !has_barrier {
        (Verdict::UltimatelyWinnable, 1)
    } else if closed_sets.is_empty() {
        (Verdict::UltimatelyWinnable, 2)
    } else if closed_sets.iter().all(ClosedSetReport::has_functional_bridge) {
        (Verdict::UltimatelyWinnable, 4)
    } else if closed_sets
        .iter()
        .filter(|s| !s.has_functional_bridge())
        .all(|s| !s.ladder_passes.is_empty())
    {
        (Verdict::OccasionallyWinnable, 5)
    } else {
        (Verdict::Unwinnable, 6)
    };

    let ladder_passes = closed_sets.iter().flat_map(|s| s.ladder_passes.clone()).collect();
    let ladder_bridges = closed_sets.iter().flat_map(|s| s.ladder_bridges.clone()).collect();
    let trappers = closed_sets
        .iter()
        .map(|s| (s.region.clone(), s.trappers.clone()))
        .collect();

    Ok(StructuralReport {
        barriers,
        trap_regions,
        escape_ladders,
        closed_sets,
        ladder_passes,
        ladder_bridges,
        trappers,
        flowchart_verdict,
        decided_at_step,
        ground_truth,
        agrees_with_ground_truth: flowchart_verdict == ground_truth,
    })
}
