//! Winnability classification and chain statistics.
//!
//! Ground truth is graph-theoretic: reachability from cell 1 and the closed
//! communicating classes (strongly connected components with no outgoing
//! edge) of the one-step transition graph. Probabilities come from linear
//! solves over the transient states.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, Cell, CELLS, FINISH, START};
use crate::linalg::{self, LinalgError};
use crate::markov::{StatePermutation, TransitionMatrix, FACES};

/// Tolerance for treating a win probability as exactly 1.
pub const CERTAIN_TOLERANCE: f64 = 1e-9;

/// Entries below this are outside a stationary distribution's support.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

const FINISH_IDX: usize = CELLS - 1;
const START_IDX: usize = 0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("linear system failed: {0}")]
    SingularSystem(#[from] LinalgError),
    #[error("expected game length is infinite: board is {0}")]
    NotUltimatelyWinnable(Verdict),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Unwinnable,
    OccasionallyWinnable,
    UltimatelyWinnable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Unwinnable => "Unwinnable",
            Verdict::OccasionallyWinnable => "OccasionallyWinnable",
            Verdict::UltimatelyWinnable => "UltimatelyWinnable",
        })
    }
}

pub type StateSet = BTreeSet<Cell>;

/// Which off-diagonal block a certificate zeroes out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateForm {
    /// First block closed: no transition from the first block to the second.
    /// State 1 is listed first, state 100 second.
    UnwinnableForm,
    /// Second block closed: no transition from the second block back to the
    /// first. States 1 and 100 are both in the first block.
    OccasionallyForm,
}

/// A relisting of the states that exposes a zero off-diagonal block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCertificate {
    pub order: Vec<Cell>,
    /// Size of the first block.
    pub split: usize,
    pub form: CertificateForm,
}

impl BlockCertificate {
    pub fn permutation(&self) -> StatePermutation {
        StatePermutation::new(self.order.clone()).expect("certificate order is a bijection")
    }

    /// Checks the claimed zero block exactly and the placement of states 1
    /// and 100.
    pub fn verify(&self, matrix: &TransitionMatrix) -> bool {
        let perm = match StatePermutation::new(self.order.clone()) {
            Ok(p) => p,
            Err(_) => return false,
        };
        if self.split == 0 || self.split >= CELLS {
            return false;
        }
        let permuted = matrix.permute(&perm);
        let start = perm.position(START);
        let finish = perm.position(FINISH);
        match self.form {
            CertificateForm::UnwinnableForm => {
                start < self.split
                    && finish >= self.split
                    && permuted.block_is_zero(0..self.split, self.split..CELLS)
            }
            CertificateForm::OccasionallyForm => {
                start < self.split
                    && finish < self.split
                    && permuted.block_is_zero(self.split..CELLS, 0..self.split)
            }
        }
    }
}

/// Winnability verdict with its supporting evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub win_probability: f64,
    pub closed_classes: Vec<StateSet>,
    pub certificate: Option<BlockCertificate>,
    /// States reachable from cell 1.
    pub reachable: StateSet,
}

impl Classification {
    /// Closed classes other than `{100}` that can be entered from cell 1.
    pub fn trapping_classes(&self) -> impl Iterator<Item = &StateSet> {
        self.closed_classes
            .iter()
            .filter(move |c| !c.contains(&FINISH) && c.iter().any(|s| self.reachable.contains(s)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    pub support: StateSet,
}

fn to_set(mask: &[bool]) -> StateSet {
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| Cell::from_index(i))
        .collect()
}

/// Forward closure of `sources` under positive-probability transitions.
pub fn reachable_mask(matrix: &TransitionMatrix, sources: &[usize]) -> [bool; CELLS] {
    let mut seen = [false; CELLS];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(i) = queue.pop_front() {
        for (j, _) in matrix.successors(i) {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

/// States from which some state of `target` can be reached.
pub fn coreachable_mask(matrix: &TransitionMatrix, target: &[bool; CELLS]) -> [bool; CELLS] {
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); CELLS];
    for i in 0..CELLS {
        for (j, _) in matrix.successors(i) {
            preds[j].push(i);
        }
    }
    let mut seen = *target;
    let mut queue: VecDeque<usize> = (0..CELLS).filter(|&i| target[i]).collect();
    while let Some(j) = queue.pop_front() {
        for &i in &preds[j] {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen
}

pub fn reachable_set(board: &Board, from: Cell) -> StateSet {
    let m = TransitionMatrix::new(board);
    to_set(&reachable_mask(&m, &[from.index()]))
}

/// Strongly connected components of the transition graph (iterative
/// Tarjan), each as a sorted list of state indices.
fn strongly_connected(matrix: &TransitionMatrix) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let succ: Vec<Vec<usize>> = (0..CELLS)
        .map(|i| matrix.successors(i).map(|(j, _)| j).collect())
        .collect();
    let mut index = [UNSEEN; CELLS];
    let mut low = [0usize; CELLS];
    let mut on_stack = [false; CELLS];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut components = Vec::new();

    for root in 0..CELLS {
        if index[root] != UNSEEN {
            continue;
        }
        // (node, next successor position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    components
}

/// Closed communicating classes as index lists, sorted by smallest member.
fn closed_class_indices(matrix: &TransitionMatrix) -> Vec<Vec<usize>> {
    let mut comp_of = [0usize; CELLS];
    let comps = strongly_connected(matrix);
    for (k, comp) in comps.iter().enumerate() {
        for &s in comp {
            comp_of[s] = k;
        }
    }
    let mut closed: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(k, comp)| {
            comp.iter()
                .all(|&s| matrix.successors(s).all(|(t, _)| comp_of[t] == *k))
        })
        .map(|(_, comp)| comp.clone())
        .collect();
    closed.sort_by_key(|c| c[0]);
    closed
}

pub fn closed_classes_of(matrix: &TransitionMatrix) -> Vec<StateSet> {
    closed_class_indices(matrix)
        .into_iter()
        .map(|c| c.into_iter().map(Cell::from_index).collect())
        .collect()
}

pub fn closed_classes(board: &Board) -> Vec<StateSet> {
    closed_classes_of(&TransitionMatrix::new(board))
}

/// Splits states into those hitting `target` with certainty and those
/// needing a solve. A state hits with probability 1 when it cannot reach a
/// closed class disjoint from `target`, and with probability 0 when it
/// cannot reach `target` at all.
fn hitting_partition(matrix: &TransitionMatrix, target: &[bool; CELLS]) -> ([bool; CELLS], Vec<usize>) {
    let can_reach = coreachable_mask(matrix, target);
    let mut avoid = [false; CELLS];
    for class in closed_class_indices(matrix) {
        if class.iter().all(|&i| !target[i]) {
            for i in class {
                avoid[i] = true;
            }
        }
    }
    let can_avoid = coreachable_mask(matrix, &avoid);
    let sure: [bool; CELLS] = std::array::from_fn(|i| target[i] || (can_reach[i] && !can_avoid[i]));
    let unknown = (0..CELLS).filter(|&i| can_reach[i] && !sure[i]).collect();
    (sure, unknown)
}

/// Probability of ever entering `target`, from every state.
pub fn hitting_probabilities(
    matrix: &TransitionMatrix,
    target: &[bool; CELLS],
) -> Result<Vec<f64>, ClassifyError> {
    let (sure, unknown) = hitting_partition(matrix, target);
    let mut pos = [usize::MAX; CELLS];
    for (k, &i) in unknown.iter().enumerate() {
        pos[i] = k;
    }
    let n = unknown.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for (k, &i) in unknown.iter().enumerate() {
        a[k][k] = 1.0;
        for (j, s) in matrix.successors(i) {
            let p = f64::from(s) / f64::from(FACES);
            if sure[j] {
                b[k] += p;
            } else if pos[j] != usize::MAX {
                a[k][pos[j]] -= p;
            }
        }
    }
    let x = linalg::solve(&a, &b)?;
    let mut h = vec![0.0; CELLS];
    for i in 0..CELLS {
        if sure[i] {
            h[i] = 1.0;
        } else if pos[i] != usize::MAX {
            h[i] = x[pos[i]].clamp(0.0, 1.0);
        }
    }
    Ok(h)
}

/// Exact rational counterpart of [`hitting_probabilities`].
pub fn hitting_probabilities_exact(
    matrix: &TransitionMatrix,
    target: &[bool; CELLS],
) -> Result<Vec<BigRational>, ClassifyError> {
    let (sure, unknown) = hitting_partition(matrix, target);
    let mut pos = [usize::MAX; CELLS];
    for (k, &i) in unknown.iter().enumerate() {
        pos[i] = k;
    }
    let sixth = |s: u8| BigRational::new(BigInt::from(s), BigInt::from(FACES));
    let n = unknown.len();
    let mut a = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![BigRational::zero(); n];
    for (k, &i) in unknown.iter().enumerate() {
        a[k][k] = BigRational::one();
        for (j, s) in matrix.successors(i) {
            if sure[j] {
                b[k] += sixth(s);
            } else if pos[j] != usize::MAX {
                a[k][pos[j]] -= sixth(s);
            }
        }
    }
    let x = linalg::solve_exact(&a, &b)?;
    Ok((0..CELLS)
        .map(|i| {
            if sure[i] {
                BigRational::one()
            } else if pos[i] != usize::MAX {
                x[pos[i]].clone()
            } else {
                BigRational::zero()
            }
        })
        .collect())
}

fn finish_target() -> [bool; CELLS] {
    let mut t = [false; CELLS];
    t[FINISH_IDX] = true;
    t
}

/// Probability of eventually reaching cell 100 from `from`.
pub fn absorption_probability(board: &Board, from: Cell) -> Result<f64, ClassifyError> {
    let m = TransitionMatrix::new(board);
    Ok(hitting_probabilities(&m, &finish_target())?[from.index()])
}

pub fn absorption_probability_exact(board: &Board, from: Cell) -> Result<BigRational, ClassifyError> {
    let m = TransitionMatrix::new(board);
    Ok(hitting_probabilities_exact(&m, &finish_target())?.swap_remove(from.index()))
}

/// Classifies the chain described by `matrix`.
pub fn classify_matrix(matrix: &TransitionMatrix) -> Result<Classification, ClassifyError> {
    let reach = reachable_mask(matrix, &[START_IDX]);
    let classes = closed_class_indices(matrix);
    let verdict = if !reach[FINISH_IDX] {
        Verdict::Unwinnable
    } else if classes
        .iter()
        .any(|c| c != &[FINISH_IDX] && c.iter().any(|&s| reach[s]))
    {
        Verdict::OccasionallyWinnable
    } else {
        Verdict::UltimatelyWinnable
    };
    let win_probability = hitting_probabilities(matrix, &finish_target())?[START_IDX];
    let certificate = certificate_for(verdict, &reach, &classes);
    Ok(Classification {
        verdict,
        win_probability,
        closed_classes: classes
            .into_iter()
            .map(|c| c.into_iter().map(Cell::from_index).collect())
            .collect(),
        certificate,
        reachable: to_set(&reach),
    })
}

pub fn classify_board(board: &Board) -> Result<Classification, ClassifyError> {
    classify_matrix(&TransitionMatrix::new(board))
}

fn certificate_for(
    verdict: Verdict,
    reach: &[bool; CELLS],
    classes: &[Vec<usize>],
) -> Option<BlockCertificate> {
    let (first, form): (Vec<usize>, CertificateForm) = match verdict {
        Verdict::UltimatelyWinnable => return None,
        Verdict::Unwinnable => (
            (0..CELLS).filter(|&i| reach[i]).collect(),
            CertificateForm::UnwinnableForm,
        ),
        Verdict::OccasionallyWinnable => {
            // Reachable closed classes are closed already, so their union is
            // its own forward closure.
            let mut trap = [false; CELLS];
            for c in classes {
                if c != &[FINISH_IDX] && c.iter().any(|&s| reach[s]) {
                    for &s in c {
                        trap[s] = true;
                    }
                }
            }
            (
                (0..CELLS).filter(|&i| !trap[i]).collect(),
                CertificateForm::OccasionallyForm,
            )
        }
    };
    let listed: Vec<Cell> = first.iter().map(|&i| Cell::from_index(i)).collect();
    let perm = StatePermutation::first_then_rest(&listed).ok()?;
    Some(BlockCertificate {
        order: perm.order().to_vec(),
        split: first.len(),
        form,
    })
}

pub fn block_certificate(board: &Board) -> Result<Option<BlockCertificate>, ClassifyError> {
    Ok(classify_board(board)?.certificate)
}

/// `F(n)` = probability of having reached cell 100 within `n` moves, for
/// `n = 1..=n_max`.
pub fn game_length_distribution_of(matrix: &TransitionMatrix, n_max: usize) -> Vec<f64> {
    let mut dist = [0.0f64; CELLS];
    dist[START_IDX] = 1.0;
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let mut next = [0.0f64; CELLS];
        for (i, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (j, s) in matrix.successors(i) {
                next[j] += mass * f64::from(s) / f64::from(FACES);
            }
        }
        dist = next;
        out.push(dist[FINISH_IDX]);
    }
    out
}

pub fn game_length_distribution(board: &Board, n_max: usize) -> Vec<f64> {
    game_length_distribution_of(&TransitionMatrix::new(board), n_max)
}

/// Expected number of moves from cell 1 to cell 100.
pub fn expected_game_length(board: &Board) -> Result<f64, ClassifyError> {
    let m = TransitionMatrix::new(board);
    let c = classify_matrix(&m)?;
    if c.verdict != Verdict::UltimatelyWinnable {
        return Err(ClassifyError::NotUltimatelyWinnable(c.verdict));
    }
    let states: Vec<usize> = c
        .reachable
        .iter()
        .map(|s| s.index())
        .filter(|&i| i != FINISH_IDX)
        .collect();
    let mut pos = [usize::MAX; CELLS];
    for (k, &i) in states.iter().enumerate() {
        pos[i] = k;
    }
    let n = states.len();
    let mut a = vec![vec![0.0; n]; n];
    for (k, &i) in states.iter().enumerate() {
        a[k][k] += 1.0;
        for (j, s) in m.successors(i) {
            if pos[j] != usize::MAX {
                a[k][pos[j]] -= f64::from(s) / f64::from(FACES);
            }
        }
    }
    let t = linalg::solve(&a, &vec![1.0; n])?;
    Ok(t[pos[START_IDX]])
}

/// One extreme stationary distribution per closed class; every stationary
/// distribution is a convex combination of these.
pub fn stationary_distributions_of(
    matrix: &TransitionMatrix,
) -> Result<Vec<StationaryDistribution>, ClassifyError> {
    let mut out = Vec::new();
    for class in closed_class_indices(matrix) {
        let n = class.len();
        // pi (P_C - I) = 0 transposed, last equation replaced by sum(pi) = 1.
        let mut a = vec![vec![0.0; n]; n];
        for (r, &j) in class.iter().enumerate() {
            for (c, &i) in class.iter().enumerate() {
                a[r][c] = matrix.prob_idx(i, j) - if i == j { 1.0 } else { 0.0 };
            }
        }
        a[n - 1] = vec![1.0; n];
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        let x = linalg::solve(&a, &b)?;
        let mut pi = vec![0.0; CELLS];
        for (k, &i) in class.iter().enumerate() {
            pi[i] = x[k];
        }
        let support = pi
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > SUPPORT_TOLERANCE)
            .map(|(i, _)| Cell::from_index(i))
            .collect();
        out.push(StationaryDistribution { pi, support });
    }
    Ok(out)
}

pub fn stationary_distributions(board: &Board) -> Result<Vec<StationaryDistribution>, ClassifyError> {
    stationary_distributions_of(&TransitionMatrix::new(board))
}

/// Maximum of `|pi P - pi|` over all states.
pub fn stationary_residual(matrix: &TransitionMatrix, pi: &[f64]) -> f64 {
    let mut next = vec![0.0; CELLS];
    for (i, &mass) in pi.iter().enumerate() {
        for (j, s) in matrix.successors(i) {
            next[j] += mass * f64::from(s) / f64::from(FACES);
        }
    }
    next.iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// True when the only stationary distribution is the point mass on 100,
/// which is sufficient for the board to be ultimately winnable.
pub fn only_finish_stationary(board: &Board) -> Result<bool, ClassifyError> {
    let sds = stationary_distributions(board)?;
    Ok(sds.len() == 1 && sds[0].support == StateSet::from([FINISH]))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
