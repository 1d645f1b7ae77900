//! Per-step sensor relocation.
//!
//! With `N_t = A_t^T G` (a `D x N` matrix whose column `nu_y` describes what
//! a sensor at node `y` would observe), sensor `i` moves to the node of its
//! Voronoi region, at most `P` hops away, that maximises
//!
//! ```text
//! Psi(y) = ||nu_y||^2 - ||P_{R(N_{:M_i})} nu_y||^2,
//! ```
//!
//! where `M_i` are the current positions of all other sensors. Every sensor
//! decides from the same snapshot, so the loop can run in any order or in
//! parallel with identical results.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::filter::SensingOperator;
use crate::graph::{voronoi_partition, within_hops, Graph, VoronoiPartition};
use crate::linalg::{range_basis, PINV_CUTOFF};
use crate::sampling::{check_node_set, SelectionState};
use crate::{Error, Result};

/// Candidates whose score is within this fraction of the largest squared
/// column norm of the candidate set are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// How far a sensor may move in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopLimit {
    Hops(usize),
    /// Anywhere in the sensor's Voronoi region.
    Unbounded,
}

impl HopLimit {
    pub fn as_option(&self) -> Option<usize> {
        match self {
            HopLimit::Hops(p) => Some(*p),
            HopLimit::Unbounded => None,
        }
    }
}

/// Execution strategy for the per-sensor loop. Results never depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    Sequential,
    /// Runs on rayon when the `parallel` feature is enabled, sequentially
    /// otherwise.
    Parallel,
}

/// Sensor positions `Q_t` and the movement limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementState {
    positions: Vec<usize>,
    hop_limit: HopLimit,
}

impl PlacementState {
    pub fn new(positions: Vec<usize>, hop_limit: HopLimit, n_nodes: usize) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyNodeSet);
        }
        check_node_set(&positions, n_nodes)?;
        Ok(PlacementState { positions, hop_limit })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn hop_limit(&self) -> HopLimit {
        self.hop_limit
    }

    pub fn n_sensors(&self) -> usize {
        self.positions.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorMove {
    pub sensor: usize,
    pub from: usize,
    pub to: usize,
    /// `Psi(to)`.
    pub score: f64,
}

/// Orthogonal projector onto the span of a set of columns of `N`.
#[derive(Debug, Clone)]
pub struct Projector {
    basis: DMatrix<f64>,
}

impl Projector {
    pub fn onto_columns(selection: &DMatrix<f64>, columns: &[usize]) -> Result<Self> {
        let sub = selection.select_columns(columns.iter());
        Ok(Projector { basis: range_basis(&sub, PINV_CUTOFF)? })
    }

    /// `||nu||^2 - ||P nu||^2`, clamped at zero.
    pub fn residual_energy(&self, nu: &DVector<f64>) -> f64 {
        let projected = self.basis.tr_mul(nu);
        (nu.norm_squared() - projected.norm_squared()).max(0.0)
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

/// `Psi(y)` for column `y` of `selection` against the span of `others`.
pub fn psi_score(selection: &DMatrix<f64>, others: &[usize], y: usize) -> Result<f64> {
    let n = selection.ncols();
    if y >= n {
        return Err(Error::NodeOutOfRange { index: y, n });
    }
    if let Some(&bad) = others.iter().find(|&&m| m >= n) {
        return Err(Error::NodeOutOfRange { index: bad, n });
    }
    let projector = Projector::onto_columns(selection, others)?;
    Ok(projector.residual_energy(&selection.column(y).into_owned()))
}

/// Nodes sensor `i` may move to: its Voronoi region intersected with its
/// `P`-hop ball. Always contains the current position.
pub fn feasible_nodes(state: &PlacementState, graph: &Graph, partition: &VoronoiPartition, i: usize) -> Vec<usize> {
    match state.hop_limit {
        HopLimit::Unbounded => partition.region(i).to_vec(),
        HopLimit::Hops(p) => within_hops(graph, state.positions[i], Some(p))
            .into_iter()
            .filter(|&v| partition.owner(v) == i)
            .collect(),
    }
}

/// Best feasible node for sensor `i`.
///
/// Near-ties (see [`TIE_TOLERANCE`]) keep the sensor where it is if its
/// current node is among them, otherwise go to the lowest node index.
pub fn relocate_sensor(
    state: &PlacementState,
    graph: &Graph,
    partition: &VoronoiPartition,
    selection: &DMatrix<f64>,
    i: usize,
) -> Result<SensorMove> {
    let k = state.n_sensors();
    if i >= k {
        return Err(Error::NodeOutOfRange { index: i, n: k });
    }
    if partition.generators() != state.positions() {
        return Err(Error::InvalidParameter("partition was not built from the current positions"));
    }
    if selection.ncols() != graph.n_nodes() {
        return Err(Error::DimensionMismatch { expected: graph.n_nodes(), got: selection.ncols() });
    }
    let current = state.positions[i];
    let others: Vec<usize> = state.positions.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &q)| q).collect();
    let projector = Projector::onto_columns(selection, &others)?;

    let candidates = feasible_nodes(state, graph, partition, i);
    let mut scored = Vec::with_capacity(candidates.len());
    let mut best = f64::NEG_INFINITY;
    let mut scale = 0.0f64;
    for &y in &candidates {
        let nu = selection.column(y).into_owned();
        scale = scale.max(nu.norm_squared());
        let score = projector.residual_energy(&nu);
        best = best.max(score);
        scored.push((y, score));
    }
    let tie = TIE_TOLERANCE * scale;
    let current_score = scored.iter().find(|&&(y, _)| y == current).map(|&(_, s)| s).expect("current position is always feasible");
    let (to, score) = if current_score >= best - tie {
        (current, current_score)
    } else {
        // candidates are in ascending node order
        *scored.iter().find(|&&(_, s)| s >= best - tie).expect("best is attained")
    };
    Ok(SensorMove { sensor: i, from: current, to, score })
}

/// Outcome of one relocation round.
#[derive(Debug, Clone)]
pub struct PlacementStep {
    pub next: PlacementState,
    pub moves: Vec<SensorMove>,
    pub partition: VoronoiPartition,
}

/// One round with `N_t` computed as `(G A_t)^T` (`G` is symmetric).
pub fn step(
    state: &PlacementState,
    graph: &Graph,
    dictionary: &DMatrix<f64>,
    sensing: &SensingOperator,
    schedule: Schedule,
) -> Result<PlacementStep> {
    let selection = sensing.apply_columns(dictionary)?.transpose();
    step_with_selection(state, graph, &selection, schedule)
}

/// One round given `N_t` directly: partition, then relocate every sensor
/// against the same snapshot.
pub fn step_with_selection(
    state: &PlacementState,
    graph: &Graph,
    selection: &DMatrix<f64>,
    schedule: Schedule,
) -> Result<PlacementStep> {
    let partition = voronoi_partition(graph, &state.positions)?;
    let relocate = |i: usize| relocate_sensor(state, graph, &partition, selection, i);
    let moves: Vec<SensorMove> = match schedule {
        #[cfg(feature = "parallel")]
        Schedule::Parallel => {
            use rayon::prelude::*;
            (0..state.n_sensors()).into_par_iter().map(relocate).collect::<Result<Vec<_>>>()?
        }
        _ => (0..state.n_sensors()).map(relocate).collect::<Result<Vec<_>>>()?,
    };
    let positions: Vec<usize> = moves.iter().map(|m| m.to).collect();
    let next = PlacementState::new(positions, state.hop_limit, graph.n_nodes())?;
    Ok(PlacementStep { next, moves, partition })
}

/// Distributed versus centralized selection on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Positions chosen by the per-region rule.
    pub distributed: Vec<usize>,
    /// `Psi(q_i*)`, each against the other sensors' current positions.
    pub distributed_scores: Vec<f64>,
    /// Greedy picks over the whole node set.
    pub centralized: Vec<usize>,
    /// Greedy increments `Psi(r_i*)` against the earlier picks.
    pub centralized_scores: Vec<f64>,
}

impl GapReport {
    pub fn distributed_sum(&self) -> f64 {
        self.distributed_scores.iter().sum()
    }

    pub fn centralized_sum(&self) -> f64 {
        self.centralized_scores.iter().sum()
    }

    /// `sum Psi(r*) >= sum Psi(q*)`, up to `rel_tol` of the centralized sum.
    pub fn upper_bound_holds(&self, rel_tol: f64) -> bool {
        let c = self.centralized_sum();
        c + rel_tol * c.abs() >= self.distributed_sum()
    }

    /// `sum Psi(q*) >= sum Psi(r*) / K`, up to `rel_tol` of the centralized sum.
    pub fn lower_bound_holds(&self, rel_tol: f64) -> bool {
        let c = self.centralized_sum();
        let k = self.centralized.len() as f64;
        self.distributed_sum() + rel_tol * c.abs() >= c / k
    }
}

/// Compares one distributed round against centralized greedy selection of
/// the same number of sensors from all of `V`.
///
/// The centralized side keeps going with zero increments once `N` runs out
/// of rank, so both sides always place `K` sensors.
pub fn distributed_gap_check(selection: &DMatrix<f64>, graph: &Graph, state: &PlacementState) -> Result<GapReport> {
    let round = step_with_selection(state, graph, selection, Schedule::Sequential)?;
    let distributed: Vec<usize> = round.moves.iter().map(|m| m.to).collect();
    let distributed_scores: Vec<f64> = round.moves.iter().map(|m| m.score).collect();

    let z = selection.tr_mul(selection);
    let mut greedy = SelectionState::new(&z)?;
    for _ in 0..state.n_sensors() {
        if greedy.push_best().is_err() {
            let (y, _) = greedy.best().ok_or(Error::InvalidParameter("more sensors than nodes"))?;
            greedy.push(y)?;
        }
    }
    let centralized = greedy.chosen().to_vec();
    let centralized_scores = greedy.increments().iter().map(|&v| v.max(0.0)).collect();
    Ok(GapReport { distributed, distributed_scores, centralized, centralized_scores })
}
