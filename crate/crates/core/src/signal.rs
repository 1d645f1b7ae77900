//! Synthetic time-varying graph signals and measurement noise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::{Graph, Spectrum};
use crate::{Error, Result};

/// Sample times `t_k = k * period` for `k = 1, 2, ...`.
///
/// Indexing starts at one because the bandlimited coefficients carry a
/// `1/t` envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub sampling_period: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl TimeGrid {
    pub fn new(sampling_period: f64, n_train: usize, n_test: usize) -> Result<Self> {
        if !(sampling_period > 0.0) || !sampling_period.is_finite() {
            return Err(Error::InvalidParameter("sampling period must be positive"));
        }
        Ok(TimeGrid { sampling_period, n_train, n_test })
    }

    /// Time of step `k` (`k >= 1`).
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.sampling_period
    }

    /// Times of the training steps `1..=n_train`.
    pub fn train_times(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n_train).map(|k| self.time(k))
    }

    /// Times of the test steps `n_train+1..=n_train+n_test`.
    pub fn test_times(&self) -> impl Iterator<Item = f64> + '_ {
        (self.n_train + 1..=self.n_train + self.n_test).map(|k| self.time(k))
    }
}

/// Signals in the span of the `M` lowest-frequency Laplacian eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedModel {
    basis: DMatrix<f64>,
}

impl BandlimitedModel {
    pub fn new(spectrum: &Spectrum, bandwidth: usize) -> Result<Self> {
        if bandwidth == 0 || bandwidth > spectrum.n_nodes() {
            return Err(Error::InvalidParameter("bandwidth must be in 1..=N"));
        }
        Ok(BandlimitedModel { basis: spectrum.low_band(bandwidth) })
    }

    pub fn bandwidth(&self) -> usize {
        self.basis.ncols()
    }

    /// The generator `U_{V,M}`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `d_t[i] = sin(10 t + pi i / M) / t + 1` for `i = 1..=M`.
    pub fn coefficients(&self, t: f64) -> Result<DVector<f64>> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter("time must be positive"));
        }
        let m = self.bandwidth() as f64;
        Ok(DVector::from_fn(self.bandwidth(), |row, _| {
            let phase = PI / m * (row + 1) as f64;
            libm::sin(10.0 * t + phase) / t + 1.0
        }))
    }

    pub fn signal(&self, t: f64) -> Result<DVector<f64>> {
        Ok(&self.basis * self.coefficients(t)?)
    }
}

/// Signals that are constant on each of three connected clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantModel {
    n_nodes: usize,
    clusters: Vec<Vec<usize>>,
}

/// Number of clusters the coefficient law is defined for.
pub const PC_CLUSTERS: usize = 3;

impl PiecewiseConstantModel {
    /// `clusters` must partition `0..n_nodes` into exactly three sets.
    pub fn new(n_nodes: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        if clusters.len() != PC_CLUSTERS {
            return Err(Error::InvalidParameter("piecewise-constant model needs exactly 3 clusters"));
        }
        let mut seen = vec![false; n_nodes];
        for &node in clusters.iter().flatten() {
            if node >= n_nodes {
                return Err(Error::NodeOutOfRange { index: node, n: n_nodes });
            }
            if core::mem::replace(&mut seen[node], true) {
                return Err(Error::DuplicateNode(node));
            }
        }
        if seen.iter().any(|s| !s) || clusters.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter("clusters must cover every node and be nonempty"));
        }
        Ok(PiecewiseConstantModel { n_nodes, clusters })
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// Cluster indicator matrix `[1_T1, 1_T2, 1_T3]`.
    pub fn generator(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n_nodes, self.clusters.len());
        for (j, cluster) in self.clusters.iter().enumerate() {
            for &node in cluster {
                a[(node, j)] = 1.0;
            }
        }
        a
    }

    /// `3 (exp(-t/25) sin(w_i t + s_i) + 1)` with `(w, s)` = `(1, pi/3)`,
    /// `(2, 0)`, `(3, -pi/3)`.
    pub fn coefficients(&self, t: f64) -> DVector<f64> {
        const LAWS: [(f64, f64); PC_CLUSTERS] = [(1.0, PI / 3.0), (2.0, 0.0), (3.0, -PI / 3.0)];
        let envelope = libm::exp(-t / 25.0);
        DVector::from_iterator(
            PC_CLUSTERS,
            LAWS.iter().map(|&(w, s)| 3.0 * (envelope * libm::sin(w * t + s) + 1.0)),
        )
    }

    pub fn signal(&self, t: f64) -> DVector<f64> {
        let d = self.coefficients(t);
        let mut x = DVector::zeros(self.n_nodes);
        for (j, cluster) in self.clusters.iter().enumerate() {
            for &node in cluster {
                x[node] = d[j];
            }
        }
        x
    }
}

/// Splits a connected graph into `m` nonempty parts that each induce a
/// connected subgraph.
///
/// `m` random seed nodes start one region each; then a random region with an
/// unassigned neighbour absorbs one such neighbour, until every node is
/// taken.
pub fn random_connected_partition<R: Rng + ?Sized>(
    graph: &Graph,
    m: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let n = graph.n_nodes();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter("number of parts must be in 1..=N"));
    }
    const UNASSIGNED: usize = usize::MAX;
    let mut owner = vec![UNASSIGNED; n];
    let seeds = rand::seq::index::sample(rng, n, m).into_vec();
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (part, &seed) in seeds.iter().enumerate() {
        owner[seed] = part;
    }
    for (part, &seed) in seeds.iter().enumerate() {
        frontier[part].extend(graph.neighbors(seed).iter().map(|&(v, _)| v).filter(|&v| owner[v] == UNASSIGNED));
    }
    let mut assigned = m;
    while assigned < n {
        for list in frontier.iter_mut() {
            list.retain(|&v| owner[v] == UNASSIGNED);
        }
        let active: Vec<usize> = (0..m).filter(|&p| !frontier[p].is_empty()).collect();
        let Some(&part) = active.choose(rng) else {
            return Err(Error::PartitionFailed { parts: m });
        };
        let pick = rng.random_range(0..frontier[part].len());
        let node = frontier[part].swap_remove(pick);
        owner[node] = part;
        assigned += 1;
        for &(v, _) in graph.neighbors(node) {
            if owner[v] == UNASSIGNED {
                frontier[part].push(v);
            }
        }
    }
    let mut parts = vec![Vec::new(); m];
    for (node, &part) in owner.iter().enumerate() {
        parts[part].push(node);
    }
    Ok(parts)
}

/// `x + m` with `m[i] ~ N(0, variance)` i.i.d.
pub fn add_noise<R: Rng + ?Sized>(x: &DVector<f64>, variance: f64, rng: &mut R) -> Result<DVector<f64>> {
    Ok(x + noise_vector(x.len(), variance, rng)?)
}

/// A length-`n` vector of i.i.d. `N(0, variance)` draws.
pub fn noise_vector<R: Rng + ?Sized>(n: usize, variance: f64, rng: &mut R) -> Result<DVector<f64>> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::InvalidParameter("noise variance must be nonnegative"));
    }
    if variance == 0.0 {
        return Ok(DVector::zeros(n));
    }
    let sd = libm::sqrt(variance);
    Ok(DVector::from_fn(n, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        sd * z
    }))
}
