//! Weighted undirected graphs and the structures derived from them.

mod generate;
mod hops;
mod spectrum;
mod voronoi;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub use generate::{knn_graph, random_sensor_graph, MAX_GENERATION_ATTEMPTS};
pub use hops::{hop_distances, within_hops, HopDistances, UNREACHABLE};
pub use spectrum::Spectrum;
pub use voronoi::{voronoi_partition, VoronoiPartition};

/// A connected, weighted, undirected graph without self loops.
///
/// Edges are kept as sorted adjacency lists so that hop searches and
/// Laplacian products stay linear in the number of edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<(usize, f64)>>,
    coordinates: Option<Vec<[f64; 2]>>,
}

impl Graph {
    /// Builds a graph from a dense weight matrix.
    pub fn from_weights(weights: &DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n != weights.ncols() {
            return Err(Error::NotSquare { rows: n, cols: weights.ncols() });
        }
        let mut edges = Vec::new();
        for row in 0..n {
            for col in 0..n {
                let w = weights[(row, col)];
                if w != weights[(col, row)] {
                    return Err(Error::NotSymmetric { row, col });
                }
                if row < col && w != 0.0 {
                    edges.push((row, col, w));
                } else if row == col && w != 0.0 {
                    return Err(Error::InvalidWeight { row, col, weight: w });
                }
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Builds a graph on `n` nodes from undirected edges `(u, v, weight)`.
    ///
    /// Each pair may appear at most once (in either orientation); weights
    /// must be finite and positive.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n < 1 {
            return Err(Error::TooFewNodes { min: 1, got: n });
        }
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            for idx in [u, v] {
                if idx >= n {
                    return Err(Error::NodeOutOfRange { index: idx, n });
                }
            }
            if u == v || !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidWeight { row: u, col: v, weight: w });
            }
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_by_key(|&(v, _)| v);
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(Error::NotSymmetric { row: u, col: pair[0].0 });
            }
        }
        let graph = Graph { adjacency, coordinates: None };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    /// Attaches planar node positions (used by generators and file output).
    pub fn with_coordinates(mut self, coordinates: Vec<[f64; 2]>) -> Result<Self> {
        if coordinates.len() != self.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_nodes(),
                got: coordinates.len(),
            });
        }
        self.coordinates = Some(coordinates);
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn coordinates(&self) -> Option<&[[f64; 2]]> {
        self.coordinates.as_deref()
    }

    /// Neighbors of `node` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Weighted degree (row sum of `W`).
    pub fn strength(&self, node: usize) -> f64 {
        self.adjacency[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        match self.adjacency[u].binary_search_by_key(&v, |&(n, _)| n) {
            Ok(pos) => self.adjacency[u][pos].1,
            Err(_) => 0.0,
        }
    }

    /// Undirected edges `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&(v, _)| v > u).map(move |&(v, w)| (u, v, w)))
    }

    pub fn weight_matrix(&self) -> DMatrix<f64> {
        let n = self.n_nodes();
        let mut w = DMatrix::zeros(n, n);
        for (u, v, weight) in self.edges() {
            w[(u, v)] = weight;
            w[(v, u)] = weight;
        }
        w
    }

    /// Combinatorial Laplacian `L = D - W` as a dense matrix.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n_nodes();
        let mut l = DMatrix::zeros(n, n);
        for u in 0..n {
            let mut degree = 0.0;
            for &(v, w) in &self.adjacency[u] {
                l[(u, v)] = -w;
                degree += w;
            }
            l[(u, u)] = degree;
        }
        l
    }

    /// `L x` without forming `L`.
    pub fn laplacian_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.n_nodes(), "signal length must match node count");
        DVector::from_iterator(
            self.n_nodes(),
            self.adjacency.iter().enumerate().map(|(u, list)| {
                list.iter().map(|&(v, w)| w * (x[u] - x[v])).sum::<f64>()
            }),
        )
    }

    fn component_count(&self) -> usize {
        let n = self.n_nodes();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        components
    }
}

/// Largest Laplacian eigenvalue estimated by power iteration.
///
/// The estimate approaches the true value from below; callers that need a
/// safe upper bound should pad it.
pub fn estimate_lambda_max(graph: &Graph, iterations: usize) -> f64 {
    let n = graph.n_nodes();
    // deterministic non-constant start (the constant vector is in the null space)
    let mut x = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 1000) as f64 / 1000.0);
    let norm = x.norm();
    x /= norm;
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let y = graph.laplacian_apply(&x);
        estimate = x.dot(&y);
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        x = y / ny;
    }
    estimate
}
