use alloc::vec::Vec;

use rand::Rng;

use super::Graph;
use crate::{Error, Result};

/// Attempts made by [`random_sensor_graph`] before giving up.
pub const MAX_GENERATION_ATTEMPTS: usize = 100;

const SENSOR_GRAPH_NEIGHBORS: usize = 6;

/// Random geometric "sensor" graph: `n` points uniform in the unit square,
/// each joined to its 6 nearest neighbours with Gaussian-kernel weights.
///
/// Point sets that produce a disconnected graph are redrawn from the same
/// generator, up to [`MAX_GENERATION_ATTEMPTS`] times.
pub fn random_sensor_graph<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Graph> {
    if n < 2 {
        return Err(Error::TooFewNodes { min: 2, got: n });
    }
    let k = SENSOR_GRAPH_NEIGHBORS.min(n - 1);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let points: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        match knn_graph(&points, k) {
            Ok(graph) => return Ok(graph),
            Err(Error::Disconnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed { attempts: MAX_GENERATION_ATTEMPTS })
}

/// Gaussian-kernel k-nearest-neighbour graph over planar points.
///
/// Weights are `exp(-d^2 / (2 sigma^2))` with `sigma` the mean distance from
/// a point to its `k` nearest neighbours. An edge is kept when either
/// endpoint lists the other among its neighbours. Distance ties are broken
/// by the lower point index. Returns [`Error::Disconnected`] rather than
/// patching the graph up.
pub fn knn_graph(coordinates: &[[f64; 2]], k: usize) -> Result<Graph> {
    let n = coordinates.len();
    if n < 2 {
        return Err(Error::TooFewNodes { min: 2, got: n });
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter("k must satisfy 1 <= k < number of points"));
    }
    let dist2 = |a: usize, b: usize| {
        let dx = coordinates[a][0] - coordinates[b][0];
        let dy = coordinates[a][1] - coordinates[b][1];
        dx * dx + dy * dy
    };

    let mut neighbour_lists: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    let mut distance_sum = 0.0;
    for i in 0..n {
        candidates.clear();
        candidates.extend((0..n).filter(|&j| j != i).map(|j| (dist2(i, j), j)));
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < candidates.len() {
            candidates.select_nth_unstable_by(k - 1, cmp);
        }
        let nearest = &mut candidates[..k];
        nearest.sort_unstable_by(cmp);
        distance_sum += nearest.iter().map(|&(d2, _)| libm::sqrt(d2)).sum::<f64>();
        neighbour_lists.push(nearest.iter().map(|&(d2, j)| (j, d2)).collect());
    }
    let sigma = distance_sum / (n * k) as f64;
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter("points must not all coincide"));
    }

    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(n * k);
    for (i, list) in neighbour_lists.iter().enumerate() {
        for &(j, d2) in list {
            let (u, v) = if i < j { (i, j) } else { (j, i) };
            // the kernel can underflow for far-apart pairs; keep the edge
            let w = libm::exp(-d2 / (2.0 * sigma * sigma)).max(f64::MIN_POSITIVE);
            edges.push((u, v, w));
        }
    }
    // symmetrise: the same pair may have been listed from both ends with the
    // same weight, keep the larger (they are equal for a symmetric kernel)
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(b.2.total_cmp(&a.2)));
    edges.dedup_by(|next, kept| next.0 == kept.0 && next.1 == kept.1);

    Graph::from_edges(n, &edges)?.with_coordinates(coordinates.to_vec())
}
