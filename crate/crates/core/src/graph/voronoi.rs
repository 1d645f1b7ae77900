use alloc::vec;
use alloc::vec::Vec;

use super::{hop_distances, Graph};
use crate::{Error, Result};

/// Partition of the node set into hop-distance Voronoi regions, one per
/// generator (sensor position).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoronoiPartition {
    generators: Vec<usize>,
    regions: Vec<Vec<usize>>,
    owner: Vec<usize>,
    distance: Vec<usize>,
}

impl VoronoiPartition {
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Region of generator `i`, sorted ascending.
    pub fn region(&self, i: usize) -> &[usize] {
        &self.regions[i]
    }

    pub fn regions(&self) -> &[Vec<usize>] {
        &self.regions
    }

    /// Index of the generator whose region contains `node`.
    pub fn owner(&self, node: usize) -> usize {
        self.owner[node]
    }

    /// Hop distance from `node` to its own generator.
    pub fn distance(&self, node: usize) -> usize {
        self.distance[node]
    }
}

/// Assigns every node to its nearest sensor by hop count. Nodes equidistant
/// from several sensors go to the one listed first.
pub fn voronoi_partition(graph: &Graph, sensors: &[usize]) -> Result<VoronoiPartition> {
    let n = graph.n_nodes();
    let mut seen = vec![false; n];
    for &s in sensors {
        if s >= n {
            return Err(Error::NodeOutOfRange { index: s, n });
        }
        if core::mem::replace(&mut seen[s], true) {
            return Err(Error::DuplicateNode(s));
        }
    }
    let hops = hop_distances(graph, sensors)?;
    let mut regions = vec![Vec::new(); sensors.len()];
    for node in 0..n {
        regions[hops.nearest[node]].push(node);
    }
    Ok(VoronoiPartition {
        generators: sensors.to_vec(),
        regions,
        owner: hops.nearest,
        distance: hops.distance,
    })
}
