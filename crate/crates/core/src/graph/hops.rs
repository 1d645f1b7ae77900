use alloc::vec;
use alloc::vec::Vec;

use super::Graph;
use crate::{Error, Result};

/// Distance reported for nodes that no source can reach.
pub const UNREACHABLE: usize = usize::MAX;

/// Result of a multi-source breadth-first search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopDistances {
    /// Hop count from each node to its nearest source.
    pub distance: Vec<usize>,
    /// Position (in the `sources` slice) of the nearest source; the lowest
    /// position wins ties. `usize::MAX` for unreachable nodes.
    pub nearest: Vec<usize>,
}

/// Unweighted hop distance from every node to the nearest of `sources`.
///
/// Edge weights are ignored. The search is level-synchronous so that a node
/// reached at the same depth from several sources records the lowest source
/// position.
pub fn hop_distances(graph: &Graph, sources: &[usize]) -> Result<HopDistances> {
    let n = graph.n_nodes();
    if sources.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let mut distance = vec![UNREACHABLE; n];
    let mut nearest = vec![usize::MAX; n];
    let mut frontier = Vec::with_capacity(sources.len());
    for (pos, &s) in sources.iter().enumerate() {
        if s >= n {
            return Err(Error::NodeOutOfRange { index: s, n });
        }
        if distance[s] == 0 {
            // repeated source: the earlier position keeps the node
            continue;
        }
        distance[s] = 0;
        nearest[s] = pos;
        frontier.push(s);
    }
    let mut depth = 0;
    let mut next = Vec::new();
    while !frontier.is_empty() {
        depth += 1;
        for &u in &frontier {
            let owner = nearest[u];
            for &(v, _) in graph.neighbors(u) {
                if distance[v] == UNREACHABLE {
                    distance[v] = depth;
                    nearest[v] = owner;
                    next.push(v);
                } else if distance[v] == depth && owner < nearest[v] {
                    nearest[v] = owner;
                }
            }
        }
        core::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    Ok(HopDistances { distance, nearest })
}

/// Nodes within `limit` hops of `center` (inclusive), in ascending index
/// order. `None` means no limit.
pub fn within_hops(graph: &Graph, center: usize, limit: Option<usize>) -> Vec<usize> {
    let n = graph.n_nodes();
    let mut distance = vec![UNREACHABLE; n];
    distance[center] = 0;
    let mut reached = vec![center];
    let mut frontier = vec![center];
    let mut next = Vec::new();
    let mut depth = 0;
    while !frontier.is_empty() && limit.is_none_or(|p| depth < p) {
        depth += 1;
        for &u in &frontier {
            for &(v, _) in graph.neighbors(u) {
                if distance[v] == UNREACHABLE {
                    distance[v] = depth;
                    reached.push(v);
                    next.push(v);
                }
            }
        }
        core::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    reached.sort_unstable();
    reached
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn self_distance_is_zero() {
        let h = hop_distances(&path(3), &[1]).unwrap();
        assert_eq!(h.distance[1], 0);
        assert_eq!(h.nearest[1], 0);
    }

    #[test]
    fn path_from_one_end() {
        let h = hop_distances(&path(5), &[0]).unwrap();
        assert_eq!(h.distance, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn two_sources_take_pairwise_minimum() {
        let g = path(5);
        let h = hop_distances(&g, &[0, 4]).unwrap();
        let a = hop_distances(&g, &[0]).unwrap();
        let b = hop_distances(&g, &[4]).unwrap();
        let expected: Vec<usize> = (0..5).map(|i| a.distance[i].min(b.distance[i])).collect();
        assert_eq!(h.distance, expected);
        assert_eq!(h.distance, vec![0, 1, 2, 1, 0]);
        // node 2 is tied and goes to the first source
        assert_eq!(h.nearest, vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn empty_sources_rejected() {
        assert_eq!(hop_distances(&path(3), &[]), Err(Error::EmptyNodeSet));
    }

    #[test]
    fn hop_balls() {
        let g = path(6);
        assert_eq!(within_hops(&g, 2, Some(0)), vec![2]);
        assert_eq!(within_hops(&g, 2, Some(1)), vec![1, 2, 3]);
        assert_eq!(within_hops(&g, 2, None), vec![0, 1, 2, 3, 4, 5]);
    }
}
