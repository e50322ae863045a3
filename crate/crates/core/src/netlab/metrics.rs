use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// All-pairs hop distances and shortest-path multiplicities, one BFS per
/// source.
#[derive(Clone, Debug)]
pub struct ShortestPaths {
    n: usize,
    dist: Vec<u32>,
    sigma: Vec<u64>,
}

impl ShortestPaths {
    pub fn new(g: &Graph) -> Result<Self> {
        g.require_connected()?;
        let n = g.node_count();
        let mut dist = vec![u32::MAX; n * n];
        let mut sigma = vec![0u64; n * n];
        let mut queue = VecDeque::with_capacity(n);
        for s in 0..n {
            let row = s * n;
            dist[row + s] = 0;
            sigma[row + s] = 1;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let du = dist[row + u];
                for &w in g.neighbors(u) {
                    if dist[row + w] == u32::MAX {
                        dist[row + w] = du + 1;
                        queue.push_back(w);
                    }
                    if dist[row + w] == du + 1 {
                        sigma[row + w] += sigma[row + u];
                    }
                }
            }
        }
        Ok(ShortestPaths { n, dist, sigma })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn distance(&self, s: NodeId, t: NodeId) -> u32 {
        self.dist[s * self.n + t]
    }

    /// Number of distinct shortest paths from `s` to `t`.
    pub fn path_count(&self, s: NodeId, t: NodeId) -> u64 {
        self.sigma[s * self.n + t]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    pub char_path_length: f64,
    pub max_traffic: f64,
    pub per_node_traffic: Vec<u64>,
}

/// Mean shortest-path hop distance over ordered pairs of distinct nodes.
pub fn char_path_length(g: &Graph) -> Result<f64> {
    mean_distance(&ShortestPaths::new(g)?)
}

fn mean_distance(sp: &ShortestPaths) -> Result<f64> {
    let n = sp.node_count();
    if n < 2 {
        return Err(Error::Domain("path length needs at least two nodes".into()));
    }
    let total: u64 = sp.dist.iter().map(|&d| u64::from(d)).sum();
    Ok(total as f64 / (n * (n - 1)) as f64)
}

/// Per-node count of shortest paths passing through the node's interior,
/// over ordered source/target pairs, with every tied shortest path counted.
pub fn traffic(g: &Graph) -> Result<NetworkMetrics> {
    let sp = ShortestPaths::new(g)?;
    let n = sp.node_count();
    let mut per_node = vec![0u64; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let dst = sp.distance(s, t);
            for (v, slot) in per_node.iter_mut().enumerate() {
                if v != s && v != t && sp.distance(s, v) + sp.distance(v, t) == dst {
                    *slot += sp.path_count(s, v) * sp.path_count(v, t);
                }
            }
        }
    }
    let max = per_node.iter().copied().max().unwrap_or(0);
    Ok(NetworkMetrics {
        char_path_length: if n >= 2 { mean_distance(&sp)? } else { 0.0 },
        max_traffic: max as f64,
        per_node_traffic: per_node,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_ten_table_values() {
        let g = Graph::ring(10).unwrap();
        assert_eq!(char_path_length(&g).unwrap(), 25.0 / 9.0);
        let m = traffic(&g).unwrap();
        assert_eq!(m.max_traffic, 20.0);
        assert!(m.per_node_traffic.iter().all(|&c| c == 20));
    }

    #[test]
    fn small_cases() {
        assert_eq!(char_path_length(&Graph::ring(3).unwrap()).unwrap(), 1.0);
        assert_eq!(char_path_length(&Graph::ring(4).unwrap()).unwrap(), 4.0 / 3.0);
        assert_eq!(char_path_length(&Graph::complete(5).unwrap()).unwrap(), 1.0);
        assert_eq!(char_path_length(&Graph::path(3).unwrap()).unwrap(), 4.0 / 3.0);
        assert_eq!(traffic(&Graph::complete(6).unwrap()).unwrap().max_traffic, 0.0);
        let star = traffic(&Graph::star(4).unwrap()).unwrap();
        assert_eq!(star.per_node_traffic[0], 12);
        assert_eq!(star.max_traffic, 12.0);
    }

    #[test]
    fn even_ring_closed_form() {
        for n in (4..=14).step_by(2) {
            let l = char_path_length(&Graph::ring(n).unwrap()).unwrap();
            let expect = (n * n) as f64 / 4.0 / (n - 1) as f64;
            assert!((l - expect).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn disconnected_is_domain_error() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(char_path_length(&g), Err(Error::Domain(_))));
        assert!(matches!(traffic(&g), Err(Error::Domain(_))));
    }
}
