//! Routing networks: ring construction, topology morphing and the two
//! topological statistics (characteristic path length and highest node
//! traffic) used to compare networks.

mod metrics;
mod paths;

pub use metrics::{char_path_length, traffic, NetworkMetrics, ShortestPaths};
pub use paths::{longest_route_hops, route_candidates, LongestRoutes, MAX_SEARCH_NODES};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type NodeId = usize;

/// Undirected simple graph with unit-hop edges.
///
/// Neighbour lists are kept sorted, so iteration order (and everything
/// derived from it) is deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDoc", into = "GraphDoc")]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
}

/// JSON form: `{"nodes": n, "edges": [[u, v], ...]}` with `u < v`, sorted.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct GraphDoc {
    nodes: usize,
    edges: Vec<[NodeId; 2]>,
}

impl TryFrom<GraphDoc> for Graph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        Graph::from_edges(doc.nodes, doc.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Graph> for GraphDoc {
    fn from(g: Graph) -> Self {
        GraphDoc { nodes: g.node_count(), edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect() }
    }
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops, out-of-range endpoints
    /// and repeated pairs are rejected.
    pub fn from_edges<I>(nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if nodes == 0 {
            return Err(invalid("graph needs at least one node"));
        }
        let mut sets = vec![BTreeSet::new(); nodes];
        for (u, v) in edges {
            if u >= nodes || v >= nodes {
                return Err(invalid(format!("edge ({u}, {v}) out of range for {nodes} nodes")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at node {u}")));
            }
            if !sets[u].insert(v) {
                return Err(invalid(format!("duplicate edge ({u}, {v})")));
            }
            sets[v].insert(u);
        }
        Ok(Self::from_sets(sets))
    }

    fn from_sets(sets: Vec<BTreeSet<NodeId>>) -> Self {
        Graph { adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect() }
    }

    /// Cycle on `n >= 3` nodes.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("ring needs at least 3 nodes, got {n}")));
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::from_edges(n, (1..n).map(|v| (v - 1, v)))
    }

    /// Node 0 joined to `leaves` leaf nodes.
    pub fn star(leaves: usize) -> Result<Self> {
        Self::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v)))
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Sorted edge list with `u < v`.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    pub(crate) fn check_node(&self, v: NodeId) -> Result<()> {
        if v >= self.node_count() {
            return Err(invalid(format!("node {v} out of range for {} nodes", self.node_count())));
        }
        Ok(())
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Domain("graph is disconnected".into()))
        }
    }
}

/// Result of one morph step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morph {
    pub graph: Graph,
    pub chosen_a: NodeId,
    pub chosen_b: NodeId,
}

/// Applies the morph step to a fixed pair: every link of `a` is handed to
/// `b`, `a` loses its links and is then joined to `b` alone. Transferred
/// links that would become self-loops or duplicates are dropped.
pub fn morph_nodes(g: &Graph, a: NodeId, b: NodeId) -> Result<Graph> {
    g.check_node(a)?;
    g.check_node(b)?;
    if a == b {
        return Err(invalid("morph needs two distinct nodes"));
    }
    let mut sets: Vec<BTreeSet<NodeId>> = g.adjacency.iter().map(|ns| ns.iter().copied().collect()).collect();
    let moved = std::mem::take(&mut sets[a]);
    for &x in &moved {
        sets[x].remove(&a);
    }
    for &x in &moved {
        if x != b {
            sets[b].insert(x);
            sets[x].insert(b);
        }
    }
    sets[a].insert(b);
    sets[b].insert(a);
    Ok(Graph::from_sets(sets))
}

/// Random morph. With an empty `bias` both nodes are drawn uniformly
/// without replacement; otherwise B is drawn from `bias` and A from the
/// remaining nodes.
pub fn morph<R: Rng + ?Sized>(g: &Graph, rng: &mut R, bias: &[NodeId]) -> Result<Morph> {
    let n = g.node_count();
    if n < 3 {
        return Err(invalid("morph needs at least 3 nodes"));
    }
    g.require_connected()?;
    for &v in bias {
        g.check_node(v)?;
    }
    let (a, b) = if bias.is_empty() {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        (a, b)
    } else {
        let b = *bias.choose(rng).expect("non-empty bias");
        (pick_other(n, b, rng), b)
    };
    Ok(Morph { graph: morph_nodes(g, a, b)?, chosen_a: a, chosen_b: b })
}

fn pick_other<R: Rng + ?Sized>(n: usize, skip: NodeId, rng: &mut R) -> NodeId {
    let mut v = rng.gen_range(0..n - 1);
    if v >= skip {
        v += 1;
    }
    v
}

/// Network families compared in the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Ring,
    Sw1,
    Sw2,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::Ring, Topology::Sw1, Topology::Sw2];

    pub fn name(self) -> &'static str {
        match self {
            Topology::Ring => "ring",
            Topology::Sw1 => "sw1",
            Topology::Sw2 => "sw2",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ring" => Ok(Topology::Ring),
            "sw1" => Ok(Topology::Sw1),
            "sw2" => Ok(Topology::Sw2),
            other => Err(invalid(format!("unknown topology {other:?}"))),
        }
    }
}

/// Builds a network of the given family. SW1 is one morph of the ring; SW2
/// morphs SW1 again with the first morph's B reused as the second morph's
/// B (probability `sw2_reuse_as_b`) or as its A.
pub fn build_network<R: Rng + ?Sized>(kind: Topology, nodes: usize, rng: &mut R, sw2_reuse_as_b: f64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&sw2_reuse_as_b) {
        return Err(invalid("sw2_reuse_as_b must be a probability"));
    }
    let ring = Graph::ring(nodes)?;
    if kind == Topology::Ring {
        return Ok(ring);
    }
    let first = morph(&ring, rng, &[])?;
    if kind == Topology::Sw1 {
        return Ok(first.graph);
    }
    let hub = first.chosen_b;
    if rng.gen_bool(sw2_reuse_as_b) {
        Ok(morph(&first.graph, rng, &[hub])?.graph)
    } else {
        let b = pick_other(nodes, hub, rng);
        morph_nodes(&first.graph, hub, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nbrs(g: &Graph, v: NodeId) -> Vec<NodeId> {
        g.neighbors(v).to_vec()
    }

    #[test]
    fn ring_has_degree_two() {
        let g = Graph::ring(10).unwrap();
        assert_eq!(g.node_count(), 10);
        assert_eq!(g.edge_count(), 10);
        assert!((0..10).all(|v| g.degree(v) == 2));
        assert!(Graph::ring(2).is_err());
    }

    #[test]
    fn morph_opposite_nodes() {
        let g = morph_nodes(&Graph::ring(10).unwrap(), 0, 5).unwrap();
        assert_eq!(nbrs(&g, 5), vec![0, 1, 4, 6, 9]);
        assert_eq!(nbrs(&g, 0), vec![5]);
        assert_eq!(g.edge_count(), 11);
        assert!(g.is_connected());
    }

    #[test]
    fn morph_adjacent_drops_self_loop() {
        let g = morph_nodes(&Graph::ring(10).unwrap(), 0, 1).unwrap();
        assert_eq!(nbrs(&g, 1), vec![0, 2, 9]);
        assert_eq!(nbrs(&g, 0), vec![1]);
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn biased_morph_picks_b_from_bias() {
        let ring = Graph::ring(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = morph(&ring, &mut rng, &[3]).unwrap();
            assert_eq!(m.chosen_b, 3);
            assert_ne!(m.chosen_a, 3);
        }
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn json_form_is_sorted_edge_list() {
        let g = Graph::from_edges(4, [(3, 2), (1, 0), (2, 1)]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"nodes":4,"edges":[[0,1],[1,2],[2,3]]}"#);
        let back: Graph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Graph>(r#"{"nodes":2,"edges":[[1,1]]}"#).is_err());
    }

    #[test]
    fn sw_networks_keep_node_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in Topology::ALL {
            let g = build_network(kind, 10, &mut rng, 0.5).unwrap();
            assert_eq!(g.node_count(), 10);
            assert!(g.is_connected());
        }
    }
}
