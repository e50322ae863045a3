use super::{Graph, NodeId};
use crate::error::{invalid, Error, Result};

/// Exhaustive path searches are limited to networks of this size.
pub const MAX_SEARCH_NODES: usize = 16;

fn check_search(g: &Graph, s: NodeId, t: NodeId) -> Result<()> {
    if g.node_count() > MAX_SEARCH_NODES {
        return Err(Error::UnsupportedSize { nodes: g.node_count(), limit: MAX_SEARCH_NODES });
    }
    g.check_node(s)?;
    g.check_node(t)?;
    if s == t {
        return Err(invalid("route endpoints must differ"));
    }
    Ok(())
}

/// Longest simple-path hop counts from one or all sources, computed by a
/// reachability sweep over visited-node sets.
#[derive(Clone, Debug)]
pub struct LongestRoutes {
    n: usize,
    hops: Vec<u32>,
}

impl LongestRoutes {
    pub fn new(g: &Graph) -> Result<Self> {
        let n = g.node_count();
        if n > MAX_SEARCH_NODES {
            return Err(Error::UnsupportedSize { nodes: n, limit: MAX_SEARCH_NODES });
        }
        let mut hops = vec![0u32; n * n];
        for s in 0..n {
            let row = from_source(g, s);
            hops[s * n..(s + 1) * n].copy_from_slice(&row);
        }
        Ok(LongestRoutes { n, hops })
    }

    /// 0 when `t` is unreachable from `s` or `s == t`.
    pub fn hops(&self, s: NodeId, t: NodeId) -> u32 {
        self.hops[s * self.n + t]
    }

    pub fn max_hops(&self) -> u32 {
        self.hops.iter().copied().max().unwrap_or(0)
    }
}

fn from_source(g: &Graph, s: NodeId) -> Vec<u32> {
    let n = g.node_count();
    // reach[mask * n + v]: some simple path from s visits exactly `mask`
    // and ends at v.
    let mut reach = vec![false; (1usize << n) * n];
    reach[(1usize << s) * n + s] = true;
    let mut best = vec![0u32; n];
    for mask in 1usize..(1 << n) {
        if mask & (1 << s) == 0 {
            continue;
        }
        let len = mask.count_ones() - 1;
        for v in 0..n {
            if !reach[mask * n + v] {
                continue;
            }
            if v != s {
                best[v] = best[v].max(len);
            }
            for &w in g.neighbors(v) {
                if mask & (1 << w) == 0 {
                    reach[(mask | (1 << w)) * n + w] = true;
                }
            }
        }
    }
    best
}

/// Hop count of the longest simple path from `s` to `t`.
pub fn longest_route_hops(g: &Graph, s: NodeId, t: NodeId) -> Result<u32> {
    check_search(g, s, t)?;
    match from_source(g, s)[t] {
        0 => Err(Error::Domain(format!("node {t} unreachable from {s}"))),
        h => Ok(h),
    }
}

/// Every simple path from `s` to `t`, shortest first, ties in lexicographic
/// node order.
pub fn route_candidates(g: &Graph, s: NodeId, t: NodeId) -> Result<Vec<Vec<NodeId>>> {
    check_search(g, s, t)?;
    let mut out = Vec::new();
    let mut path = vec![s];
    let mut on_path = vec![false; g.node_count()];
    on_path[s] = true;
    extend(g, t, &mut path, &mut on_path, &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

fn extend(g: &Graph, t: NodeId, path: &mut Vec<NodeId>, on_path: &mut [bool], out: &mut Vec<Vec<NodeId>>) {
    let u = *path.last().unwrap();
    if u == t {
        out.push(path.clone());
        return;
    }
    for &w in g.neighbors(u) {
        if !on_path[w] {
            on_path[w] = true;
            path.push(w);
            extend(g, t, path, on_path, out);
            path.pop();
            on_path[w] = false;
        }
    }
}
