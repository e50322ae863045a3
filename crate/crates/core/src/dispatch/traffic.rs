use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::netlab::NodeId;
use crate::Minutes;

/// Node crossing timestamps, kept sorted per node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficLog {
    crossings: Vec<Vec<Minutes>>,
}

impl TrafficLog {
    pub fn new(nodes: usize) -> Self {
        TrafficLog { crossings: vec![Vec::new(); nodes] }
    }

    pub fn record(&mut self, node: NodeId, at: Minutes) {
        let list = &mut self.crossings[node];
        let pos = list.partition_point(|&t| t <= at);
        list.insert(pos, at);
    }

    /// Logs a traversal of `path` that leaves its first node at `depart`,
    /// one node every `edge_min` minutes.
    pub fn record_path(&mut self, path: &[NodeId], depart: Minutes, edge_min: Minutes) {
        for (i, &v) in path.iter().enumerate() {
            self.record(v, depart + i as Minutes * edge_min);
        }
    }

    /// Crossings of `node` in the half-open window `(now - y, now]`.
    pub fn count_window(&self, node: NodeId, now: Minutes, y: Minutes) -> usize {
        if y == 0 {
            return 0;
        }
        let list = &self.crossings[node];
        let hi = list.partition_point(|&t| t <= now);
        let lo = match now.checked_sub(y) {
            Some(floor) => list.partition_point(|&t| t <= floor),
            None => 0,
        };
        hi - lo
    }

    pub fn node_crossings(&self, node: NodeId) -> &[Minutes] {
        &self.crossings[node]
    }

    pub fn total(&self) -> usize {
        self.crossings.iter().map(Vec::len).sum()
    }
}

/// Penalty for taking `route` at `now`: the busiest node on the route
/// (endpoints included) over the last `y` minutes, times `rate` times the
/// vehicle's purchase cost.
pub fn route_penalty(
    route: &[NodeId],
    log: &TrafficLog,
    now: Minutes,
    y: Minutes,
    rate: f64,
    purchase_cost: f64,
) -> f64 {
    let busiest = route.iter().map(|&v| log.count_window(v, now, y)).max().unwrap_or(0);
    busiest as f64 * rate * purchase_cost
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouteChoice {
    pub index: usize,
    pub route: Arc<[NodeId]>,
    pub penalty: f64,
}

/// Terms for picking a loaded route.
#[derive(Clone, Copy, Debug)]
pub struct RouteRequest {
    /// Departure from the origin, after loading.
    pub departure: Minutes,
    /// Latest arrival at the destination that still leaves time to unload.
    pub arrival_deadline: Minutes,
    pub edge_travel_min: Minutes,
    pub window_y: Minutes,
    pub penalty_rate: f64,
    /// Money per minute of travel added to the penalty when comparing routes.
    pub time_weight: f64,
    pub purchase_cost: f64,
}

/// Picks among `candidates` (sorted shortest first) the window-feasible
/// route with the lowest `time_weight * travel + penalty`; ties go to the
/// earlier candidate. Without a penalty window the shortest route wins.
/// `None` when no candidate arrives in time.
pub fn select_route(candidates: &[Arc<[NodeId]>], req: &RouteRequest, log: &TrafficLog) -> Option<RouteChoice> {
    let arrival = |r: &Arc<[NodeId]>| req.departure + (r.len() as Minutes - 1) * req.edge_travel_min;
    if req.window_y == 0 {
        let r = candidates.first().filter(|r| arrival(r) <= req.arrival_deadline)?;
        return Some(RouteChoice { index: 0, route: r.clone(), penalty: 0.0 });
    }
    let mut counts: Vec<Option<usize>> = Vec::new();
    let mut best: Option<(f64, usize, f64)> = None;
    for (i, r) in candidates.iter().enumerate() {
        if arrival(r) > req.arrival_deadline {
            // Candidates are sorted by length: later ones are slower still.
            break;
        }
        let mut busiest = 0;
        for &v in r.iter() {
            if counts.len() <= v {
                counts.resize(v + 1, None);
            }
            let c = *counts[v].get_or_insert_with(|| log.count_window(v, req.departure, req.window_y));
            busiest = busiest.max(c);
        }
        let penalty = busiest as f64 * req.penalty_rate * req.purchase_cost;
        let travel = f64::from(arrival(r) - req.departure);
        let score = req.time_weight * travel + penalty;
        if best.is_none_or(|(s, _, _)| score < s) {
            best = Some((score, i, penalty));
        }
    }
    best.map(|(_, index, penalty)| RouteChoice { index, route: candidates[index].clone(), penalty })
}
