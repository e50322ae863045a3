//! Independent oracles and generators shared by the integration tests.

#![allow(dead_code)]

use modfleet::netlab::longest_route_hops;
use modfleet::{
    simulate, DispatchConfig, FleetCatalog, FleetMix, Graph, Scenario, ScenarioConfig, Size, Task, TaskType,
};
use rand::Rng;

/// A random connected graph: a random spanning tree plus extra edges.
pub fn random_connected_graph<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
            edges.push((a, b));
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

fn simple_paths(g: &Graph, path: &mut Vec<usize>, t: usize, out: &mut Vec<Vec<usize>>) {
    let u = *path.last().unwrap();
    if u == t {
        out.push(path.clone());
        return;
    }
    for &w in g.neighbors(u) {
        if !path.contains(&w) {
            path.push(w);
            simple_paths(g, path, t, out);
            path.pop();
        }
    }
}

/// Path length and per-node interior counts from brute-force enumeration
/// of every simple path between every ordered pair.
pub fn oracle_metrics(g: &Graph) -> (f64, Vec<u64>) {
    let n = g.node_count();
    let mut total = 0usize;
    let mut per_node = vec![0u64; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let mut all = Vec::new();
            simple_paths(g, &mut vec![s], t, &mut all);
            let shortest = all.iter().map(Vec::len).min().unwrap();
            total += shortest - 1;
            for p in all.iter().filter(|p| p.len() == shortest) {
                for &v in &p[1..p.len() - 1] {
                    per_node[v] += 1;
                }
            }
        }
    }
    (total as f64 / (n * (n - 1)) as f64, per_node)
}

/// A handful of tasks on a small random network, with durations equal to
/// the longest route like generated scenarios.
pub fn tiny_scenario<R: Rng>(rng: &mut R, tasks: usize) -> Scenario {
    let n = rng.gen_range(4..=6);
    let graph = random_connected_graph(n, rng);
    let config = ScenarioConfig::default();
    let mut list = Vec::with_capacity(tasks);
    for id in 0..tasks as u32 {
        let origin = rng.gen_range(0..n);
        let mut destination = rng.gen_range(0..n - 1);
        if destination >= origin {
            destination += 1;
        }
        let hops = longest_route_hops(&graph, origin, destination).unwrap();
        list.push(Task {
            id,
            task_type: if rng.gen_bool(0.5) { TaskType::Type1 } else { TaskType::Type2 },
            size: if rng.gen_bool(0.5) { Size::Heavy } else { Size::Medium },
            origin,
            destination,
            earliest_start: rng.gen_range(0..=(4 * tasks as u32)),
            duration: hops * config.edge_travel_min,
            flexibility: [0, 0, 15, 60][rng.gen_range(0..4)],
        });
    }
    Scenario::new(graph, config, list).unwrap()
}

/// Lowest F over every feasible mix whose counts are all at most `bound`.
pub fn enumerate_best(scenario: &Scenario, cat: &FleetCatalog, cfg: &DispatchConfig, bound: u32) -> Option<f64> {
    let genes = cat.gene_count();
    let mut counts = vec![0u32; genes];
    let mut best: Option<f64> = None;
    loop {
        let r = simulate(scenario, &FleetMix::from_counts(cat, &counts), cat, cfg).unwrap();
        if r.feasible && best.is_none_or(|b| r.objective_f < b) {
            best = Some(r.objective_f);
        }
        let mut g = 0;
        while g < genes && counts[g] == bound {
            counts[g] = 0;
            g += 1;
        }
        if g == genes {
            return best;
        }
        counts[g] += 1;
    }
}
