//! Discrete-event simulation of a fleet serving a scenario.
//!
//! Tasks are taken in release order (ties by the policy's task priority).
//! At release each task is committed to a whole trip: deadhead to the
//! origin, load, the loaded route, unload, and the empty return to the
//! origin. Vehicles and modules therefore carry a "free at" time that may
//! lie in the future, and later tasks plan around it. Every node crossing
//! lands in the [`TrafficLog`], which prices congested routes.

mod engine;
mod policy;
mod traffic;

pub use policy::{DefaultPolicy, DispatchPolicy, EarliestPickupPolicy, VehicleOption};
pub use traffic::{route_penalty, select_route, RouteChoice, RouteRequest, TrafficLog};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fleet::{FleetCatalog, FleetMix, FleetMode};
use crate::netlab::{route_candidates, NodeId, ShortestPaths};
use crate::scengen::Scenario;
use crate::Minutes;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DispatchConfig {
    /// Load (and again unload) time per trip for fixed vehicles.
    pub waiting_fixed_min: Minutes,
    /// Load (and again unload) time per trip for modular vehicles.
    pub waiting_modular_min: Minutes,
    /// Look-back window for route congestion; 0 disables the penalty.
    pub penalty_window_y_min: Minutes,
    /// Fraction of the vehicle's purchase cost charged per crossing counted
    /// on the busiest node of the chosen route.
    pub penalty_rate: f64,
    /// Money per travel minute when comparing penalised routes.
    pub time_weight: f64,
    pub bundling: bool,
    /// Repair gives up after this many additions per task.
    pub repair_cap_per_task: usize,
}

impl Default for DispatchConfig {
    fn default() -> Self {
        DispatchConfig {
            waiting_fixed_min: 30,
            waiting_modular_min: 5,
            penalty_window_y_min: 0,
            penalty_rate: 0.001,
            time_weight: 0.0,
            bundling: true,
            repair_cap_per_task: 10,
        }
    }
}

impl DispatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty_rate >= 0.0 && self.time_weight >= 0.0) {
            return Err(invalid("penalty_rate and time_weight must be >= 0"));
        }
        Ok(())
    }

    pub fn waiting_for(&self, mode: FleetMode) -> Minutes {
        match mode {
            FleetMode::Fixed => self.waiting_fixed_min,
            FleetMode::Modular => self.waiting_modular_min,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task: u32,
    pub trip: u32,
    pub vehicle: u32,
    pub vehicle_type: String,
    pub module: Option<u32>,
    pub route: Arc<[NodeId]>,
    /// Loading begins.
    pub start: Minutes,
    /// Unloading ends.
    pub completion: Minutes,
}

/// One vehicle trip, possibly carrying two bundled loads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trip {
    pub vehicle: u32,
    pub tasks: Vec<u32>,
    pub modules: Vec<u32>,
    /// Leaves its previous node (equals `pickup` without a deadhead).
    pub dispatch_at: Minutes,
    pub deadhead: Option<Arc<[NodeId]>>,
    pub pickup: Minutes,
    pub departure: Minutes,
    pub route: Arc<[NodeId]>,
    pub completion: Minutes,
    pub return_route: Arc<[NodeId]>,
    /// Back at the origin and free for the next trip.
    pub released_at: Minutes,
    pub penalty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub feasible: bool,
    pub unserved_tasks: Vec<u32>,
    pub per_task: Vec<TaskRecord>,
    pub trips: Vec<Trip>,
    pub traffic_penalty_total: f64,
    pub acquisition_cost: f64,
    #[serde(rename = "objective_F")]
    pub objective_f: f64,
    /// Node crossings written to the traffic log.
    pub crossings: usize,
}

/// All simple routes between every ordered node pair, plus hop distances.
#[derive(Clone, Debug)]
pub(crate) struct RouteTable {
    n: usize,
    paths: Vec<Vec<Arc<[NodeId]>>>,
    shortest: ShortestPaths,
}

impl RouteTable {
    fn new(scenario: &Scenario) -> Result<Self> {
        let g = &scenario.graph;
        let n = g.node_count();
        let mut paths = Vec::with_capacity(n * n);
        for s in 0..n {
            for t in 0..n {
                paths.push(if s == t {
                    vec![Arc::from(vec![s])]
                } else {
                    route_candidates(g, s, t)?.into_iter().map(Arc::from).collect()
                });
            }
        }
        Ok(RouteTable { n, paths, shortest: ShortestPaths::new(g)? })
    }

    fn candidates(&self, s: NodeId, t: NodeId) -> &[Arc<[NodeId]>] {
        &self.paths[s * self.n + t]
    }

    fn hops(&self, s: NodeId, t: NodeId) -> u32 {
        self.shortest.distance(s, t)
    }
}

/// A scenario, catalog and configuration prepared for repeated runs over
/// different fleet mixes.
pub struct Simulator<'a> {
    scenario: &'a Scenario,
    catalog: &'a FleetCatalog,
    cfg: DispatchConfig,
    policy: Box<dyn DispatchPolicy + 'a>,
    routes: RouteTable,
    prep: engine::Prep,
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: &'a Scenario, catalog: &'a FleetCatalog, cfg: &DispatchConfig) -> Result<Self> {
        Self::with_policy(scenario, catalog, cfg, DefaultPolicy)
    }

    pub fn with_policy<P: DispatchPolicy + 'a>(
        scenario: &'a Scenario,
        catalog: &'a FleetCatalog,
        cfg: &DispatchConfig,
        policy: P,
    ) -> Result<Self> {
        catalog.validate()?;
        cfg.validate()?;
        let handling = 2 * cfg.waiting_for(catalog.mode);
        let prep = engine::Prep::new(scenario, handling, &policy);
        Ok(Simulator {
            scenario,
            catalog,
            cfg: cfg.clone(),
            policy: Box::new(policy),
            routes: RouteTable::new(scenario)?,
            prep,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn catalog(&self) -> &FleetCatalog {
        self.catalog
    }

    pub fn config(&self) -> &DispatchConfig {
        &self.cfg
    }

    /// Per-trip load plus unload time for this catalog's fleet mode.
    pub fn handling(&self) -> Minutes {
        2 * self.cfg.waiting_for(self.catalog.mode)
    }

    pub fn simulate(&self, mix: &FleetMix) -> Result<ScheduleResult> {
        Ok(self.run_counts(&mix.counts(self.catalog)?))
    }

    /// Runs a count vector (vehicle types, then module types, in catalog
    /// order).
    pub fn run_counts(&self, counts: &[u32]) -> ScheduleResult {
        engine::Run::new(self, counts).execute(false).0
    }

    /// Grows `counts` until every task is served: each pass adds the
    /// cheapest vehicle (or module) able to serve each task that would
    /// otherwise be dropped, placed at that task's origin. Returns the
    /// repaired counts and their (feasible) schedule.
    pub fn repair_counts(&self, counts: &[u32]) -> Result<(Vec<u32>, ScheduleResult)> {
        let cap = self.cfg.repair_cap_per_task * self.scenario.tasks.len().max(1);
        let mut counts = counts.to_vec();
        let mut added = 0usize;
        loop {
            let (result, spawned) = engine::Run::new(self, &counts).execute(true);
            let extra: u32 = spawned.iter().sum();
            if extra == 0 {
                debug_assert!(result.feasible);
                return Ok((counts, result));
            }
            added += extra as usize;
            if added > cap {
                return Err(Error::RepairFailure { additions: added });
            }
            for (c, s) in counts.iter_mut().zip(&spawned) {
                *c += s;
            }
        }
    }

    pub fn repair(&self, mix: &FleetMix) -> Result<FleetMix> {
        let (counts, _) = self.repair_counts(&mix.counts(self.catalog)?)?;
        Ok(FleetMix::from_counts(self.catalog, &counts))
    }
}

/// One deterministic run of `mix` over `scenario`.
pub fn simulate(
    scenario: &Scenario,
    mix: &FleetMix,
    cat: &FleetCatalog,
    cfg: &DispatchConfig,
) -> Result<ScheduleResult> {
    Simulator::new(scenario, cat, cfg)?.simulate(mix)
}

/// Smallest greedy extension of `mix` that serves every task.
pub fn min_feasible_additions(
    scenario: &Scenario,
    mix: &FleetMix,
    cat: &FleetCatalog,
    cfg: &DispatchConfig,
) -> Result<FleetMix> {
    Simulator::new(scenario, cat, cfg)?.repair(mix)
}
