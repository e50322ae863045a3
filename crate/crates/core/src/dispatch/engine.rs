use std::collections::BTreeSet;
use std::sync::Arc;

use super::traffic::{select_route, RouteRequest, TrafficLog};
use super::{DispatchPolicy, ScheduleResult, Simulator, TaskRecord, Trip, VehicleOption};
use crate::fleet::{acquisition_cost_counts, size_fits, FleetMode, VehicleKind};
use crate::netlab::NodeId;
use crate::scengen::{Scenario, Size, Task};
use crate::Minutes;

/// Per-scenario data shared by every run: release order, deadlines and the
/// same-route task lists used for bundling.
#[derive(Clone, Debug)]
pub(super) struct Prep {
    order: Vec<usize>,
    deadlines: Vec<Minutes>,
    od_lists: Vec<Vec<usize>>,
    od_pos: Vec<usize>,
}

impl Prep {
    pub(super) fn new(scenario: &Scenario, handling: Minutes, policy: &dyn DispatchPolicy) -> Self {
        let tasks = &scenario.tasks;
        let n = scenario.graph.node_count();
        let deadlines: Vec<Minutes> = tasks.iter().map(|t| t.latest_completion(handling)).collect();
        let mut order: Vec<usize> = (0..tasks.len()).collect();
        order.sort_by_key(|&i| (tasks[i].earliest_start, policy.task_priority(&tasks[i], deadlines[i]), tasks[i].id));
        let mut od_lists = vec![Vec::new(); n * n];
        let mut od_pos = vec![0; tasks.len()];
        for &i in &order {
            let list = &mut od_lists[tasks[i].origin * n + tasks[i].destination];
            od_pos[i] = list.len();
            list.push(i);
        }
        Prep { order, deadlines, od_lists, od_pos }
    }
}

/// Units already in service, grouped by (type, node) and ordered by the
/// time they become free.
struct Pool {
    nodes: usize,
    idle: Vec<BTreeSet<(Minutes, u32)>>,
}

impl Pool {
    fn new(types: usize, nodes: usize) -> Self {
        Pool { nodes, idle: vec![BTreeSet::new(); types * nodes] }
    }

    fn set(&self, ty: usize, node: NodeId) -> &BTreeSet<(Minutes, u32)> {
        &self.idle[ty * self.nodes + node]
    }

    fn first(&self, ty: usize, node: NodeId) -> Option<(Minutes, u32)> {
        self.set(ty, node).first().copied()
    }

    fn insert(&mut self, ty: usize, node: NodeId, free: Minutes, id: u32) {
        self.idle[ty * self.nodes + node].insert((free, id));
    }

    fn remove(&mut self, ty: usize, node: NodeId, free: Minutes, id: u32) {
        let removed = self.idle[ty * self.nodes + node].remove(&(free, id));
        debug_assert!(removed);
    }
}

/// Units of each type not yet used in this run, lowest id first.
struct Reserve {
    ids: Vec<Vec<u32>>,
    next: Vec<usize>,
}

impl Reserve {
    fn remaining(&self, ty: usize) -> usize {
        self.ids[ty].len() - self.next[ty]
    }

    fn peek(&self, ty: usize) -> Option<u32> {
        self.ids[ty].get(self.next[ty]).copied()
    }

    fn take(&mut self, ty: usize) -> u32 {
        let id = self.ids[ty][self.next[ty]];
        self.next[ty] += 1;
        id
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Source {
    Deployed { id: u32, node: NodeId, free: Minutes },
    Fresh,
}

/// A deployed module: it stays at `home` and holds disjoint busy intervals
/// there. Times before `floor` are unusable (it arrived then).
#[derive(Clone, Debug)]
struct ModuleUnit {
    home: NodeId,
    floor: Minutes,
    busy: Vec<(Minutes, Minutes)>,
}

impl ModuleUnit {
    /// End of the idle gap that covers `[from, to]`, if there is one.
    fn gap_end(&self, from: Minutes, to: Minutes) -> Option<Minutes> {
        if from < self.floor {
            return None;
        }
        let i = self.busy.partition_point(|&(s, _)| s < from);
        if i > 0 && self.busy[i - 1].1 > from {
            return None;
        }
        let end = self.busy.get(i).map_or(Minutes::MAX, |&(s, _)| s);
        (end >= to).then_some(end)
    }

    fn idle_after(&self, t: Minutes) -> bool {
        self.floor <= t && self.busy.last().is_none_or(|&(_, e)| e <= t)
    }

    fn reserve(&mut self, from: Minutes, to: Minutes) {
        let i = self.busy.partition_point(|&(s, _)| s < from);
        self.busy.insert(i, (from, to));
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum ModuleSource {
    AtOrigin(u32),
    /// Rides along with the motive on its deadhead.
    Carried(u32),
    Fresh,
}

#[derive(Clone, Copy, Debug)]
struct ModuleChoice {
    type_index: usize,
    source: ModuleSource,
    /// The module must be back before this minute.
    gap_end: Minutes,
}

#[derive(Clone, Copy, Debug)]
struct Choice {
    option: VehicleOption,
    source: Source,
    module: Option<ModuleChoice>,
}

struct Partner {
    task: usize,
    pickup: Minutes,
    modules: [Option<ModuleChoice>; 2],
}

enum Shortfall {
    Vehicle,
    Module,
}

pub(super) struct Run<'r, 'a> {
    sim: &'r Simulator<'a>,
    nodes: usize,
    edge: Minutes,
    waiting: Minutes,
    modular: bool,
    vehicle_types: usize,
    vpool: Pool,
    vreserve: Reserve,
    modules: Vec<ModuleUnit>,
    modules_at: Vec<Vec<u32>>,
    mreserve: Reserve,
    spawned: Vec<u32>,
    log: TrafficLog,
    assigned: Vec<bool>,
    per_task: Vec<TaskRecord>,
    trips: Vec<Trip>,
    unserved: Vec<u32>,
    penalty_total: f64,
}

impl<'r, 'a> Run<'r, 'a> {
    pub(super) fn new(sim: &'r Simulator<'a>, counts: &[u32]) -> Self {
        let cat = sim.catalog;
        let nodes = sim.scenario.graph.node_count();
        let nv = cat.vehicle_types.len();
        let nm = cat.module_types.len();
        let mut next = 0u32;
        let mut ids = |n: u32| {
            let v: Vec<u32> = (next..next + n).collect();
            next += n;
            v
        };
        let vids: Vec<Vec<u32>> = counts[..nv].iter().map(|&c| ids(c)).collect();
        let mut next = 0u32;
        let mut ids = |n: u32| {
            let v: Vec<u32> = (next..next + n).collect();
            next += n;
            v
        };
        let mids: Vec<Vec<u32>> = counts[nv..].iter().map(|&c| ids(c)).collect();
        let module_total = next as usize;
        let mut modules = Vec::with_capacity(module_total);
        for list in &mids {
            for _ in list {
                modules.push(ModuleUnit { home: 0, floor: 0, busy: Vec::new() });
            }
        }
        Run {
            sim,
            nodes,
            edge: sim.scenario.config.edge_travel_min,
            waiting: sim.cfg.waiting_for(cat.mode),
            modular: cat.mode == FleetMode::Modular,
            vehicle_types: nv,
            vpool: Pool::new(nv, nodes),
            vreserve: Reserve { ids: vids, next: vec![0; nv] },
            modules,
            modules_at: vec![Vec::new(); nm * nodes],
            mreserve: Reserve { ids: mids, next: vec![0; nm] },
            spawned: vec![0; cat.gene_count()],
            log: TrafficLog::new(nodes),
            assigned: vec![false; sim.scenario.tasks.len()],
            per_task: Vec::with_capacity(sim.scenario.tasks.len()),
            trips: Vec::new(),
            unserved: Vec::new(),
            penalty_total: 0.0,
        }
    }

    /// Runs the whole scenario. With `spawn`, tasks that would go unserved
    /// get freshly added units instead; the additions are returned as
    /// counts.
    pub(super) fn execute(mut self, spawn: bool) -> (ScheduleResult, Vec<u32>) {
        let sim = self.sim;
        for &i in &sim.prep.order {
            if self.assigned[i] {
                continue;
            }
            let task = &sim.scenario.tasks[i];
            let pickup_deadline = self.pickup_deadline(i);
            let choice = match self.best_choice(task, pickup_deadline) {
                Ok(c) => Some(c),
                Err(short) if spawn => Some(self.spawn_for(task, pickup_deadline, short)),
                Err(_) => None,
            };
            match choice {
                Some(c) => self.commit(i, c),
                None => self.unserved.push(task.id),
            }
        }
        self.unserved.sort_unstable();

        let cat = sim.catalog;
        let nv = self.vehicle_types;
        let mut counts = vec![0u32; cat.gene_count()];
        for (t, ids) in self.vreserve.ids.iter().enumerate() {
            counts[t] = ids.len() as u32;
        }
        for (t, ids) in self.mreserve.ids.iter().enumerate() {
            counts[nv + t] = ids.len() as u32;
        }
        let acquisition = acquisition_cost_counts(&counts, cat);
        let result = ScheduleResult {
            feasible: self.unserved.is_empty(),
            unserved_tasks: self.unserved,
            per_task: self.per_task,
            trips: self.trips,
            traffic_penalty_total: self.penalty_total,
            acquisition_cost: acquisition,
            objective_f: acquisition + self.penalty_total,
            crossings: self.log.total(),
        };
        (result, self.spawned)
    }

    fn fastest_min(&self, task: &Task) -> Minutes {
        self.sim.routes.hops(task.origin, task.destination) * self.edge
    }

    /// Latest minute loading may start and still finish on the fastest
    /// route.
    fn pickup_deadline(&self, i: usize) -> Minutes {
        let task = &self.sim.scenario.tasks[i];
        self.sim.prep.deadlines[i].saturating_sub(2 * self.waiting + self.fastest_min(task))
    }

    fn vehicle_fits(&self, ty: usize, task: &Task) -> bool {
        let v = &self.sim.catalog.vehicle_types[ty];
        size_fits(v.size, task.size)
            && match v.kind {
                VehicleKind::Fixed(payload) => payload == task.task_type,
                VehicleKind::Motive => true,
            }
    }

    fn module_type_for(&self, task: &Task) -> Option<usize> {
        self.sim.catalog.module_types.iter().position(|m| m.task_type == task.task_type)
    }

    /// A module of type `mt` for a trip loading at `origin` over
    /// `[pickup, done]`: one idle at the origin for that span (tightest gap
    /// first), else one left idle at the motive's node `from`, else an
    /// unused one.
    #[allow(clippy::too_many_arguments)]
    fn module_for(
        &self,
        mt: usize,
        origin: NodeId,
        from: NodeId,
        leaves_from: Minutes,
        pickup: Minutes,
        done: Minutes,
        taken: Option<ModuleChoice>,
    ) -> Option<ModuleChoice> {
        let clash = |source: ModuleSource| taken.is_some_and(|t| t.type_index == mt && t.source == source);
        let mut best: Option<(Minutes, u32)> = None;
        for &id in &self.modules_at[mt * self.nodes + origin] {
            if clash(ModuleSource::AtOrigin(id)) {
                continue;
            }
            if let Some(end) = self.modules[id as usize].gap_end(pickup, done) {
                if best.is_none_or(|(e, _)| end < e) {
                    best = Some((end, id));
                }
            }
        }
        if let Some((gap_end, id)) = best {
            return Some(ModuleChoice { type_index: mt, source: ModuleSource::AtOrigin(id), gap_end });
        }
        if from != origin {
            for &id in &self.modules_at[mt * self.nodes + from] {
                if !clash(ModuleSource::Carried(id)) && self.modules[id as usize].idle_after(leaves_from) {
                    return Some(ModuleChoice {
                        type_index: mt,
                        source: ModuleSource::Carried(id),
                        gap_end: Minutes::MAX,
                    });
                }
            }
        }
        let reserved = usize::from(clash(ModuleSource::Fresh));
        (self.mreserve.remaining(mt) > reserved).then_some(ModuleChoice {
            type_index: mt,
            source: ModuleSource::Fresh,
            gap_end: Minutes::MAX,
        })
    }

    fn vehicle_options(&self, task: &Task, pickup_deadline: Minutes) -> Vec<([u64; 4], VehicleOption, Source)> {
        let sim = self.sim;
        let o = task.origin;
        let es = task.earliest_start;
        let mut out = Vec::new();
        for ty in 0..self.vehicle_types {
            if !self.vehicle_fits(ty, task) {
                continue;
            }
            let cost = sim.catalog.vehicle_types[ty].purchase_cost;
            for u in 0..self.nodes {
                let Some((free, id)) = self.vpool.first(ty, u) else { continue };
                let dh_hops = sim.routes.hops(u, o);
                let pickup = (free + dh_hops * self.edge).max(es);
                if pickup > pickup_deadline {
                    continue;
                }
                let option = VehicleOption {
                    vehicle: id,
                    type_index: ty,
                    purchase_cost: cost,
                    fresh: false,
                    free_at: free,
                    pickup,
                    deadhead_hops: dh_hops,
                };
                out.push((sim.policy.vehicle_rank(&option), option, Source::Deployed { id, node: u, free }));
            }
            if let Some(id) = self.vreserve.peek(ty) {
                if es <= pickup_deadline {
                    let option = VehicleOption {
                        vehicle: id,
                        type_index: ty,
                        purchase_cost: cost,
                        fresh: true,
                        free_at: es,
                        pickup: es,
                        deadhead_hops: 0,
                    };
                    out.push((sim.policy.vehicle_rank(&option), option, Source::Fresh));
                }
            }
        }
        out.sort_by_key(|o| o.0);
        out
    }

    /// Best-ranked vehicle that can reach the origin in time and, in
    /// modular mode, find a module there for the whole trip.
    fn best_choice(&self, task: &Task, pickup_deadline: Minutes) -> Result<Choice, Shortfall> {
        let options = self.vehicle_options(task, pickup_deadline);
        if options.is_empty() {
            return Err(Shortfall::Vehicle);
        }
        if !self.modular {
            let (_, option, source) = options[0];
            return Ok(Choice { option, source, module: None });
        }
        let mt = self.module_type_for(task).ok_or(Shortfall::Module)?;
        let trip = 2 * self.waiting + self.fastest_min(task);
        for (_, option, source) in options {
            let (from, leaves) = match source {
                Source::Deployed { node, .. } => (node, option.pickup - option.deadhead_hops * self.edge),
                Source::Fresh => (task.origin, option.pickup),
            };
            if let Some(m) = self.module_for(mt, task.origin, from, leaves, option.pickup, option.pickup + trip, None) {
                return Ok(Choice { option, source, module: Some(m) });
            }
        }
        Err(Shortfall::Module)
    }

    /// Adds the cheapest units that let `task` be served, then picks
    /// again: a module when a motive is free but no module is, otherwise
    /// the cheapest compatible vehicle.
    fn spawn_for(&mut self, task: &Task, pickup_deadline: Minutes, mut short: Shortfall) -> Choice {
        let nv = self.vehicle_types;
        let cat = self.sim.catalog;
        loop {
            match short {
                Shortfall::Module => {
                    let mt = self.module_type_for(task).expect("modular catalog covers every task type");
                    let id = self.modules.len() as u32;
                    self.modules.push(ModuleUnit { home: task.origin, floor: 0, busy: Vec::new() });
                    self.mreserve.ids[mt].push(id);
                    self.spawned[nv + mt] += 1;
                }
                Shortfall::Vehicle => {
                    let ty = (0..nv)
                        .filter(|&t| self.vehicle_fits(t, task))
                        .min_by(|&a, &b| {
                            cat.vehicle_types[a].purchase_cost.total_cmp(&cat.vehicle_types[b].purchase_cost)
                        })
                        .expect("catalog has a vehicle for every task class");
                    let id = self.vreserve.ids.iter().map(Vec::len).sum::<usize>() as u32;
                    self.vreserve.ids[ty].push(id);
                    self.spawned[ty] += 1;
                }
            }
            match self.best_choice(task, pickup_deadline) {
                Ok(c) => return c,
                Err(s) => short = s,
            }
        }
    }

    /// A second medium load for a heavy vehicle: same origin and
    /// destination, released no later than this load's pickup deadline,
    /// and due late enough for one shared trip. Pickup slides to the later
    /// release. Returns the partner, the new pickup, and the modules for
    /// both loads.
    fn find_partner(&self, i: usize, choice: &Choice) -> Option<Partner> {
        let sim = self.sim;
        let tasks = &sim.scenario.tasks;
        let task = &tasks[i];
        let vtype = &sim.catalog.vehicle_types[choice.option.type_index];
        if !(sim.cfg.bundling && sim.policy.allow_bundling()) || vtype.size != Size::Heavy || task.size != Size::Medium
        {
            return None;
        }
        let trip = 2 * self.waiting + self.fastest_min(task);
        let own_deadline = self.pickup_deadline(i);
        let (from, leaves) = match choice.source {
            Source::Deployed { node, .. } => (node, choice.option.pickup - choice.option.deadhead_hops * self.edge),
            Source::Fresh => (task.origin, choice.option.pickup),
        };
        let list = &sim.prep.od_lists[task.origin * self.nodes + task.destination];
        for &j in &list[sim.prep.od_pos[i] + 1..] {
            let other = &tasks[j];
            if other.earliest_start > own_deadline {
                break;
            }
            if self.assigned[j] || other.size != Size::Medium {
                continue;
            }
            let pickup = choice.option.pickup.max(other.earliest_start);
            if pickup > self.pickup_deadline(j) {
                continue;
            }
            match vtype.kind {
                VehicleKind::Fixed(payload) => {
                    if payload == other.task_type {
                        return Some(Partner { task: j, pickup, modules: [None, None] });
                    }
                }
                VehicleKind::Motive => {
                    let shift = pickup - choice.option.pickup;
                    let first = self.module_for(
                        choice.module?.type_index,
                        task.origin,
                        from,
                        leaves + shift,
                        pickup,
                        pickup + trip,
                        None,
                    )?;
                    let Some(mt) = self.module_type_for(other) else { continue };
                    if let Some(second) =
                        self.module_for(mt, task.origin, from, leaves + shift, pickup, pickup + trip, Some(first))
                    {
                        return Some(Partner { task: j, pickup, modules: [Some(first), Some(second)] });
                    }
                }
            }
        }
        None
    }

    fn place_module(&mut self, m: ModuleChoice, origin: NodeId, pickup: Minutes, done: Minutes) -> u32 {
        let slot = |node: NodeId| m.type_index * self.nodes + node;
        let id = match m.source {
            ModuleSource::AtOrigin(id) => id,
            ModuleSource::Carried(id) => {
                let from = self.modules[id as usize].home;
                let list = &mut self.modules_at[slot(from)];
                list.retain(|&x| x != id);
                let unit = &mut self.modules[id as usize];
                unit.floor = pickup;
                unit.busy.clear();
                id
            }
            ModuleSource::Fresh => {
                let id = self.mreserve.take(m.type_index);
                self.modules[id as usize].floor = 0;
                id
            }
        };
        if m.source != ModuleSource::AtOrigin(id) {
            self.modules[id as usize].home = origin;
            let list = &mut self.modules_at[slot(origin)];
            let pos = list.partition_point(|&x| x < id);
            list.insert(pos, id);
        }
        self.modules[id as usize].reserve(pickup, done);
        id
    }

    fn commit(&mut self, i: usize, choice: Choice) {
        let sim = self.sim;
        let tasks = &sim.scenario.tasks;
        let task = &tasks[i];
        let (o, d) = (task.origin, task.destination);
        let partner = self.find_partner(i, &choice);

        let ty = choice.option.type_index;
        let (vehicle, from) = match choice.source {
            Source::Deployed { id, node, free } => {
                self.vpool.remove(ty, node, free, id);
                (id, node)
            }
            Source::Fresh => (self.vreserve.take(ty), o),
        };

        let pickup = partner.as_ref().map_or(choice.option.pickup, |p| p.pickup);
        let edge = self.edge;
        let (dispatch_at, deadhead) = if from == o {
            (pickup, None)
        } else {
            let path = sim.routes.candidates(from, o)[0].clone();
            let at = pickup - (path.len() as Minutes - 1) * edge;
            self.log.record_path(&path, at, edge);
            (at, Some(path))
        };

        let departure = pickup + self.waiting;
        let mut due = sim.prep.deadlines[i];
        let mut modules: Vec<ModuleChoice> = choice.module.into_iter().collect();
        if let Some(p) = &partner {
            due = due.min(sim.prep.deadlines[p.task]);
            if self.modular {
                modules = p.modules.iter().flatten().copied().collect();
            }
        }
        for m in &modules {
            due = due.min(m.gap_end);
        }
        let vtype = &sim.catalog.vehicle_types[ty];
        let req = RouteRequest {
            departure,
            arrival_deadline: due - self.waiting,
            edge_travel_min: edge,
            window_y: sim.cfg.penalty_window_y_min,
            penalty_rate: sim.cfg.penalty_rate,
            time_weight: sim.cfg.time_weight,
            purchase_cost: vtype.purchase_cost,
        };
        let route = select_route(sim.routes.candidates(o, d), &req, &self.log)
            .expect("the fastest route meets the pickup deadline");
        self.log.record_path(&route.route, departure, edge);
        let completion = departure + (route.route.len() as Minutes - 1) * edge + self.waiting;
        let back: Arc<[NodeId]> = sim.routes.candidates(d, o)[0].clone();
        self.log.record_path(&back, completion, edge);
        let released_at = completion + (back.len() as Minutes - 1) * edge;

        self.vpool.insert(ty, o, released_at, vehicle);
        let module_ids: Vec<u32> = modules.iter().map(|&m| self.place_module(m, o, pickup, completion)).collect();
        self.penalty_total += route.penalty;

        let trip = self.trips.len() as u32;
        let mut served = vec![i];
        if let Some(p) = &partner {
            served.push(p.task);
        }
        for (k, &t) in served.iter().enumerate() {
            self.assigned[t] = true;
            self.per_task.push(TaskRecord {
                task: tasks[t].id,
                trip,
                vehicle,
                vehicle_type: vtype.id.clone(),
                module: module_ids.get(k).copied(),
                route: route.route.clone(),
                start: pickup,
                completion,
            });
        }
        self.trips.push(Trip {
            vehicle,
            tasks: served.iter().map(|&t| tasks[t].id).collect(),
            modules: module_ids,
            dispatch_at,
            deadhead,
            pickup,
            departure,
            route: route.route,
            completion,
            return_route: back,
            released_at,
            penalty: route.penalty,
        });
    }
}
