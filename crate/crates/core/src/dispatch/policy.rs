use crate::scengen::Task;
use crate::Minutes;

/// A vehicle that could take the task being dispatched.
#[derive(Clone, Copy, Debug)]
pub struct VehicleOption {
    pub vehicle: u32,
    pub type_index: usize,
    pub purchase_cost: f64,
    /// Never used before in this run.
    pub fresh: bool,
    /// When the vehicle was (or will be) free at its current node.
    pub free_at: Minutes,
    /// Loading can begin at this minute.
    pub pickup: Minutes,
    pub deadhead_hops: u32,
}

/// The three dispatch decisions: which released task goes first, which
/// vehicle takes it, and whether a heavy vehicle may pick up a second
/// medium load.
pub trait DispatchPolicy: Send + Sync {
    /// Order among tasks released in the same minute; smaller goes first.
    fn task_priority(&self, task: &Task, deadline: Minutes) -> u64;

    /// Smaller ranks win.
    fn vehicle_rank(&self, option: &VehicleOption) -> [u64; 4];

    fn allow_bundling(&self) -> bool;
}

/// Earliest deadline first; vehicles already in service before ones not yet
/// used, then the cheapest compatible type, the shortest deadhead, the
/// earliest pickup and the lowest id; greedy two-load bundling.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultPolicy;

impl DispatchPolicy for DefaultPolicy {
    fn task_priority(&self, _task: &Task, deadline: Minutes) -> u64 {
        u64::from(deadline)
    }

    fn vehicle_rank(&self, o: &VehicleOption) -> [u64; 4] {
        // Costs are positive, so their bit patterns order like the values.
        let near = (u64::from(o.deadhead_hops) << 32) | u64::from(o.pickup);
        [u64::from(o.fresh), o.purchase_cost.to_bits(), near, u64::from(o.vehicle)]
    }

    fn allow_bundling(&self) -> bool {
        true
    }
}

/// Earliest pickup regardless of vehicle price, no bundling. Kept for
/// comparison runs.
#[derive(Clone, Copy, Debug, Default)]
pub struct EarliestPickupPolicy;

impl DispatchPolicy for EarliestPickupPolicy {
    fn task_priority(&self, _task: &Task, deadline: Minutes) -> u64 {
        u64::from(deadline)
    }

    fn vehicle_rank(&self, o: &VehicleOption) -> [u64; 4] {
        [u64::from(o.fresh), u64::from(o.pickup), o.purchase_cost.to_bits(), u64::from(o.vehicle)]
    }

    fn allow_bundling(&self) -> bool {
        false
    }
}
