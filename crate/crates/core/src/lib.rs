//! Fleet-mix optimisation for fixed and modular vehicle fleets.
//!
//! The crate is organised bottom-up:
//!
//! * [`netlab`] builds ring and morphed small-world networks and measures them.
//! * [`scengen`] samples time-windowed transport tasks over a network.
//! * [`fleet`] holds vehicle/module catalogs, fleet mixes and the objectives.
//! * [`dispatch`] simulates a fleet executing a scenario and repairs mixes.
//! * [`moea`] searches fleet mixes with a Pareto-archiving evolutionary loop.
//! * [`harness`] runs replicated experiment sweeps and writes CSV and SVG.

pub mod dispatch;
pub mod error;
pub mod fleet;
pub mod harness;
pub mod moea;
pub mod netlab;
pub mod scengen;
pub mod seed;

pub use dispatch::{simulate, DispatchConfig, ScheduleResult, Simulator, TrafficLog};
pub use error::{Error, Result};
pub use fleet::{FleetCatalog, FleetMix, FleetMode, ModuleType, VehicleKind, VehicleType};
pub use moea::{best_cost, evolve, Individual, Objectives, ParetoArchive, SolverConfig};
pub use netlab::{Graph, NodeId, Topology};
pub use scengen::{generate_scenario, Scenario, ScenarioConfig, Size, Task, TaskType};

/// Whole minutes.
pub type Minutes = u32;
