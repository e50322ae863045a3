//! Scenario sampling: streams of typed, sized, time-windowed transport
//! tasks over a routing network.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::netlab::{Graph, LongestRoutes, NodeId};
use crate::Minutes;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskType {
    Type1,
    Type2,
}

impl TaskType {
    pub const ALL: [TaskType; 2] = [TaskType::Type1, TaskType::Type2];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskType::Type1 => "type1",
            TaskType::Type2 => "type2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Size {
    Medium,
    Heavy,
}

impl Size {
    pub const ALL: [Size; 2] = [Size::Medium, Size::Heavy];

    /// Medium-equivalent load slots.
    pub fn slots(self) -> u32 {
        match self {
            Size::Medium => 1,
            Size::Heavy => 2,
        }
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Size::Medium => "medium",
            Size::Heavy => "heavy",
        })
    }
}

/// One transport task. All times are whole minutes from scenario start.
///
/// The start window is `[earliest_start, earliest_start + flexibility]`.
/// Completion is due by the latest start plus `duration` plus the fleet's
/// load/unload allowance (see [`Task::latest_completion`]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: u32,
    pub task_type: TaskType,
    pub size: Size,
    pub origin: NodeId,
    pub destination: NodeId,
    pub earliest_start: Minutes,
    pub duration: Minutes,
    pub flexibility: Minutes,
}

impl Task {
    pub fn latest_start(&self) -> Minutes {
        self.earliest_start + self.flexibility
    }

    /// Deadline for unloading to finish, given the per-trip handling time
    /// (load plus unload) of the serving fleet.
    pub fn latest_completion(&self, handling: Minutes) -> Minutes {
        self.latest_start() + self.duration + handling
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FlexibilityMode {
    /// Stored flexibility is zero; slack comes from choosing a route shorter
    /// than the longest one.
    RouteRelative,
    /// Flexibility is `alpha` times the task duration.
    Proportional { alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamMode {
    /// One arrival stream; origins drawn uniformly.
    Global,
    /// An independent arrival stream for every origin node.
    PerOriginNode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub edge_travel_min: Minutes,
    pub inter_task_min: Minutes,
    pub horizon_min: Minutes,
    pub flexibility_mode: FlexibilityMode,
    pub stream_mode: StreamMode,
    /// Probability that a task is of type 1.
    pub p_type1: f64,
    /// Probability that a task is heavy.
    pub p_heavy: f64,
    pub seed: u64,
    pub task_cap: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            edge_travel_min: 30,
            inter_task_min: 5,
            horizon_min: 720,
            flexibility_mode: FlexibilityMode::RouteRelative,
            stream_mode: StreamMode::PerOriginNode,
            p_type1: 0.5,
            p_heavy: 0.5,
            seed: 0,
            task_cap: 100_000,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_type1", self.p_type1), ("p_heavy", self.p_heavy)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if let FlexibilityMode::Proportional { alpha } = self.flexibility_mode {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(invalid(format!("flexibility alpha must be finite and >= 0, got {alpha}")));
            }
        }
        if self.edge_travel_min == 0 {
            return Err(invalid("edge_travel_min must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub graph: Graph,
    pub config: ScenarioConfig,
    pub tasks: Vec<Task>,
}

impl Scenario {
    /// Wraps hand-built tasks, checking endpoints and ordering. Tasks are
    /// sorted by earliest start (stable).
    pub fn new(graph: Graph, config: ScenarioConfig, mut tasks: Vec<Task>) -> Result<Self> {
        config.validate()?;
        graph.require_connected()?;
        for t in &tasks {
            graph.check_node(t.origin)?;
            graph.check_node(t.destination)?;
            if t.origin == t.destination {
                return Err(invalid(format!("task {} has origin == destination", t.id)));
            }
            if t.duration == 0 {
                return Err(invalid(format!("task {} has zero duration", t.id)));
            }
        }
        tasks.sort_by_key(|t| t.earliest_start);
        Ok(Scenario { graph, config, tasks })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Samples a scenario. Earliest starts in each stream advance by integer
/// gaps drawn uniformly from `0..=inter_task_min` until the horizon; task
/// type, size and destination are drawn independently; duration is the
/// longest-route travel time between the endpoints.
pub fn generate_scenario<R: Rng + ?Sized>(cfg: &ScenarioConfig, g: &Graph, rng: &mut R) -> Result<Scenario> {
    cfg.validate()?;
    g.require_connected()?;
    let n = g.node_count();
    if n < 2 {
        return Err(invalid("scenario needs at least two nodes"));
    }
    let longest = LongestRoutes::new(g)?;

    let streams: Vec<Option<NodeId>> = match cfg.stream_mode {
        StreamMode::Global => vec![None],
        StreamMode::PerOriginNode => (0..n).map(Some).collect(),
    };

    let mut tasks = Vec::new();
    'streams: for fixed_origin in streams {
        let mut start: Minutes = 0;
        loop {
            start += rng.gen_range(0..=cfg.inter_task_min);
            if start > cfg.horizon_min {
                break;
            }
            if tasks.len() == cfg.task_cap {
                if cfg.inter_task_min == 0 {
                    break 'streams;
                }
                return Err(Error::TaskCapExceeded { cap: cfg.task_cap });
            }
            let task_type = if rng.gen_bool(cfg.p_type1) { TaskType::Type1 } else { TaskType::Type2 };
            let size = if rng.gen_bool(cfg.p_heavy) { Size::Heavy } else { Size::Medium };
            let origin = fixed_origin.unwrap_or_else(|| rng.gen_range(0..n));
            let mut destination = rng.gen_range(0..n - 1);
            if destination >= origin {
                destination += 1;
            }
            let duration = longest.hops(origin, destination) * cfg.edge_travel_min;
            let flexibility = match cfg.flexibility_mode {
                FlexibilityMode::RouteRelative => 0,
                FlexibilityMode::Proportional { alpha } => (alpha * f64::from(duration)).round() as Minutes,
            };
            tasks.push(Task {
                id: 0,
                task_type,
                size,
                origin,
                destination,
                earliest_start: start,
                duration,
                flexibility,
            });
        }
    }
    tasks.sort_by_key(|t| t.earliest_start);
    for (i, t) in tasks.iter_mut().enumerate() {
        t.id = i as u32;
    }
    Ok(Scenario { graph: g.clone(), config: cfg.clone(), tasks })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub task_count: usize,
    /// Keyed `"<type>/<size>"`, e.g. `"type1/heavy"`.
    pub by_class: BTreeMap<String, usize>,
    pub mean_duration: f64,
    pub mean_flexibility: f64,
    pub max_duration: Minutes,
}

pub fn scenario_stats(s: &Scenario) -> ScenarioStats {
    let mut by_class = BTreeMap::new();
    for ty in TaskType::ALL {
        for size in Size::ALL {
            by_class.insert(format!("{ty}/{size}"), 0);
        }
    }
    let mut dur = 0u64;
    let mut flex = 0u64;
    let mut max_duration = 0;
    for t in &s.tasks {
        *by_class.get_mut(&format!("{}/{}", t.task_type, t.size)).unwrap() += 1;
        dur += u64::from(t.duration);
        flex += u64::from(t.flexibility);
        max_duration = max_duration.max(t.duration);
    }
    let count = s.tasks.len();
    let mean = |x: u64| if count == 0 { 0.0 } else { x as f64 / count as f64 };
    ScenarioStats { task_count: count, by_class, mean_duration: mean(dur), mean_flexibility: mean(flex), max_duration }
}
