//! Replicated experiment sweeps with resumable CSV output.
//!
//! Seeds: replicate `r` gets `child(master_seed, r)`. From that seed the
//! network uses label `0x100 + topology`, the scenario `0x200 + topology`
//! and the solver `0x300 + topology * 0x100 + mode * 0x10` (see
//! [`crate::seed::child`]). Every fleet mode and sweep value of a replicate
//! sees the same network and task draws, and the sweep values of one
//! (topology, mode) share a solver stream as common random numbers.

mod chart;
mod summary;

pub use chart::render_chart;
pub use summary::{mean, spearman, std_error, summarize, RatioRow, Summary, SummaryCell};

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispatch::DispatchConfig;
use crate::error::{invalid, Result};
use crate::fleet::{FleetCatalog, FleetMode};
use crate::moea::{best_cost, evolve, SolverConfig};
use crate::netlab::{build_network, Topology};
use crate::scengen::{generate_scenario, FlexibilityMode, ScenarioConfig};
use crate::seed;
use crate::Minutes;

pub const RESULTS_FILE: &str = "results.csv";
pub const ERRORS_FILE: &str = "errors.csv";
pub const PLAN_FILE: &str = "plan.json";
pub const WORKERS_ENV: &str = "MODFLEET_WORKERS";

const RESULT_HEADER: [&str; 9] =
    ["topology", "fleet_mode", "sweep_value", "replicate_seed", "F", "diversity", "lane", "task_count", "runtime_ms"];

/// The swept variable and its values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variable", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    /// Traffic-penalty look-back window in minutes.
    PenaltyWindowY(Vec<Minutes>),
    /// Flexibility as a multiple of task duration; the penalty is off.
    FlexibilityAlpha(Vec<f64>),
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::PenaltyWindowY(v) => v.iter().map(|&y| f64::from(y)).collect(),
            Sweep::FlexibilityAlpha(v) => v.clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Sweep::PenaltyWindowY(_) => "penalty window y (min)",
            Sweep::FlexibilityAlpha(_) => "flexibility (x task duration)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub topologies: Vec<Topology>,
    pub fleet_modes: Vec<FleetMode>,
    pub sweep: Sweep,
    pub replicates: usize,
    pub nodes: usize,
    /// Chance that the second morph of SW2 reuses the first hub as its B.
    pub sw2_reuse_as_b: f64,
    pub scenario: ScenarioConfig,
    pub dispatch: DispatchConfig,
    pub solver: SolverConfig,
    pub master_seed: u64,
    /// Write wall-clock times into `runtime_ms`; off keeps reruns
    /// byte-identical.
    #[serde(default)]
    pub record_runtime: bool,
}

pub const DEFAULT_Y: [Minutes; 6] = [0, 15, 30, 60, 120, 240];
pub const DEFAULT_ALPHA: [f64; 7] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 100.0];

impl ExperimentPlan {
    fn base(name: &str, sweep: Sweep, full_scale: bool) -> Self {
        let (replicates, population_size, generations) = if full_scale { (20, 20, 100) } else { (5, 10, 30) };
        let mut scenario = ScenarioConfig { horizon_min: 720, ..Default::default() };
        if let Sweep::FlexibilityAlpha(_) = sweep {
            scenario.flexibility_mode = FlexibilityMode::Proportional { alpha: 0.0 };
        }
        ExperimentPlan {
            name: name.to_string(),
            topologies: Topology::ALL.to_vec(),
            fleet_modes: vec![FleetMode::Fixed, FleetMode::Modular],
            sweep,
            replicates,
            nodes: 10,
            sw2_reuse_as_b: 0.5,
            scenario,
            dispatch: DispatchConfig::default(),
            solver: SolverConfig { population_size, generations, ..Default::default() },
            master_seed: 2017,
            record_runtime: false,
        }
    }

    /// Traffic-penalty sweep, 5 replicates, population 10, 30 generations.
    pub fn exp1_desk() -> Self {
        Self::base("exp1", Sweep::PenaltyWindowY(DEFAULT_Y.to_vec()), false)
    }

    /// Flexibility sweep at desk scale.
    pub fn exp2_desk() -> Self {
        Self::base("exp2", Sweep::FlexibilityAlpha(DEFAULT_ALPHA.to_vec()), false)
    }

    /// Traffic-penalty sweep at full scale: 20 replicates, population 20,
    /// 100 generations. Takes many hours on one core.
    pub fn exp1_full() -> Self {
        Self::base("exp1", Sweep::PenaltyWindowY(DEFAULT_Y.to_vec()), true)
    }

    pub fn exp2_full() -> Self {
        Self::base("exp2", Sweep::FlexibilityAlpha(DEFAULT_ALPHA.to_vec()), true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(invalid("replicates must be at least 1"));
        }
        if self.topologies.is_empty() || self.fleet_modes.is_empty() {
            return Err(invalid("plan needs at least one topology and one fleet mode"));
        }
        let values = self.sweep.values();
        if values.is_empty() {
            return Err(invalid("sweep values must be non-empty"));
        }
        if values.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(invalid("sweep values must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("sweep values must be finite and >= 0"));
        }
        self.scenario.validate()?;
        self.dispatch.validate()?;
        self.solver.validate()
    }

    pub fn expected_rows(&self) -> usize {
        self.topologies.len() * self.fleet_modes.len() * self.sweep.values().len() * self.replicates
    }

    fn cells(&self) -> Vec<Cell> {
        let values = self.sweep.values();
        let mut out = Vec::with_capacity(self.expected_rows());
        for &topology in &self.topologies {
            for &mode in &self.fleet_modes {
                for &sweep_value in &values {
                    for replicate in 0..self.replicates {
                        out.push(Cell {
                            topology,
                            mode,
                            sweep_value,
                            replicate_seed: seed::child(self.master_seed, replicate as u64),
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cell {
    topology: Topology,
    mode: FleetMode,
    sweep_value: f64,
    replicate_seed: u64,
}

impl Cell {
    fn key(&self) -> RowKey {
        RowKey::new(self.topology, self.mode, self.sweep_value, self.replicate_seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub topology: Topology,
    pub fleet_mode: FleetMode,
    pub sweep_value: f64,
    pub replicate_seed: u64,
    #[serde(rename = "F")]
    pub f: f64,
    pub diversity: f64,
    pub lane: f64,
    pub task_count: usize,
    pub runtime_ms: u64,
}

impl ResultRow {
    fn key(&self) -> RowKey {
        RowKey::new(self.topology, self.fleet_mode, self.sweep_value, self.replicate_seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub topology: Topology,
    pub fleet_mode: FleetMode,
    pub sweep_value: f64,
    pub replicate_seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct RowKey(Topology, FleetMode, u64, u64);

impl RowKey {
    fn new(t: Topology, m: FleetMode, v: f64, seed: u64) -> Self {
        RowKey(t, m, v.to_bits(), seed)
    }
}

/// Outcome of [`run_experiment`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<ErrorRow>,
    /// Cells skipped because `results.csv` already held them.
    pub resumed: usize,
}

/// Worker threads: `MODFLEET_WORKERS` if set, else all cores.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every cell of `plan` not already present in `out/results.csv`,
/// appending rows as they finish, then rewrites the file in plan order.
pub fn run_experiment(plan: &ExperimentPlan, out: &Path) -> Result<RunReport> {
    plan.validate()?;
    fs::create_dir_all(out)?;
    fs::write(out.join(PLAN_FILE), serde_json::to_string_pretty(plan)?)?;
    let results_path = out.join(RESULTS_FILE);
    let done: BTreeSet<RowKey> = if results_path.exists() {
        read_rows(&results_path)?.iter().map(ResultRow::key).collect()
    } else {
        BTreeSet::new()
    };
    let cells = plan.cells();
    let pending: Vec<Cell> = cells.iter().copied().filter(|c| !done.contains(&c.key())).collect();
    let resumed = cells.len() - pending.len();

    let writer = Mutex::new(append_writer(&results_path)?);
    let failures = Mutex::new(Vec::new());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| invalid(format!("worker pool: {e}")))?;
    pool.install(|| {
        pending.par_iter().try_for_each(|cell| -> Result<()> {
            match run_cell(plan, cell) {
                Ok(row) => {
                    let mut w = writer.lock().expect("writer lock");
                    w.serialize(&row)?;
                    w.flush()?;
                }
                Err(e) => failures.lock().expect("error lock").push(ErrorRow {
                    topology: cell.topology,
                    fleet_mode: cell.mode,
                    sweep_value: cell.sweep_value,
                    replicate_seed: cell.replicate_seed,
                    error: e.to_string(),
                }),
            }
            Ok(())
        })
    })?;
    drop(writer);

    let order: BTreeMap<RowKey, usize> = cells.iter().enumerate().map(|(i, c)| (c.key(), i)).collect();
    let mut rows: Vec<ResultRow> =
        read_rows(&results_path)?.into_iter().filter(|r| order.contains_key(&r.key())).collect();
    rows.sort_by_key(|r| order[&r.key()]);
    rows.dedup_by_key(|r| r.key());
    write_rows(&results_path, &rows)?;

    let mut errors = failures.into_inner().expect("error lock");
    let errors_path = out.join(ERRORS_FILE);
    if errors.is_empty() {
        if errors_path.exists() {
            fs::remove_file(&errors_path)?;
        }
    } else {
        errors.sort_by_key(|e| order[&RowKey::new(e.topology, e.fleet_mode, e.sweep_value, e.replicate_seed)]);
        let mut w = csv::Writer::from_path(&errors_path)?;
        for e in &errors {
            w.serialize(e)?;
        }
        w.flush()?;
    }
    Ok(RunReport { rows, errors, resumed })
}

fn run_cell(plan: &ExperimentPlan, cell: &Cell) -> Result<ResultRow> {
    let started = Instant::now();
    let topo = cell.topology as u64;
    let mut net_rng = seed::rng(seed::child(cell.replicate_seed, 0x100 + topo));
    let graph = build_network(cell.topology, plan.nodes, &mut net_rng, plan.sw2_reuse_as_b)?;

    let scenario_seed = seed::child(cell.replicate_seed, 0x200 + topo);
    let mut scfg = plan.scenario.clone();
    scfg.seed = scenario_seed;
    let mut dcfg = plan.dispatch.clone();
    match plan.sweep {
        Sweep::PenaltyWindowY(_) => dcfg.penalty_window_y_min = cell.sweep_value as Minutes,
        Sweep::FlexibilityAlpha(_) => {
            scfg.flexibility_mode = FlexibilityMode::Proportional { alpha: cell.sweep_value };
            dcfg.penalty_window_y_min = 0;
        }
    }
    let scenario = generate_scenario(&scfg, &graph, &mut seed::rng(scenario_seed))?;

    let catalog = FleetCatalog::default_for(cell.mode);
    let label = 0x300 + topo * 0x100 + (cell.mode as u64) * 0x10;
    let mut solver = plan.solver.clone();
    solver.seed = seed::child(cell.replicate_seed, label);
    let archive = evolve(&scenario, &catalog, &dcfg, &solver, &mut seed::rng(solver.seed))?;
    let best = best_cost(&archive)?;
    Ok(ResultRow {
        topology: cell.topology,
        fleet_mode: cell.mode,
        sweep_value: cell.sweep_value,
        replicate_seed: cell.replicate_seed,
        f: best.objectives.f,
        diversity: best.objectives.diversity,
        lane: best.objectives.lane,
        task_count: scenario.tasks.len(),
        runtime_ms: if plan.record_runtime { started.elapsed().as_millis() as u64 } else { 0 },
    })
}

fn append_writer(path: &Path) -> Result<csv::Writer<File>> {
    let fresh = !path.exists() || fs::metadata(path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        w.write_record(RESULT_HEADER)?;
        w.flush()?;
    }
    Ok(w)
}

/// Reads a results file. A trailing partial line left by a crash is
/// dropped.
pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        match rec {
            Ok(row) => rows.push(row),
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => continue,
        }
    }
    Ok(rows)
}

pub fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv`, `ratios.csv` and `chart.svg` for a finished run
/// directory. Returns the chart path, or `None` when there was nothing to
/// plot.
pub fn report(dir: &Path) -> Result<Option<PathBuf>> {
    let rows = read_rows(&dir.join(RESULTS_FILE))?;
    if rows.is_empty() {
        return Ok(None);
    }
    let plan: Option<ExperimentPlan> =
        fs::read_to_string(dir.join(PLAN_FILE)).ok().and_then(|s| serde_json::from_str(&s).ok());
    let summary = summarize(&rows)?;
    summary.write_csv(dir)?;
    let (title, x_label) = match &plan {
        Some(p) => (p.name.clone(), p.sweep.label()),
        None => ("experiment".to_string(), "sweep value"),
    };
    render_chart(&summary, &title, x_label, &dir.join("chart.svg"))
}
