use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use modfleet::fleet::{acquisition_cost, diversity, lane_meters};
use modfleet::harness::{self, ExperimentPlan};
use modfleet::netlab::{build_network, traffic};
use modfleet::{
    best_cost, evolve, generate_scenario, seed, simulate, DispatchConfig, FleetCatalog, FleetMix, FleetMode, Graph,
    Scenario, ScenarioConfig, SolverConfig, Topology,
};

#[derive(Parser)]
#[command(name = "modfleet", version, about = "Fleet-mix optimisation for fixed and modular vehicle fleets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a ring or small-world network.
    GenNetwork {
        #[arg(long = "kind", alias = "topology", default_value = "ring")]
        topology: Topology,
        #[arg(long, default_value_t = 10)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Chance that the second morph reuses the first hub as its B.
        #[arg(long, default_value_t = 0.5)]
        sw2_bias: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Characteristic path length and busiest-node traffic, as CSV.
    Metrics { graph: PathBuf },
    /// Sample a task scenario over a network.
    GenScenario {
        #[arg(long = "graph", alias = "network")]
        network: PathBuf,
        /// Scenario settings as JSON; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Purchase cost, diversity and lane length of a fleet mix, as CSV.
    Objectives {
        #[arg(long)]
        mix: PathBuf,
        #[command(flatten)]
        catalog: CatalogArg,
    },
    /// Run one fleet mix over a scenario.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        mix: PathBuf,
        #[command(flatten)]
        catalog: CatalogArg,
        #[arg(long)]
        dispatch: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search fleet mixes for a scenario and write the Pareto archive.
    Optimize {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        catalog: CatalogArg,
        #[arg(long)]
        dispatch: Option<PathBuf>,
        #[arg(long)]
        solver: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Traffic-penalty sweep.
    Exp1(ExpArgs),
    /// Flexibility sweep.
    Exp2(ExpArgs),
    /// Summaries and chart for a finished experiment directory.
    Report { dir: PathBuf },
}

#[derive(Args)]
struct CatalogArg {
    /// Catalog JSON; overrides --mode.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Built-in catalog.
    #[arg(long, default_value = "modular")]
    mode: FleetMode,
}

impl CatalogArg {
    fn load(&self) -> Result<FleetCatalog> {
        let cat = match &self.catalog {
            Some(p) => read_json::<FleetCatalog>(p)?,
            None => FleetCatalog::default_for(self.mode),
        };
        cat.validate()?;
        Ok(cat)
    }
}

#[derive(Args)]
struct ExpArgs {
    /// Plan JSON; without it the desk-scale preset is used.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Use the full-scale preset (very long running).
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record wall-clock time per cell in runtime_ms.
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out: PathBuf,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn optional<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    path.as_deref().map_or_else(|| Ok(T::default()), read_json)
}

fn run_experiment(args: &ExpArgs, preset: fn(bool) -> ExperimentPlan) -> Result<()> {
    let mut plan = match &args.plan {
        Some(p) => read_json(p)?,
        None => preset(args.full_scale),
    };
    if let Some(r) = args.replicates {
        plan.replicates = r;
    }
    if let Some(s) = args.seed {
        plan.master_seed = s;
    }
    plan.record_runtime |= args.timings;
    let report = harness::run_experiment(&plan, &args.out)?;
    eprintln!(
        "{} rows ({} resumed), {} failed cells, written to {}",
        report.rows.len(),
        report.resumed,
        report.errors.len(),
        args.out.display()
    );
    match harness::report(&args.out)? {
        Some(chart) => eprintln!("chart: {}", chart.display()),
        None => eprintln!("warning: no rows to chart"),
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenNetwork { topology, nodes, seed: s, sw2_bias, out } => {
            let g = build_network(topology, nodes, &mut seed::rng(s), sw2_bias)?;
            emit(&g, out.as_deref())
        }
        Command::Metrics { graph } => {
            let g: Graph = read_json(&graph)?;
            let m = traffic(&g)?;
            println!("char_path_length,max_traffic\n{},{}", m.char_path_length, m.max_traffic);
            Ok(())
        }
        Command::GenScenario { network, config, seed: s, out } => {
            let g: Graph = read_json(&network)?;
            let mut cfg: ScenarioConfig = optional(&config)?;
            if let Some(s) = s {
                cfg.seed = s;
            }
            let scenario = generate_scenario(&cfg, &g, &mut seed::rng(cfg.seed))?;
            emit(&scenario, out.as_deref())
        }
        Command::Objectives { mix, catalog } => {
            let cat = catalog.load()?;
            let mix: FleetMix = read_json(&mix)?;
            println!(
                "acquisition_cost,diversity,lane_meters\n{},{},{}",
                acquisition_cost(&mix, &cat)?,
                diversity(&mix),
                lane_meters(&mix, &cat)?
            );
            Ok(())
        }
        Command::Simulate { scenario, mix, catalog, dispatch, out } => {
            let cat = catalog.load()?;
            let scenario: Scenario = read_json(&scenario)?;
            let mix: FleetMix = read_json(&mix)?;
            let cfg: DispatchConfig = optional(&dispatch)?;
            let result = simulate(&scenario, &mix, &cat, &cfg)?;
            if !result.feasible {
                eprintln!("{} of {} tasks unserved", result.unserved_tasks.len(), scenario.tasks.len());
            }
            emit(&result, out.as_deref())
        }
        Command::Optimize { scenario, catalog, dispatch, solver, out } => {
            let cat = catalog.load()?;
            let scenario: Scenario = read_json(&scenario)?;
            let dcfg: DispatchConfig = optional(&dispatch)?;
            let scfg: SolverConfig = optional(&solver)?;
            let archive = evolve(&scenario, &cat, &dcfg, &scfg, &mut seed::rng(scfg.seed))?;
            let best = best_cost(&archive)?;
            eprintln!("best F {} with {} archived mixes", best.objectives.f, archive.len());
            emit(&archive, out.as_deref())
        }
        Command::Exp1(args) => {
            run_experiment(&args, |full| if full { ExperimentPlan::exp1_full() } else { ExperimentPlan::exp1_desk() })
        }
        Command::Exp2(args) => {
            run_experiment(&args, |full| if full { ExperimentPlan::exp2_full() } else { ExperimentPlan::exp2_desk() })
        }
        Command::Report { dir } => {
            if !dir.join(harness::RESULTS_FILE).exists() {
                bail!("{} has no {}", dir.display(), harness::RESULTS_FILE);
            }
            match harness::report(&dir)? {
                Some(chart) => eprintln!("chart: {}", chart.display()),
                None => eprintln!("warning: no rows to chart"),
            }
            Ok(())
        }
    }
}
