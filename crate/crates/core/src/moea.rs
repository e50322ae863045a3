//! Pareto-archiving evolutionary search over fleet mixes.
//!
//! Genomes are count vectors (vehicle types, then module types, in catalog
//! order). Every candidate is repaired to feasibility before evaluation, so
//! the archive only ever holds mixes that serve all tasks.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispatch::{DispatchConfig, Simulator};
use crate::error::{invalid, Error, Result};
use crate::fleet::{diversity, lane_meters, FleetCatalog, FleetMix};
use crate::scengen::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    /// Acquisition cost plus traffic penalty.
    #[serde(rename = "F")]
    pub f: f64,
    pub diversity: f64,
    pub lane: f64,
}

impl Objectives {
    pub fn as_array(&self) -> [f64; 3] {
        [self.f, self.diversity, self.lane]
    }
}

/// Additive epsilon dominance for minimisation: `a` is within `eps` of `b`
/// everywhere and strictly better than `b + eps` somewhere.
pub fn dominates(a: &Objectives, b: &Objectives, eps: &[f64; 3]) -> bool {
    let (a, b) = (a.as_array(), b.as_array());
    let mut strict = false;
    for i in 0..3 {
        if a[i] > b[i] + eps[i] {
            return false;
        }
        strict |= a[i] < b[i] + eps[i];
    }
    strict
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub mix: FleetMix,
    pub objectives: Objectives,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Chance that each count is nudged by one.
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub epsilon: [f64; 3],
    /// Per-type chance that a starting mix holds any units of that type.
    pub init_density: f64,
    /// Largest count a starting mix draws for a type.
    pub init_max_count: u32,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            population_size: 20,
            generations: 100,
            mutation_rate: 0.2,
            crossover_rate: 0.9,
            epsilon: [0.0; 3],
            init_density: 0.3,
            init_max_count: 3,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(invalid("population_size must be at least 2"));
        }
        for (name, p) in [
            ("mutation_rate", self.mutation_rate),
            ("crossover_rate", self.crossover_rate),
            ("init_density", self.init_density),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.epsilon.iter().any(|e| e.is_nan() || *e < 0.0) {
            return Err(invalid("epsilon entries must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub evaluations: usize,
    pub repair_failures: usize,
    /// Lowest archived F after initialisation and after each generation.
    pub best_f_per_generation: Vec<f64>,
}

/// Mutually non-dominated feasible individuals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    pub epsilon: [f64; 3],
    pub members: Vec<Individual>,
    pub diagnostics: Diagnostics,
}

impl ParetoArchive {
    pub fn new(epsilon: [f64; 3]) -> Self {
        ParetoArchive { epsilon, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Adds `ind` unless an existing member dominates it or holds the same
    /// mix; members it dominates are dropped. Returns whether it was added.
    pub fn insert(&mut self, ind: Individual) -> bool {
        if !ind.feasible {
            return false;
        }
        let eps = self.epsilon;
        if self.members.iter().any(|m| m.mix == ind.mix || dominates(&m.objectives, &ind.objectives, &eps)) {
            return false;
        }
        self.members.retain(|m| !dominates(&ind.objectives, &m.objectives, &eps));
        self.members.push(ind);
        true
    }

    pub fn min_f(&self) -> Option<f64> {
        self.members.iter().map(|m| m.objectives.f).min_by(f64::total_cmp)
    }

    pub fn is_mutually_non_dominated(&self) -> bool {
        self.members.iter().enumerate().all(|(i, a)| {
            self.members
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !dominates(&a.objectives, &b.objectives, &self.epsilon))
        })
    }
}

/// The cheapest member; ties go to shorter lane length, then lower
/// diversity, then the mix whose JSON form sorts first.
pub fn best_cost(archive: &ParetoArchive) -> Result<Individual> {
    archive.members.iter().min_by(|a, b| compare_cost(a, b)).cloned().ok_or(Error::EmptyArchive)
}

fn compare_cost(a: &Individual, b: &Individual) -> Ordering {
    let (x, y) = (&a.objectives, &b.objectives);
    x.f.total_cmp(&y.f)
        .then(x.lane.total_cmp(&y.lane))
        .then(x.diversity.total_cmp(&y.diversity))
        .then_with(|| mix_key(&a.mix).cmp(&mix_key(&b.mix)))
}

fn mix_key(mix: &FleetMix) -> String {
    serde_json::to_string(mix).expect("fleet mix serialises")
}

#[derive(Clone, Debug)]
struct Member {
    counts: Vec<u32>,
    ind: Individual,
}

/// Repairs `counts` and scores the result with one simulation.
pub fn evaluate(sim: &Simulator<'_>, counts: &[u32]) -> Result<Individual> {
    let cat = sim.catalog();
    let (counts, schedule) = sim.repair_counts(counts)?;
    let mix = FleetMix::from_counts(cat, &counts);
    let objectives = Objectives { f: schedule.objective_f, diversity: diversity(&mix), lane: lane_meters(&mix, cat)? };
    Ok(Individual { mix, objectives, feasible: schedule.feasible })
}

/// Runs the search and returns the final archive.
pub fn evolve<R: Rng + ?Sized>(
    scenario: &Scenario,
    cat: &FleetCatalog,
    dcfg: &DispatchConfig,
    scfg: &SolverConfig,
    rng: &mut R,
) -> Result<ParetoArchive> {
    evolve_observed(scenario, cat, dcfg, scfg, rng, |_, _| {})
}

/// [`evolve`] that hands the archive to `observe` after initialisation
/// (generation 0) and after every generation.
pub fn evolve_observed<R, O>(
    scenario: &Scenario,
    cat: &FleetCatalog,
    dcfg: &DispatchConfig,
    scfg: &SolverConfig,
    rng: &mut R,
    mut observe: O,
) -> Result<ParetoArchive>
where
    R: Rng + ?Sized,
    O: FnMut(usize, &ParetoArchive),
{
    scfg.validate()?;
    let sim = Simulator::new(scenario, cat, dcfg)?;
    let genes = cat.gene_count();
    let n = scfg.population_size;
    let mut archive = ParetoArchive::new(scfg.epsilon);

    let mut seeds = vec![vec![0u32; genes]];
    while seeds.len() < n {
        seeds.push(
            (0..genes)
                .map(
                    |_| if rng.gen_bool(scfg.init_density) { rng.gen_range(1..=scfg.init_max_count.max(1)) } else { 0 },
                )
                .collect(),
        );
    }
    let mut population = evaluate_all(&sim, seeds, &mut archive);
    if population.is_empty() {
        return Err(Error::RepairFailure { additions: 0 });
    }
    record(&mut archive);
    observe(0, &archive);

    for generation in 1..=scfg.generations {
        let mut offspring = Vec::with_capacity(n);
        while offspring.len() < n {
            let a = tournament(&population, &scfg.epsilon, rng);
            let b = tournament(&population, &scfg.epsilon, rng);
            let (mut c1, mut c2) = (a.counts.clone(), b.counts.clone());
            if rng.gen_bool(scfg.crossover_rate) {
                for g in 0..genes {
                    if rng.gen_bool(0.5) {
                        std::mem::swap(&mut c1[g], &mut c2[g]);
                    }
                }
            }
            for child in [c1, c2] {
                if offspring.len() < n {
                    offspring.push(mutate(child, scfg.mutation_rate, rng));
                }
            }
        }
        let children = evaluate_all(&sim, offspring, &mut archive);
        population.extend(children);
        population = survivors(population, n, &scfg.epsilon);
        record(&mut archive);
        observe(generation, &archive);
    }
    Ok(archive)
}

fn record(archive: &mut ParetoArchive) {
    let best = archive.min_f().unwrap_or(f64::INFINITY);
    archive.diagnostics.best_f_per_generation.push(best);
}

fn evaluate_all(sim: &Simulator<'_>, genomes: Vec<Vec<u32>>, archive: &mut ParetoArchive) -> Vec<Member> {
    let scored: Vec<Result<Individual>> = genomes.par_iter().map(|g| evaluate(sim, g)).collect();
    let cat = sim.catalog();
    let mut out = Vec::with_capacity(scored.len());
    for result in scored {
        archive.diagnostics.evaluations += 1;
        match result {
            Ok(ind) => {
                archive.insert(ind.clone());
                let counts = ind.mix.counts(cat).expect("repaired mix matches its catalog");
                out.push(Member { counts, ind });
            }
            Err(_) => archive.diagnostics.repair_failures += 1,
        }
    }
    out
}

fn tournament<'p, R: Rng + ?Sized>(population: &'p [Member], eps: &[f64; 3], rng: &mut R) -> &'p Member {
    let a = population.choose(rng).expect("non-empty population");
    let b = population.choose(rng).expect("non-empty population");
    if dominates(&a.ind.objectives, &b.ind.objectives, eps) {
        a
    } else if dominates(&b.ind.objectives, &a.ind.objectives, eps) || b.ind.objectives.f < a.ind.objectives.f {
        b
    } else {
        a
    }
}

fn mutate<R: Rng + ?Sized>(mut counts: Vec<u32>, rate: f64, rng: &mut R) -> Vec<u32> {
    for c in counts.iter_mut() {
        if rng.gen_bool(rate) {
            *c = if *c == 0 || rng.gen_bool(0.5) { *c + 1 } else { *c - 1 };
        }
    }
    counts
}

/// Keeps the `n` members dominated by the fewest others, ties by lower F.
fn survivors(pool: Vec<Member>, n: usize, eps: &[f64; 3]) -> Vec<Member> {
    let dominated_by: Vec<usize> = pool
        .iter()
        .map(|m| pool.iter().filter(|o| dominates(&o.ind.objectives, &m.ind.objectives, eps)).count())
        .collect();
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.sort_by(|&a, &b| {
        dominated_by[a].cmp(&dominated_by[b]).then(pool[a].ind.objectives.f.total_cmp(&pool[b].ind.objectives.f))
    });
    idx.truncate(n);
    idx.sort_unstable();
    let mut keep = vec![false; pool.len()];
    for i in idx {
        keep[i] = true;
    }
    pool.into_iter().zip(keep).filter_map(|(m, k)| k.then_some(m)).collect()
}
