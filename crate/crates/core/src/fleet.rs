//! Vehicle and module catalogs, fleet mixes, compatibility rules and the
//! three fleet objectives (acquisition cost, type diversity, lane meters).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scengen::{Size, Task, TaskType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FleetMode {
    Fixed,
    Modular,
}

impl FleetMode {
    pub const ALL: [FleetMode; 2] = [FleetMode::Fixed, FleetMode::Modular];

    pub fn name(self) -> &'static str {
        match self {
            FleetMode::Fixed => "fixed",
            FleetMode::Modular => "modular",
        }
    }
}

impl fmt::Display for FleetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FleetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(FleetMode::Fixed),
            "modular" => Ok(FleetMode::Modular),
            other => Err(invalid(format!("unknown fleet mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleKind {
    /// Built-in payload for one task type.
    Fixed(TaskType),
    /// Chassis that carries swappable modules.
    Motive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleType {
    pub id: String,
    pub size: Size,
    pub kind: VehicleKind,
    pub purchase_cost: f64,
    /// Deck length in meters.
    pub lane_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleType {
    pub id: String,
    pub task_type: TaskType,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FleetCatalog {
    pub mode: FleetMode,
    pub vehicle_types: Vec<VehicleType>,
    #[serde(default)]
    pub module_types: Vec<ModuleType>,
}

/// Default per-size prices and deck lengths.
pub const MEDIUM_COST: f64 = 1.0;
pub const HEAVY_COST: f64 = 1.6;
pub const MODULE_COST: f64 = 0.05;
pub const MEDIUM_LANE_M: f64 = 9.0;
pub const HEAVY_LANE_M: f64 = 12.0;

impl FleetCatalog {
    /// Four vehicles: medium and heavy for each task type.
    pub fn fixed_default() -> Self {
        let mut vehicle_types = Vec::new();
        for (size, cost, lane) in [(Size::Medium, MEDIUM_COST, MEDIUM_LANE_M), (Size::Heavy, HEAVY_COST, HEAVY_LANE_M)]
        {
            for ty in TaskType::ALL {
                vehicle_types.push(VehicleType {
                    id: format!("{size}_{ty}"),
                    size,
                    kind: VehicleKind::Fixed(ty),
                    purchase_cost: cost,
                    lane_length: lane,
                });
            }
        }
        FleetCatalog { mode: FleetMode::Fixed, vehicle_types, module_types: Vec::new() }
    }

    /// Two motive units and one module per task type, priced so that a
    /// motive plus a module costs the same as the fixed vehicle of that size.
    pub fn modular_default() -> Self {
        let motive = |size: Size, cost: f64, lane: f64| VehicleType {
            id: format!("{size}_motive"),
            size,
            kind: VehicleKind::Motive,
            purchase_cost: cost - MODULE_COST,
            lane_length: lane,
        };
        FleetCatalog {
            mode: FleetMode::Modular,
            vehicle_types: vec![
                motive(Size::Medium, MEDIUM_COST, MEDIUM_LANE_M),
                motive(Size::Heavy, HEAVY_COST, HEAVY_LANE_M),
            ],
            module_types: TaskType::ALL
                .iter()
                .map(|&ty| ModuleType { id: format!("module_{ty}"), task_type: ty, cost: MODULE_COST })
                .collect(),
        }
    }

    pub fn default_for(mode: FleetMode) -> Self {
        match mode {
            FleetMode::Fixed => Self::fixed_default(),
            FleetMode::Modular => Self::modular_default(),
        }
    }

    /// Checks the catalog shape for its mode: fixed catalogs list each
    /// (size, task type) vehicle once and no modules; modular catalogs list
    /// one motive per size and one module per task type.
    pub fn validate(&self) -> Result<()> {
        for v in &self.vehicle_types {
            if !(v.purchase_cost > 0.0 && v.lane_length > 0.0) {
                return Err(invalid(format!("vehicle {} needs positive cost and lane length", v.id)));
            }
        }
        for m in &self.module_types {
            if m.cost.is_nan() || m.cost < 0.0 {
                return Err(invalid(format!("module {} has negative cost", m.id)));
            }
        }
        let mut ids: Vec<&str> = self
            .vehicle_types
            .iter()
            .map(|v| v.id.as_str())
            .chain(self.module_types.iter().map(|m| m.id.as_str()))
            .collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("catalog ids must be unique"));
        }
        match self.mode {
            FleetMode::Fixed => {
                if !self.module_types.is_empty() {
                    return Err(invalid("fixed catalog cannot list modules"));
                }
                for size in Size::ALL {
                    for ty in TaskType::ALL {
                        let n = self
                            .vehicle_types
                            .iter()
                            .filter(|v| v.size == size && v.kind == VehicleKind::Fixed(ty))
                            .count();
                        if n != 1 || self.vehicle_types.len() != 4 {
                            return Err(invalid("fixed catalog needs one vehicle per (size, task type)"));
                        }
                    }
                }
            }
            FleetMode::Modular => {
                let ok_vehicles = self.vehicle_types.len() == 2
                    && Size::ALL.iter().all(|&s| {
                        self.vehicle_types.iter().filter(|v| v.size == s && v.kind == VehicleKind::Motive).count() == 1
                    });
                let ok_modules = self.module_types.len() == 2
                    && TaskType::ALL
                        .iter()
                        .all(|&t| self.module_types.iter().filter(|m| m.task_type == t).count() == 1);
                if !(ok_vehicles && ok_modules) {
                    return Err(invalid("modular catalog needs one motive per size and one module per task type"));
                }
            }
        }
        Ok(())
    }

    pub fn vehicle_index(&self, id: &str) -> Option<usize> {
        self.vehicle_types.iter().position(|v| v.id == id)
    }

    pub fn module_index(&self, id: &str) -> Option<usize> {
        self.module_types.iter().position(|m| m.id == id)
    }

    /// Length of the count vector: vehicle types first, then module types.
    pub fn gene_count(&self) -> usize {
        self.vehicle_types.len() + self.module_types.len()
    }
}

/// True when, for each size and module type, the modular motive plus module
/// costs exactly what the fixed vehicle of that size and task type costs.
pub fn cost_parity(fixed: &FleetCatalog, modular: &FleetCatalog) -> bool {
    modular.vehicle_types.iter().all(|motive| {
        modular.module_types.iter().all(|m| {
            fixed
                .vehicle_types
                .iter()
                .filter(|f| f.size == motive.size && f.kind == VehicleKind::Fixed(m.task_type))
                .all(|f| motive.purchase_cost + m.cost == f.purchase_cost)
        })
    })
}

/// Vehicle and module counts keyed by catalog id.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FleetMix {
    pub vehicle_counts: BTreeMap<String, u32>,
    #[serde(default)]
    pub module_counts: BTreeMap<String, u32>,
}

impl FleetMix {
    /// Every catalog type present with count zero.
    pub fn empty(cat: &FleetCatalog) -> Self {
        Self::from_counts(cat, &vec![0; cat.gene_count()])
    }

    /// `counts` holds vehicle counts in catalog order followed by module
    /// counts.
    pub fn from_counts(cat: &FleetCatalog, counts: &[u32]) -> Self {
        assert_eq!(counts.len(), cat.gene_count(), "count vector length");
        let nv = cat.vehicle_types.len();
        FleetMix {
            vehicle_counts: cat.vehicle_types.iter().zip(counts).map(|(v, &c)| (v.id.clone(), c)).collect(),
            module_counts: cat.module_types.iter().zip(&counts[nv..]).map(|(m, &c)| (m.id.clone(), c)).collect(),
        }
    }

    /// Inverse of [`FleetMix::from_counts`]; unknown ids are rejected and
    /// missing ids count as zero.
    pub fn counts(&self, cat: &FleetCatalog) -> Result<Vec<u32>> {
        let mut out = vec![0; cat.gene_count()];
        let nv = cat.vehicle_types.len();
        for (id, &c) in &self.vehicle_counts {
            let i = cat.vehicle_index(id).ok_or_else(|| invalid(format!("unknown vehicle type {id:?}")))?;
            out[i] = c;
        }
        for (id, &c) in &self.module_counts {
            let i = cat.module_index(id).ok_or_else(|| invalid(format!("unknown module type {id:?}")))?;
            out[nv + i] = c;
        }
        if cat.mode == FleetMode::Fixed && out[nv..].iter().any(|&c| c > 0) {
            return Err(invalid("fixed fleet cannot hold modules"));
        }
        Ok(out)
    }
}

/// Acquisition cost: vehicle prices times counts plus module prices times
/// counts.
pub fn acquisition_cost(mix: &FleetMix, cat: &FleetCatalog) -> Result<f64> {
    Ok(acquisition_cost_counts(&mix.counts(cat)?, cat))
}

pub(crate) fn acquisition_cost_counts(counts: &[u32], cat: &FleetCatalog) -> f64 {
    let nv = cat.vehicle_types.len();
    let vehicles: f64 = cat.vehicle_types.iter().zip(counts).map(|(v, &c)| v.purchase_cost * f64::from(c)).sum();
    let modules: f64 = cat.module_types.iter().zip(&counts[nv..]).map(|(m, &c)| m.cost * f64::from(c)).sum();
    vehicles + modules
}

/// Population variance of the vehicle counts across vehicle types. Modules
/// are not counted.
pub fn diversity(mix: &FleetMix) -> f64 {
    let counts: Vec<f64> = mix.vehicle_counts.values().map(|&c| f64::from(c)).collect();
    variance(&counts)
}

pub(crate) fn variance(counts: &[f64]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    let k = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / k;
    counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / k
}

/// Deck length of all vehicles; modules ride on their motive units.
pub fn lane_meters(mix: &FleetMix, cat: &FleetCatalog) -> Result<f64> {
    Ok(lane_meters_counts(&mix.counts(cat)?, cat))
}

pub(crate) fn lane_meters_counts(counts: &[u32], cat: &FleetCatalog) -> f64 {
    cat.vehicle_types.iter().zip(counts).map(|(v, &c)| v.lane_length * f64::from(c)).sum()
}

/// Size rule: medium loads fit either truck, heavy loads need a heavy one.
pub fn size_fits(vehicle: Size, load: Size) -> bool {
    vehicle == Size::Heavy || load == Size::Medium
}

/// Whether the vehicle (with its attached module, for motive units) can
/// carry the task.
pub fn can_serve(v: &VehicleType, m: Option<&ModuleType>, t: &Task) -> Result<bool> {
    let payload = match (v.kind, m) {
        (VehicleKind::Fixed(ty), None) => ty,
        (VehicleKind::Motive, Some(m)) => m.task_type,
        (VehicleKind::Fixed(_), Some(_)) => {
            return Err(invalid(format!("fixed vehicle {} cannot take a module", v.id)))
        }
        (VehicleKind::Motive, None) => return Err(invalid(format!("motive unit {} needs a module", v.id))),
    };
    Ok(payload == t.task_type && size_fits(v.size, t.size))
}

/// Medium-equivalent load slots on the vehicle.
pub fn bundle_capacity(v: &VehicleType) -> u32 {
    v.size.slots()
}

/// Whether the loads fit together on one trip of the vehicle.
pub fn loads_fit(v: &VehicleType, loads: &[Size]) -> bool {
    loads.iter().all(|&l| size_fits(v.size, l)) && loads.iter().map(|l| l.slots()).sum::<u32>() <= bundle_capacity(v)
}
