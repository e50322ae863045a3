use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ResultRow;
use crate::error::{invalid, Result};
use crate::fleet::FleetMode;
use crate::netlab::Topology;

/// Mean, standard error and replicate count of F for one
/// (topology, fleet mode, sweep value) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub topology: Topology,
    pub fleet_mode: FleetMode,
    pub sweep_value: f64,
    pub mean_f: f64,
    pub stderr_f: f64,
    pub n: usize,
}

/// Modular mean F over fixed mean F.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub topology: Topology,
    pub sweep_value: f64,
    pub modular_over_fixed: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<SummaryCell>,
    pub ratios: Vec<RatioRow>,
}

impl Summary {
    pub fn cell(&self, topology: Topology, mode: FleetMode, sweep_value: f64) -> Option<&SummaryCell> {
        self.cells.iter().find(|c| c.topology == topology && c.fleet_mode == mode && c.sweep_value == sweep_value)
    }

    /// Sorted distinct sweep values.
    pub fn sweep_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.cells.iter().map(|c| c.sweep_value).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// One (topology, mode) series of cells in sweep order.
    pub fn series(&self) -> Vec<((Topology, FleetMode), Vec<&SummaryCell>)> {
        let mut map: BTreeMap<(Topology, FleetMode), Vec<&SummaryCell>> = BTreeMap::new();
        for c in &self.cells {
            map.entry((c.topology, c.fleet_mode)).or_default().push(c);
        }
        map.into_iter().collect()
    }

    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        for c in &self.cells {
            w.serialize(c)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("ratios.csv"))?;
        for r in &self.ratios {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation over `sqrt(n)`; zero for a single value.
pub fn std_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}

pub fn summarize(rows: &[ResultRow]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(invalid("nothing to summarize"));
    }
    let mut groups: BTreeMap<(Topology, FleetMode, u64), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.topology, r.fleet_mode, r.sweep_value.to_bits())).or_default().push(r.f);
    }
    let mut cells: Vec<SummaryCell> = groups
        .into_iter()
        .map(|((topology, fleet_mode, v), fs)| SummaryCell {
            topology,
            fleet_mode,
            sweep_value: f64::from_bits(v),
            mean_f: mean(&fs),
            stderr_f: std_error(&fs),
            n: fs.len(),
        })
        .collect();
    cells.sort_by(|a, b| {
        (a.topology, a.fleet_mode).cmp(&(b.topology, b.fleet_mode)).then(a.sweep_value.total_cmp(&b.sweep_value))
    });
    let mut summary = Summary { cells, ratios: Vec::new() };
    let mut ratios = Vec::new();
    for c in summary.cells.iter().filter(|c| c.fleet_mode == FleetMode::Modular) {
        if let Some(fixed) = summary.cell(c.topology, FleetMode::Fixed, c.sweep_value) {
            ratios.push(RatioRow {
                topology: c.topology,
                sweep_value: c.sweep_value,
                modular_over_fixed: c.mean_f / fixed.mean_f,
            });
        }
    }
    summary.ratios = ratios;
    Ok(summary)
}
