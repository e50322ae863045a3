use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::Summary;
use crate::error::Result;
use crate::fleet::FleetMode;
use crate::netlab::Topology;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn colour(t: Topology) -> &'static str {
    match t {
        Topology::Ring => "#1f77b4",
        Topology::Sw1 => "#d62728",
        Topology::Sw2 => "#2ca02c",
    }
}

fn dash(m: FleetMode) -> &'static str {
    match m {
        FleetMode::Fixed => "",
        FleetMode::Modular => " stroke-dasharray=\"6 4\"",
    }
}

/// Line chart of mean F against the sweep value, one series per
/// topology and fleet mode, with standard-error bars. Sweep values are
/// spaced evenly. Each point carries its exact mean in `data-mean`.
/// Returns `None` (and writes nothing) for an empty summary.
pub fn render_chart(summary: &Summary, title: &str, x_label: &str, path: &Path) -> Result<Option<PathBuf>> {
    let xs = summary.sweep_values();
    if xs.is_empty() {
        return Ok(None);
    }
    let lo = summary.cells.iter().map(|c| c.mean_f - c.stderr_f).fold(f64::INFINITY, f64::min).min(0.0);
    let hi = summary.cells.iter().map(|c| c.mean_f + c.stderr_f).fold(f64::NEG_INFINITY, f64::max);
    let hi = if hi > lo { hi * 1.05 } else { lo + 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| {
        let i = xs.iter().position(|&x| x == v).unwrap_or(0) as f64;
        let span = (xs.len().max(2) - 1) as f64;
        LEFT + plot_w * if xs.len() == 1 { 0.5 } else { i / span }
    };
    let py = |y: f64| TOP + plot_h * (1.0 - (y - lo) / (hi - lo));

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{LEFT}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/><line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{b}\" stroke=\"black\"/>",
        b = TOP + plot_h,
        r = LEFT + plot_w
    );
    for &x in &xs {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            px(x),
            TOP + plot_h + 18.0,
            x
        );
    }
    for k in 0..=5 {
        let y = lo + (hi - lo) * f64::from(k) / 5.0;
        let _ =
            writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.1}</text>", LEFT - 6.0, py(y) + 4.0, y);
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        "<text transform=\"translate(20 {:.1}) rotate(-90)\" text-anchor=\"middle\">mean F</text>",
        TOP + plot_h / 2.0
    );

    for (i, ((topology, mode), cells)) in summary.series().into_iter().enumerate() {
        let c = colour(topology);
        let name = format!("{topology} {mode}");
        let points: Vec<String> =
            cells.iter().map(|p| format!("{:.1},{:.1}", px(p.sweep_value), py(p.mean_f))).collect();
        let _ = writeln!(s, "<g class=\"series\" data-series=\"{name}\">");
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"2\"{} points=\"{}\"/>",
            dash(mode),
            points.join(" ")
        );
        for p in &cells {
            let (x, y0, y1) = (px(p.sweep_value), py(p.mean_f - p.stderr_f), py(p.mean_f + p.stderr_f));
            let _ = writeln!(s, "<line x1=\"{x:.1}\" y1=\"{y0:.1}\" x2=\"{x:.1}\" y2=\"{y1:.1}\" stroke=\"{c}\"/>");
            let _ = writeln!(
                s,
                "<circle cx=\"{x:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{c}\" data-x=\"{:?}\" data-mean=\"{:?}\" data-stderr=\"{:?}\"/>",
                py(p.mean_f),
                p.sweep_value,
                p.mean_f,
                p.stderr_f
            );
        }
        let ly = TOP + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 20.0;
        let _ = writeln!(
            s,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{c}\" stroke-width=\"2\"{}/><text x=\"{}\" y=\"{}\">{name}</text>",
            lx + 24.0,
            dash(mode),
            lx + 30.0,
            ly + 4.0
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    fs::write(path, s)?;
    Ok(Some(path.to_path_buf()))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
