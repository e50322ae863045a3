use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn modfleet(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_modfleet")).args(args).output().expect("spawn modfleet");
    assert!(out.status.success(), "modfleet {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_row(out: &str, header: &str) -> Vec<f64> {
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(header));
    lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn ring_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    modfleet(&["gen-network", "--kind", "ring", "--nodes", "10", "--out", p(&net)]);
    assert_eq!(json(&net)["nodes"], 10);
    let m = csv_row(&modfleet(&["metrics", p(&net)]), "char_path_length,max_traffic");
    assert_eq!(m, [25.0 / 9.0, 20.0]);
}

#[test]
fn scenario_simulate_optimize() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let net = d.join("net.json");
    modfleet(&["gen-network", "--kind", "sw1", "--seed", "3", "--out", p(&net)]);
    fs::write(d.join("cfg.json"), r#"{"horizon_min": 20}"#).unwrap();
    let scen = d.join("s.json");
    modfleet(&[
        "gen-scenario",
        "--graph",
        p(&net),
        "--config",
        p(&d.join("cfg.json")),
        "--seed",
        "9",
        "--out",
        p(&scen),
    ]);
    let tasks = json(&scen)["tasks"].as_array().unwrap().len();
    assert!(tasks > 0);

    fs::write(
        d.join("mix.json"),
        r#"{"vehicle_counts": {"heavy_motive": 100}, "module_counts": {"module_type1": 100, "module_type2": 100}}"#,
    )
    .unwrap();
    let obj = csv_row(
        &modfleet(&["objectives", "--mix", p(&d.join("mix.json")), "--mode", "modular"]),
        "acquisition_cost,diversity,lane_meters",
    );
    assert!((obj[0] - 165.0).abs() < 1e-9);
    assert_eq!(obj[2], 1200.0);

    let result = d.join("r.json");
    modfleet(&[
        "simulate",
        "--scenario",
        p(&scen),
        "--mix",
        p(&d.join("mix.json")),
        "--mode",
        "modular",
        "--out",
        p(&result),
    ]);
    let r = json(&result);
    assert_eq!(r["feasible"], true);
    assert_eq!(r["per_task"].as_array().unwrap().len(), tasks);
    assert!(r["objective_F"].as_f64().is_some());

    fs::write(d.join("solver.json"), r#"{"population_size": 4, "generations": 2, "seed": 1}"#).unwrap();
    let archive = d.join("a.json");
    modfleet(&[
        "optimize",
        "--scenario",
        p(&scen),
        "--mode",
        "fixed",
        "--solver",
        p(&d.join("solver.json")),
        "--out",
        p(&archive),
    ]);
    let a = json(&archive);
    let members = a["members"].as_array().unwrap();
    assert!(!members.is_empty());
    assert!(members.iter().all(|m| m["feasible"] == true && m["objectives"]["F"].is_number()));
}

#[test]
fn experiment_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let plan = serde_json::json!({
        "name": "mini",
        "topologies": ["ring", "sw2"],
        "fleet_modes": ["fixed", "modular"],
        "sweep": {"variable": "flexibility_alpha", "values": [0.0, 1.0]},
        "replicates": 1,
        "nodes": 10,
        "sw2_reuse_as_b": 0.5,
        "scenario": {"horizon_min": 15},
        "dispatch": {},
        "solver": {"population_size": 3, "generations": 1},
        "master_seed": 5
    });
    fs::write(d.join("plan.json"), plan.to_string()).unwrap();
    let out = d.join("run");
    modfleet(&["exp2", "--plan", p(&d.join("plan.json")), "--out", p(&out)]);
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "topology,fleet_mode,sweep_value,replicate_seed,F,diversity,lane,task_count,runtime_ms"
    );
    assert_eq!(lines.count(), 8);
    for f in ["summary.csv", "ratios.csv", "chart.svg"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    fs::remove_file(out.join("chart.svg")).unwrap();
    modfleet(&["report", p(&out)]);
    assert!(out.join("chart.svg").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_modfleet")).args(["gen-network", "--kind", "torus"]).output().unwrap();
    assert!(!out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_modfleet")).args(["report", "/nonexistent/dir"]).output().unwrap();
    assert!(!out.status.success());
}
