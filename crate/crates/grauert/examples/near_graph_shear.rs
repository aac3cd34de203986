//! Near-graph comparison at t1 = 0.3: random horizontal displacement
//! pairs against the prediction built from the linearized-flow shear,
//! including the Poisson-side |det P|^{-1/2} factor.
//!
//! Run with `cargo run --release --example near_graph_shear`.

use grauert::config::ExperimentConfig;
use grauert::validator::experiment_near_graph;

fn main() {
    let cfg = ExperimentConfig::from_toml(include_str!("../../../configs/near-graph.toml")).unwrap();
    let report = experiment_near_graph(&cfg).unwrap();
    for line in report.summary_lines() {
        println!("{line}");
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    report.write(std::path::Path::new("out")).unwrap();
    std::process::exit(if report.passed() { 0 } else { 1 });
}
