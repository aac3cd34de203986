//! Diagonal scaling law: exact equivariant kernel values against the
//! leading-order prediction across a lambda ladder, with residual-order
//! fits and the Reeb-direction oscillation frequency.
//!
//! Run with `cargo run --release --example diagonal_scaling`.

use grauert::config::ExperimentConfig;
use grauert::validator::experiment_scaling;

fn main() {
    let cfg = ExperimentConfig::from_toml(include_str!("../../../configs/scaling-z3.toml")).unwrap();
    let report = experiment_scaling(&cfg).unwrap();
    for line in report.summary_lines() {
        println!("{line}");
    }
    report.write(std::path::Path::new("out")).unwrap();
    std::process::exit(if report.passed() { 0 } else { 1 });
}
