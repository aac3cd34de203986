//! Rapid decay away from the concentration locus: fitted decay orders at
//! kappa~-distance C lambda^{-1/3}, versus on-locus controls.
//!
//! Run with `cargo run --release --example rapid_decay`.

use grauert::config::ExperimentConfig;
use grauert::validator::experiment_rapid_decay;

fn main() {
    let cfg = ExperimentConfig::from_toml(include_str!("../../../configs/rapid-decay.toml")).unwrap();
    let report = experiment_rapid_decay(&cfg).unwrap();
    for line in report.summary_lines() {
        println!("{line}");
    }
    report.write(std::path::Path::new("out")).unwrap();
    std::process::exit(if report.passed() { 0 } else { 1 });
}
