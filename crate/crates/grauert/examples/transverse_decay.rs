//! Transverse Gaussian decay under a circle action: the log-ratio slope
//! against the squared normal displacement should be -2/tau.
//!
//! Run with `cargo run --release --example transverse_decay`.

use grauert::config::ExperimentConfig;
use grauert::validator::experiment_scaling;

fn main() {
    let cfg = ExperimentConfig::from_toml(include_str!("../../../configs/scaling-s1.toml")).unwrap();
    let report = experiment_scaling(&cfg).unwrap();
    for line in report.summary_lines() {
        println!("{line}");
    }
    report.write(std::path::Path::new("out")).unwrap();
    std::process::exit(if report.passed() { 0 } else { 1 });
}
