//! Tempered Weyl sums on the 3-torus with a circle action: fitted growth
//! exponent and coefficient against the closed-form density, with the
//! volume normalization reported both raw and adjusted.
//!
//! Run with `cargo run --release --example weyl_law`.

use grauert::config::ExperimentConfig;
use grauert::validator::experiment_weyl;

fn main() {
    let cfg = ExperimentConfig::from_toml(include_str!("../../../configs/weyl-d3.toml")).unwrap();
    let report = experiment_weyl(&cfg).unwrap();
    for line in report.summary_lines() {
        println!("{line}");
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    report.write(std::path::Path::new("out")).unwrap();
    std::process::exit(if report.passed() { 0 } else { 1 });
}
