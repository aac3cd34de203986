//! Property suite for the symplectic half: random symplectic matrices,
//! block complexification, the quadratic forms, and the metaplectic
//! reproducing identity by quadrature.
//!
//! Run with `cargo run --release --example symplectic_check`.

use grauert::config::ExperimentConfig;
use grauert::validator::symplectic_check;

fn main() {
    let cfg = ExperimentConfig::from_toml(include_str!("../../../configs/default.toml")).unwrap();
    let report = symplectic_check(&cfg).unwrap();
    for line in report.summary_lines() {
        println!("{line}");
    }
    report.write(std::path::Path::new("out")).unwrap();
    std::process::exit(if report.passed() { 0 } else { 1 });
}
