//! Gaussian engine vs the independent quadrature oracle, plus the
//! flow-twisted constant on orthogonal inputs and the split diagonal
//! integrals along both evaluation routes.
//!
//! Run with `cargo run --release --example gaussian_check`.

use grauert::config::ExperimentConfig;
use grauert::validator::gaussian_check;

fn main() {
    let cfg = ExperimentConfig::from_toml(include_str!("../../../configs/default.toml")).unwrap();
    let report = gaussian_check(&cfg).unwrap();
    for line in report.summary_lines() {
        println!("{line}");
    }
    report.write(std::path::Path::new("out")).unwrap();
    std::process::exit(if report.passed() { 0 } else { 1 });
}
