//! Normalized spherical-profile ratios over a frequency ladder; checks
//! the Bessel closed form against direct circle quadrature in d = 2.
//!
//! Run with `cargo run --release --example qtau_symbol`.

use grauert::config::ExperimentConfig;
use grauert::validator::experiment_qsymbol;

fn main() {
    let cfg = ExperimentConfig::from_toml(include_str!("../../../configs/qsymbol.toml")).unwrap();
    let report = experiment_qsymbol(&cfg).unwrap();
    for line in report.summary_lines() {
        println!("{line}");
    }
    report.write(std::path::Path::new("out")).unwrap();
    std::process::exit(if report.passed() { 0 } else { 1 });
}
