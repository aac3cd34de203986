//! Raw lattice-sum kernel queries along the lambda ladder; emits the CSV
//! wire format (lambda, x..., p..., re, im, n_modes, trunc_bound).
//!
//! Run with `cargo run --release --example kernel_query`.

use grauert::config::ExperimentConfig;
use grauert::validator::kernel_query;

fn main() {
    let cfg = ExperimentConfig::from_toml(include_str!("../../../configs/default.toml")).unwrap();
    let report = kernel_query(&cfg).unwrap();
    for table in &report.tables {
        println!("{}: {} rows -> out/kernel_{}.csv", table.name, table.rows.len(), table.name);
    }
    report.write(std::path::Path::new("out")).unwrap();
}
