//! Husimi sup growth over a mode ladder, for both a finite symmetry and a
//! circle action. On the flat torus single modes grow like mu^{(d-1)/2};
//! the circle-action case coincides with the stated d - 1 - d_G/2 rate,
//! the finite case does not reach it.
//!
//! Run with `cargo run --release --example husimi_sup`.

use grauert::config::ExperimentConfig;
use grauert::validator::experiment_husimi;

fn main() {
    let mut code = 0;
    for cfg_text in [
        include_str!("../../../configs/husimi-dg0.toml"),
        include_str!("../../../configs/husimi-dg1.toml"),
    ] {
        let cfg = ExperimentConfig::from_toml(cfg_text).unwrap();
        let report = experiment_husimi(&cfg).unwrap();
        println!("== action: {} ==", cfg.model.action);
        for line in report.summary_lines() {
            println!("{line}");
        }
        for note in &report.notes {
            println!("note: {note}");
        }
        report.write(std::path::Path::new("out")).unwrap();
        if !report.passed() {
            code = 1;
        }
    }
    std::process::exit(code);
}
