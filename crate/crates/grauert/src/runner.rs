//! Orchestration: maps subcommand names onto experiments, writes reports,
//! and folds outcomes into the exit-code contract
//! (0 success, 1 criterion failure, 2 config error, 3 numerical guard).
//!
//! `all` runs every experiment the configured model supports and prints an
//! explicit `skipped` line for each one whose hypothesis guard rejects the
//! config; single-experiment subcommands treat the same rejection as a
//! config error.

use std::path::Path;

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::Report;
use crate::spectra::SpectraError;
use crate::validator::{self, ValidatorError};

pub const SUBCOMMANDS: &[&str] = &[
    "symplectic-check",
    "gaussian-check",
    "kernel",
    "scaling",
    "rapid-decay",
    "weyl",
    "husimi",
    "qsymbol",
    "all",
];

/// Exit code classification per the CLI contract.
pub fn exit_class(err: &ValidatorError) -> i32 {
    match err {
        ValidatorError::Config(_) => 2,
        ValidatorError::Precondition(_) => 2,
        ValidatorError::Spectra(SpectraError::EnumerationCap { .. }) => 3,
        ValidatorError::Spectra(SpectraError::QuadratureDiverged(_)) => 3,
        ValidatorError::Spectra(_) => 2,
        ValidatorError::Gaussian(_) => 3,
        ValidatorError::Geometry(_) => 3,
        ValidatorError::Symplectic(_) => 3,
    }
}

/// Initialize the worker pool from `GRAUERT_WORKERS` (the only environment
/// variable honored). Zero or unset keeps the default.
pub fn init_workers() {
    if let Ok(v) = std::env::var("GRAUERT_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn experiment_by_name(
    name: &str,
    cfg: &ExperimentConfig,
) -> Result<Vec<Report>, ValidatorError> {
    match name {
        "symplectic-check" => Ok(vec![validator::symplectic_check(cfg)?]),
        "gaussian-check" => Ok(vec![validator::gaussian_check(cfg)?]),
        "kernel" => Ok(vec![validator::kernel_query(cfg)?]),
        "scaling" => {
            let mut out = vec![validator::experiment_scaling(cfg)?];
            if matches!(cfg.model()?.action, crate::geometry::GroupAction::Trivial) {
                out.push(validator::experiment_near_graph(cfg)?);
            }
            Ok(out)
        }
        "rapid-decay" => Ok(vec![validator::experiment_rapid_decay(cfg)?]),
        "weyl" => Ok(vec![validator::experiment_weyl(cfg)?]),
        "husimi" => Ok(vec![validator::experiment_husimi(cfg)?]),
        "qsymbol" => Ok(vec![validator::experiment_qsymbol(cfg)?]),
        other => Err(ValidatorError::Config(ConfigError::Invalid(format!(
            "unknown subcommand '{other}'"
        )))),
    }
}

/// Run one subcommand; writes reports under the output directory and
/// returns the process exit code.
pub fn run(name: &str, cfg: &ExperimentConfig, out_dir: &Path) -> i32 {
    init_workers();
    let singles: Vec<&str> = if name == "all" {
        SUBCOMMANDS.iter().copied().filter(|s| *s != "all").collect()
    } else {
        vec![name]
    };
    let mut any_fail = false;
    let mut worst_guard: i32 = 0;
    for sub in singles {
        match experiment_by_name(sub, cfg) {
            Ok(reports) => {
                for report in reports {
                    if let Err(e) = report.write(out_dir) {
                        eprintln!("error: could not write report: {e}");
                        return 3;
                    }
                    println!("== {} ==", report.experiment);
                    for line in report.summary_lines() {
                        println!("{line}");
                    }
                    if !report.passed() {
                        any_fail = true;
                    }
                }
            }
            Err(e) => {
                let class = exit_class(&e);
                if name == "all" && class == 2 {
                    println!("== {sub} ==");
                    println!("skipped (hypothesis guard): {e}");
                } else {
                    eprintln!("error in {sub}: {e}");
                    worst_guard = worst_guard.max(class);
                }
            }
        }
    }
    if worst_guard > 0 {
        worst_guard
    } else if any_fail {
        1
    } else {
        0
    }
}

/// Load the config, apply scalar overrides, validate, run.
#[allow(clippy::too_many_arguments)]
pub fn run_from_path(
    name: &str,
    config_path: &Path,
    seed: Option<u64>,
    output_dir: Option<String>,
    tau: Option<f64>,
    epsilon: Option<f64>,
    t0: Option<f64>,
    trunc_tol: Option<f64>,
) -> i32 {
    let mut cfg = match ExperimentConfig::from_path(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    if let Some(dir) = output_dir {
        cfg.run.output_dir = dir;
    }
    if let Some(v) = tau {
        cfg.model.tau = v;
    }
    if let Some(v) = epsilon {
        cfg.cutoff.epsilon = v;
    }
    if let Some(v) = t0 {
        cfg.cutoff.t0 = v;
    }
    if let Some(v) = trunc_tol {
        cfg.run.trunc_tol = v;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return 2;
    }
    let out = if cfg.run.output_dir.is_empty() {
        std::path::PathBuf::from("out")
    } else {
        std::path::PathBuf::from(&cfg.run.output_dir)
    };
    run(name, &cfg, &out)
}
