//! Experiment configuration: a plain-text TOML file with every hypothesis
//! guard validated at load time. Unknown keys are rejected so a config
//! snapshot embedded in a report always re-parses to an equal config.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GroupAction, TorusModel};
use crate::spectra::{Cutoff, CutoffFamily, Isotype};

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("could not read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("could not parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelConfig {
    pub d: usize,
    pub tau: f64,
    /// "trivial" | "subtorus" | "finite-cyclic"
    pub action: String,
    #[serde(default)]
    pub generators: Vec<Vec<i64>>,
    #[serde(default = "default_m")]
    pub m: u32,
}

fn default_m() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CutoffConfig {
    pub family: CutoffFamily,
    pub epsilon: f64,
    #[serde(default)]
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct IsotypeConfig {
    /// Subtorus labels (one per generator) or a single cyclic residue;
    /// empty means the full kernel.
    #[serde(default)]
    pub nu: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DisplacementConfig {
    /// Scale of the rescaled frame displacements used by the scaling runs.
    #[serde(default = "default_magnitude")]
    pub magnitude: f64,
    /// Flow time for near-graph runs; must lie in the cutoff support.
    #[serde(default = "default_t1")]
    pub t1: f64,
    /// Number of random displacement pairs for the near-graph comparison.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Max norm of random displacement pairs.
    #[serde(default = "default_max_norm")]
    pub max_norm: f64,
    /// Scaling-window exponent epsilon' in (0, 1/6).
    #[serde(default = "default_eps_prime")]
    pub epsilon_prime: f64,
    /// Window constant C for the validity guard |v| <= C lambda^{eps'}.
    #[serde(default = "default_window_c")]
    pub window_c: f64,
    /// Distance constant C for rapid-decay placement.
    #[serde(default = "default_distance_c")]
    pub distance_c: f64,
}

fn default_magnitude() -> f64 {
    1.0
}
fn default_t1() -> f64 {
    0.3
}
fn default_pairs() -> usize {
    10
}
fn default_max_norm() -> f64 {
    2.0
}
fn default_eps_prime() -> f64 {
    0.16
}
fn default_window_c() -> f64 {
    4.0
}
fn default_distance_c() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct LadderConfig {
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Mode ladder (frequencies) for profile and Husimi runs.
    #[serde(default = "default_mode_ladder")]
    pub modes: Vec<f64>,
}

fn default_lambdas() -> Vec<f64> {
    vec![100.0, 141.0, 200.0, 283.0, 400.0]
}

fn default_mode_ladder() -> Vec<f64> {
    vec![50.0, 100.0, 200.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Tolerances {
    #[serde(default = "default_ratio_top")]
    pub ratio_at_top: f64,
    #[serde(default = "default_residual_order")]
    pub residual_order: (f64, f64),
    #[serde(default = "default_slope_rel")]
    pub transverse_slope_rel: f64,
    #[serde(default = "default_osc_rel")]
    pub oscillation_rel: f64,
    #[serde(default = "default_near_graph_rel")]
    pub near_graph_rel: f64,
    #[serde(default = "default_decay_order")]
    pub decay_order_max: f64,
    #[serde(default = "default_control_order")]
    pub control_order_min: f64,
    #[serde(default = "default_weyl_exponent")]
    pub weyl_exponent_abs: f64,
    #[serde(default = "default_weyl_coeff")]
    pub weyl_coeff_rel: f64,
    #[serde(default = "default_husimi")]
    pub husimi_exponent_abs: f64,
    #[serde(default = "default_qsymbol")]
    pub qsymbol_rel: f64,
}

fn default_ratio_top() -> f64 {
    0.05
}
fn default_residual_order() -> (f64, f64) {
    (-0.8, -0.3)
}
fn default_slope_rel() -> f64 {
    0.10
}
fn default_osc_rel() -> f64 {
    0.02
}
fn default_near_graph_rel() -> f64 {
    0.10
}
fn default_decay_order() -> f64 {
    -5.0
}
fn default_control_order() -> f64 {
    -1.0
}
fn default_weyl_exponent() -> f64 {
    0.1
}
fn default_weyl_coeff() -> f64 {
    0.15
}
fn default_husimi() -> f64 {
    0.15
}
fn default_qsymbol() -> f64 {
    0.02
}

impl Default for Tolerances {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub mode_cap: usize,
    #[serde(default = "default_trunc_tol")]
    pub trunc_tol: f64,
    #[serde(default)]
    pub output_dir: String,
}

fn default_seed() -> u64 {
    42
}
fn default_cap() -> usize {
    20_000_000
}
fn default_trunc_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub cutoff: CutoffConfig,
    #[serde(default)]
    pub isotype: IsotypeConfig,
    #[serde(default)]
    pub ladder: LadderConfig,
    #[serde(default)]
    pub displacements: DisplacementConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub run: RunConfig,
}

impl Default for IsotypeConfig {
    fn default() -> Self {
        Self { nu: Vec::new() }
    }
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self { lambdas: default_lambdas(), modes: default_mode_ladder() }
    }
}

impl Default for DisplacementConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Build the model; `ConfigError` carries the actionable message.
    pub fn model(&self) -> Result<TorusModel, ConfigError> {
        let action = match self.model.action.as_str() {
            "trivial" => GroupAction::Trivial,
            "subtorus" => GroupAction::Subtorus { generators: self.model.generators.clone() },
            "finite-cyclic" => {
                let generator = self
                    .model
                    .generators
                    .first()
                    .cloned()
                    .ok_or_else(|| ConfigError::Invalid("finite-cyclic needs a generator".into()))?;
                GroupAction::FiniteCyclic { generator, m: self.model.m }
            }
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown action kind '{other}' (expected trivial | subtorus | finite-cyclic)"
                )))
            }
        };
        TorusModel::new(self.model.d, self.model.tau, action)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn cutoff(&self) -> Result<Cutoff, ConfigError> {
        Cutoff::new(
            self.cutoff.family,
            self.cutoff.epsilon,
            self.cutoff.t0,
            self.run.trunc_tol,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn isotype(&self) -> Result<Isotype, ConfigError> {
        match self.model.action.as_str() {
            "trivial" => Ok(Isotype::All),
            "subtorus" => {
                if self.isotype.nu.is_empty() {
                    Ok(Isotype::All)
                } else {
                    Ok(Isotype::Subtorus(self.isotype.nu.clone()))
                }
            }
            "finite-cyclic" => {
                if self.isotype.nu.is_empty() {
                    Ok(Isotype::All)
                } else {
                    let nu = self.isotype.nu[0].rem_euclid(i64::from(self.model.m)) as u32;
                    Ok(Isotype::Cyclic(nu))
                }
            }
            other => Err(ConfigError::Invalid(format!("unknown action '{other}'"))),
        }
    }

    /// Hypothesis guards: violations are errors, never warnings.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let model = self.model()?;
        let _ = self.isotype()?;

        // Cutoff support must stay below the injectivity threshold (the
        // shortest closed geodesic has length 2 pi).
        let half = match self.cutoff.family {
            CutoffFamily::Bump => self.cutoff.epsilon,
            CutoffFamily::AutocorrelatedBump => 2.0 * self.cutoff.epsilon,
        };
        if 2.0 * half >= std::f64::consts::PI {
            return Err(ConfigError::Invalid(format!(
                "cutoff support length {} reaches the injectivity threshold pi; shrink epsilon",
                2.0 * half
            )));
        }
        if !(self.cutoff.epsilon > 0.0) {
            return Err(ConfigError::Invalid("epsilon must be positive".into()));
        }

        // Scaling window exponent: epsilon' in (0, 1/6), strictly.
        let ep = self.displacements.epsilon_prime;
        if !(ep > 0.0 && ep < 1.0 / 6.0) {
            return Err(ConfigError::Invalid(format!(
                "epsilon-prime = {ep} violates the required open interval (0, 1/6)"
            )));
        }

        // Near-graph flow time must lie inside the cutoff support.
        let (lo, hi) = (
            self.cutoff.t0 - half,
            self.cutoff.t0 + half,
        );
        let t1 = self.displacements.t1;
        if t1 <= lo || t1 >= hi {
            return Err(ConfigError::Invalid(format!(
                "t1 = {t1} lies outside the cutoff support ({lo}, {hi})"
            )));
        }

        if self.ladder.lambdas.is_empty() || self.ladder.lambdas.iter().any(|&l| l <= 0.0) {
            return Err(ConfigError::Invalid("lambda ladder must be positive".into()));
        }
        let mut sorted = self.ladder.lambdas.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted != self.ladder.lambdas {
            return Err(ConfigError::Invalid("lambda ladder must be ascending".into()));
        }

        if !(self.run.trunc_tol > 0.0 && self.run.trunc_tol < 1.0) {
            return Err(ConfigError::Invalid("trunc-tol must be in (0, 1)".into()));
        }

        let _ = model;
        Ok(())
    }

    /// Guard for the Weyl experiment: `d >= 2 d_G`.
    pub fn validate_weyl(&self) -> Result<(), ConfigError> {
        let model = self.model()?;
        if model.d < 2 * model.d_g() {
            return Err(ConfigError::Invalid(format!(
                "Weyl hypothesis d >= 2 d_G violated: d = {}, d_G = {}",
                model.d,
                model.d_g()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[model]
d = 2
tau = 0.5
action = "finite-cyclic"
generators = [[1, 0]]
m = 3

[cutoff]
family = "autocorrelated-bump"
epsilon = 0.4

[isotype]
nu = [1]
"#;

    #[test]
    fn sample_parses_and_roundtrips() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.model.d, 2);
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = format!("{SAMPLE}\n[model2]\nfoo = 1\n");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
        let bad2 = SAMPLE.replace("epsilon = 0.4", "epsilon = 0.4\nbogus = 1");
        assert!(ExperimentConfig::from_toml(&bad2).is_err());
    }

    #[test]
    fn guards_fire() {
        // Support too long.
        let bad = SAMPLE.replace("epsilon = 0.4", "epsilon = 0.9");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
        // epsilon-prime outside (0, 1/6).
        let mut cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        cfg.displacements.epsilon_prime = 0.2;
        assert!(cfg.validate().is_err());
        // Weyl guard: d = 3 with d_G = 2 violates d >= 2 d_G.
        let weyl_bad = r#"
[model]
d = 3
tau = 0.5
action = "subtorus"
generators = [[1, 0, 0], [0, 1, 0]]

[cutoff]
family = "autocorrelated-bump"
epsilon = 0.4
"#;
        let cfg = ExperimentConfig::from_toml(weyl_bad).unwrap();
        assert!(cfg.validate_weyl().is_err());
        // d = 3 with d_G = 1 satisfies it.
        let weyl_ok = weyl_bad.replace(", [0, 1, 0]", "");
        let cfg = ExperimentConfig::from_toml(&weyl_ok).unwrap();
        assert!(cfg.validate_weyl().is_ok());
    }
}
