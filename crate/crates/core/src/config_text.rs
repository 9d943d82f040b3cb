//! Flat `key = value` run-configuration files.
//!
//! `#` starts a comment, blank lines are ignored, unknown keys are errors
//! (fail fast rather than silently run the wrong experiment). Every key has
//! a default except `seed`, which must be explicit. The canonical rendering
//! of a config is what gets hashed for provenance.

use sha2::{Digest, Sha256};

use crate::agent::MotorPropagation;
use crate::error::{Error, Result};
use crate::society::{MappingVariant, SimulationConfig};

pub const KEYS: &[&str] = &[
    "n_agents",
    "neurons_per_map",
    "sigma",
    "learning_rate",
    "hebb_rate",
    "mean_decay",
    "mapping",
    "steps",
    "seed",
    "measurement_interval",
    "grid_resolution",
    "merge_tol",
    "motor_propagation",
];

/// Parse a config file; all keys optional except `seed`.
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let mut seed: Option<u64> = None;
    let mut config = SimulationConfig::with_seed(0);
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw_line.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {lineno}: expected `key = value`, got `{line}`"))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| {
            Error::Config(format!("line {lineno}: {key} must be {what}, got `{value}`"))
        };
        match key {
            "n_agents" => config.n_agents = value.parse().map_err(|_| bad("a positive integer"))?,
            "neurons_per_map" => {
                config.neurons_per_map = value.parse().map_err(|_| bad("a positive integer"))?
            }
            "sigma" => config.sigma = value.parse().map_err(|_| bad("a number"))?,
            "learning_rate" => config.learning_rate = value.parse().map_err(|_| bad("a number"))?,
            "hebb_rate" => config.hebb_rate = value.parse().map_err(|_| bad("a number"))?,
            "mean_decay" => config.mean_decay = value.parse().map_err(|_| bad("a number"))?,
            "mapping" => {
                config.mapping = match value {
                    "abstract" => MappingVariant::Abstract,
                    "deboer" => MappingVariant::DeBoer,
                    _ => return Err(bad("`abstract` or `deboer`")),
                }
            }
            "steps" => config.steps = value.parse().map_err(|_| bad("a positive integer"))?,
            "seed" => seed = Some(value.parse().map_err(|_| bad("an unsigned integer"))?),
            "measurement_interval" => {
                config.measurement_interval =
                    value.parse().map_err(|_| bad("a positive integer"))?
            }
            "grid_resolution" => {
                config.grid_resolution = value.parse().map_err(|_| bad("a positive integer"))?
            }
            "merge_tol" => config.merge_tol = value.parse().map_err(|_| bad("a number"))?,
            "motor_propagation" => {
                config.motor_propagation = match value {
                    "weighted_sum" => MotorPropagation::WeightedSum,
                    "paper_exp" => MotorPropagation::PaperExp,
                    _ => return Err(bad("`weighted_sum` or `paper_exp`")),
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "line {lineno}: unknown key `{key}` (known keys: {})",
                    KEYS.join(", ")
                )))
            }
        }
    }
    let seed = seed.ok_or_else(|| Error::Config("missing required key `seed`".into()))?;
    config.seed = seed;
    config.validate()?;
    Ok(config)
}

/// Canonical `key = value` rendering; parses back to an identical config.
pub fn render_config(config: &SimulationConfig) -> String {
    let propagation = match config.motor_propagation {
        MotorPropagation::WeightedSum => "weighted_sum",
        MotorPropagation::PaperExp => "paper_exp",
    };
    format!(
        "n_agents = {}\n\
         neurons_per_map = {}\n\
         sigma = {}\n\
         learning_rate = {}\n\
         hebb_rate = {}\n\
         mean_decay = {}\n\
         mapping = {}\n\
         steps = {}\n\
         seed = {}\n\
         measurement_interval = {}\n\
         grid_resolution = {}\n\
         merge_tol = {}\n\
         motor_propagation = {}\n",
        config.n_agents,
        config.neurons_per_map,
        config.sigma,
        config.learning_rate,
        config.hebb_rate,
        config.mean_decay,
        config.mapping,
        config.steps,
        config.seed,
        config.measurement_interval,
        config.grid_resolution,
        config.merge_tol,
        propagation,
    )
}

/// SHA-256 of the canonical rendering, hex-encoded.
pub fn config_hash(config: &SimulationConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(render_config(config).as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
