//! Run configuration: defaults, then a key=value file, then `CORRCLUST_*`
//! environment variables, then command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

pub const ENV_PREFIX: &str = "CORRCLUST_";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub epsilon: f64,
    pub seed: u64,
    pub workers: usize,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    options: BTreeMap<String, String>,
}

/// Reads a TOML file of flat `key = value` pairs into strings.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    table
        .into_iter()
        .map(|(k, v)| {
            let s = match v {
                toml::Value::String(s) => s,
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                toml::Value::Boolean(b) => b.to_string(),
                other => return Err(CliError::Config(format!("key {k}: unsupported value {other}"))),
            };
            Ok((normalize(&k), s))
        })
        .collect()
}

/// `CORRCLUST_FOO_BAR` becomes `foo-bar`.
pub fn env_overrides(vars: impl IntoIterator<Item = (String, String)>) -> BTreeMap<String, String> {
    vars.into_iter()
        .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|rest| (normalize(rest), v)))
        .filter(|(k, _)| k != "config")
        .collect()
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl RunConfig {
    /// Merges the layers; later layers win.
    pub fn resolve(layers: &[BTreeMap<String, String>]) -> Result<Self, CliError> {
        let mut options = BTreeMap::new();
        for layer in layers {
            options.extend(layer.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        let mut cfg = RunConfig { epsilon: 0.1, seed: 0, workers: default_workers(), input: None, output: None, options };
        cfg.epsilon = cfg.get("epsilon", cfg.epsilon)?;
        cfg.seed = cfg.get("seed", cfg.seed)?;
        cfg.workers = cfg.get("workers", cfg.workers)?;
        cfg.input = cfg.options.get("input").map(PathBuf::from);
        cfg.output = cfg.options.get("output").map(PathBuf::from);
        if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0 && cfg.epsilon <= 0.1) {
            return Err(CliError::Config(format!("epsilon {} not in (0, 0.1]", cfg.epsilon)));
        }
        if cfg.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get_opt(key)?.unwrap_or(default))
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.options
            .get(key)
            .map(|s| s.trim().parse().map_err(|e| CliError::Config(format!("{key} = {s:?}: {e}"))))
            .transpose()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.options.get(key).map(PathBuf::from)
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf, CliError> {
        self.path(key).ok_or_else(|| CliError::Config(format!("missing --{key}")))
    }

    pub fn require_input(&self) -> Result<&Path, CliError> {
        self.input.as_deref().ok_or_else(|| CliError::Config("missing --input".into()))
    }

    pub fn require_output(&self) -> Result<&Path, CliError> {
        self.output.as_deref().ok_or_else(|| CliError::Config("missing --output".into()))
    }
}
