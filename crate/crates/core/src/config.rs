//! Flat `key = value` run configuration for `simulate`.
//!
//! One assignment per line, `#` starts a comment. Command-line flags are
//! merged in afterwards and take precedence.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use crate::detection::{DetectionError, DetectorModel, DolinarConfig, FeedbackLaw};
use crate::infotheory::{ChannelParams, RateError};
use crate::simulation::{Scheme, SchemeConfig, SimulationError, DEFAULT_BOOTSTRAP_RESAMPLES};

pub const KEYS: [&str; 16] = [
    "scheme",
    "nbar",
    "L",
    "lambda",
    "trials",
    "seed",
    "slices",
    "amplitude_cap",
    "feedback",
    "efficiency",
    "dark",
    "transmission",
    "use_decomposed_plan",
    "stratified",
    "bootstrap",
    "dolinar_seed",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    Line { origin: String, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    /// Line number in the file, or `None` for a command-line flag.
    line: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, Entry>,
}

fn origin(line: Option<usize>, key: &str) -> String {
    match line {
        Some(n) => format!("line {n}"),
        None => format!("flag --{key}"),
    }
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Line {
                origin: format!("line {line}"),
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(err(format!("key `{key}` has no value")));
            }
            if map.entries.contains_key(key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            map.entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line: Some(line),
                },
            );
        }
        Ok(map)
    }

    /// Overrides `key` with a command-line value.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        debug_assert!(KEYS.contains(&key), "{key}");
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: None,
            },
        );
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let Some(entry) = self.entries.get(key) else {
            return Ok(None);
        };
        entry
            .value
            .parse()
            .map(Some)
            .map_err(|e: T::Err| ConfigError::Line {
                origin: origin(entry.line, key),
                message: format!("invalid value `{}` for `{key}`: {e}", entry.value),
            })
    }

    fn require<T: FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or(ConfigError::Missing(key))
    }

    /// Reports a semantic problem against the line that set `key`.
    fn reject(&self, key: &str, message: String) -> ConfigError {
        match self.entries.get(key) {
            Some(entry) => ConfigError::Line {
                origin: origin(entry.line, key),
                message,
            },
            None => ConfigError::Invalid(message),
        }
    }

    pub fn to_scheme_config(&self) -> Result<SchemeConfig, ConfigError> {
        let scheme = match self.get::<String>("scheme")?.as_deref() {
            None | Some("direct") | Some("direct_ppm") => Scheme::DirectPpm,
            Some("hybrid") => Scheme::Hybrid,
            Some(other) => {
                return Err(self.reject(
                    "scheme",
                    format!("unknown scheme `{other}` (direct or hybrid)"),
                ))
            }
        };
        let n_bar: f64 = self.require("nbar")?;
        let length: usize = self.require("L")?;
        let lambda: f64 = self.get("lambda")?.unwrap_or(0.0);
        let trials: u64 = self.require("trials")?;
        let seed: u64 = self.get("seed")?.unwrap_or(0);
        let feedback = match self.get::<String>("feedback")?.as_deref() {
            None | Some("scheduled") => FeedbackLaw::Scheduled,
            Some("posterior") => FeedbackLaw::Posterior,
            Some(other) => {
                return Err(self.reject(
                    "feedback",
                    format!("unknown feedback law `{other}` (scheduled or posterior)"),
                ))
            }
        };
        let dolinar = (scheme == Scheme::Hybrid).then(|| -> Result<_, ConfigError> {
            Ok(DolinarConfig {
                num_slices: self
                    .get("slices")?
                    .unwrap_or(DolinarConfig::default().num_slices),
                amplitude_cap: self.get("amplitude_cap")?,
                feedback,
                rng_seed: self.get("dolinar_seed")?.unwrap_or(seed),
            })
        });
        let config = SchemeConfig {
            scheme,
            params: ChannelParams::new(n_bar, length, lambda),
            detector: DetectorModel {
                efficiency: self.get("efficiency")?.unwrap_or(1.0),
                dark_click_probability: self.get("dark")?.unwrap_or(0.0),
            },
            dolinar: dolinar.transpose()?,
            use_decomposed_plan: self.get("use_decomposed_plan")?.unwrap_or(false),
            per_op_transmission: self.get("transmission")?.unwrap_or(1.0),
            trials,
            seed,
            stratified: self.get("stratified")?.unwrap_or(false),
            bootstrap_resamples: self
                .get("bootstrap")?
                .unwrap_or(DEFAULT_BOOTSTRAP_RESAMPLES),
        };
        if let Err(e) = config.validate() {
            let key = match &e {
                SimulationError::Config(m) if m.starts_with("trials") => "trials",
                SimulationError::Config(m) if m.starts_with("per_op") => "transmission",
                SimulationError::Config(m) if m.starts_with("sequence") => "L",
                SimulationError::Rate(RateError::Lambda(_)) => "lambda",
                SimulationError::Rate(_) => "nbar",
                SimulationError::Detection(d) => match d {
                    DetectionError::Efficiency(_) => "efficiency",
                    DetectionError::DarkClicks(_) => "dark",
                    DetectionError::NoSlices => "slices",
                    DetectionError::AmplitudeCap(_) => "amplitude_cap",
                    _ => "scheme",
                },
                _ => "scheme",
            };
            return Err(self.reject(key, e.to_string()));
        }
        Ok(config)
    }
}
