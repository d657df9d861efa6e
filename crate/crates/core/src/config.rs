//! Pipeline configuration, stored as a flat `key = value` text file.
//!
//! ```text
//! # rowlink pipeline configuration
//! surface_threshold = 0.8
//! value_match_threshold = 0.9
//! max_candidates_per_query = 3
//! text_weight = 0.3
//! excluded_type_iris = http://www.w3.org/2002/07/owl#Thing, http://dbpedia.org/ontology/Agent
//! entity_iri_prefix =
//! signal_weights = 1, 1, 1, 1, 1
//! softmax_temperature = 1
//! renormalize_lookup = true
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are errors.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::kg::{default_excluded_types, LookupOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub surface_threshold: f64,
    pub value_match_threshold: f64,
    pub max_candidates_per_query: usize,
    pub text_weight: f64,
    pub excluded_type_iris: Vec<String>,
    pub entity_iri_prefix: String,
    /// Weights of (lookup, direct type, transitive type, surface, value match).
    pub signal_weights: [f64; 5],
    pub softmax_temperature: f64,
    /// Renormalize per-row lookup probabilities to sum to one.
    pub renormalize_lookup: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            surface_threshold: 0.8,
            value_match_threshold: 0.9,
            max_candidates_per_query: 3,
            text_weight: 0.3,
            excluded_type_iris: default_excluded_types(),
            entity_iri_prefix: String::new(),
            signal_weights: [1.0; 5],
            softmax_temperature: 1.0,
            renormalize_lookup: true,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn parse_f64(key: &str, v: &str, line: usize) -> Result<f64, ConfigError> {
    v.parse().map_err(|_| ConfigError::Syntax { line, message: format!("{key}: '{v}' is not a number") })
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl PipelineConfig {
    pub fn lookup_options(&self) -> LookupOptions {
        LookupOptions { text_weight: self.text_weight, entity_prefix: self.entity_iri_prefix.clone() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("surface_threshold", self.surface_threshold)?;
        unit("value_match_threshold", self.value_match_threshold)?;
        if self.max_candidates_per_query < 1 {
            return Err(ConfigError::Invalid("max_candidates_per_query must be at least 1".into()));
        }
        if !self.text_weight.is_finite() || self.text_weight < 0.0 {
            return Err(ConfigError::Invalid("text_weight must be a non-negative number".into()));
        }
        if self.signal_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || self.signal_weights.iter().sum::<f64>() <= 0.0
        {
            return Err(ConfigError::Invalid("signal_weights must be non-negative with a positive sum".into()));
        }
        if !(self.softmax_temperature.is_finite() && self.softmax_temperature > 0.0) {
            return Err(ConfigError::Invalid("softmax_temperature must be positive".into()));
        }
        Ok(())
    }

    /// Parse a config file body; missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, message: "expected 'key = value'".into() })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "surface_threshold" => cfg.surface_threshold = parse_f64(key, value, line)?,
                "value_match_threshold" => cfg.value_match_threshold = parse_f64(key, value, line)?,
                "max_candidates_per_query" => {
                    cfg.max_candidates_per_query = value.parse().map_err(|_| ConfigError::Syntax {
                        line,
                        message: format!("{key}: '{value}' is not a positive integer"),
                    })?
                }
                "text_weight" => cfg.text_weight = parse_f64(key, value, line)?,
                "excluded_type_iris" => cfg.excluded_type_iris = list(value).map(str::to_string).collect(),
                "entity_iri_prefix" => cfg.entity_iri_prefix = value.to_string(),
                "signal_weights" => {
                    let ws: Vec<f64> = list(value).map(|v| parse_f64(key, v, line)).collect::<Result<_, _>>()?;
                    cfg.signal_weights = ws.try_into().map_err(|ws: Vec<f64>| ConfigError::Syntax {
                        line,
                        message: format!("signal_weights needs 5 values, got {}", ws.len()),
                    })?;
                }
                "softmax_temperature" => cfg.softmax_temperature = parse_f64(key, value, line)?,
                "renormalize_lookup" => {
                    cfg.renormalize_lookup = value.parse().map_err(|_| ConfigError::Syntax {
                        line,
                        message: format!("{key}: '{value}' is not true/false"),
                    })?
                }
                other => return Err(ConfigError::Syntax { line, message: format!("unknown key '{other}'") }),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Render in the file format; `parse(render())` reproduces `self`.
    pub fn render(&self) -> String {
        let mut out = String::from("# rowlink pipeline configuration\n");
        let join = |v: &[f64]| v.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>().join(", ");
        writeln!(out, "surface_threshold = {:?}", self.surface_threshold).unwrap();
        writeln!(out, "value_match_threshold = {:?}", self.value_match_threshold).unwrap();
        writeln!(out, "max_candidates_per_query = {}", self.max_candidates_per_query).unwrap();
        writeln!(out, "text_weight = {:?}", self.text_weight).unwrap();
        writeln!(out, "excluded_type_iris = {}", self.excluded_type_iris.join(", ")).unwrap();
        writeln!(out, "entity_iri_prefix = {}", self.entity_iri_prefix).unwrap();
        writeln!(out, "signal_weights = {}", join(&self.signal_weights)).unwrap();
        writeln!(out, "softmax_temperature = {:?}", self.softmax_temperature).unwrap();
        writeln!(out, "renormalize_lookup = {}", self.renormalize_lookup).unwrap();
        out
    }
}
