//! On-disk configuration: weight overrides, annotations, language
//! declarations, and the combined audit configuration document.

use crate::facts::HeuristicConfig;
use crate::metrics::{AnnotationSet, ContrastMode, LanguagePresence, LocalizationWeights};
use crate::rollup::{Scale, ScaleError, WeightError, WeightSet};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error("{0}")]
    Invalid(String),
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Which languages matter for the localization score and how the offered
/// set maps onto its indicators. Tags are matched on their lowercase
/// primary subtag ("en-GB" counts as "en").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LanguageConfig {
    /// The state language of the audited site's audience.
    pub state: String,
    /// Popular European languages, each contributing its own share.
    pub popular: Vec<String>,
    /// When set, only these tags count toward the "other languages"
    /// indicator; when empty, any unlisted offered language counts.
    pub other: Vec<String>,
    /// Languages known to be offered but invisible to static analysis
    /// (e.g. behind a script-driven language switcher).
    pub declared_offered: Vec<String>,
    pub weights: LocalizationWeights,
}

impl Default for LanguageConfig {
    fn default() -> Self {
        LanguageConfig {
            state: "uk".to_string(),
            popular: vec!["de".to_string(), "fr".to_string()],
            other: Vec::new(),
            declared_offered: Vec::new(),
            weights: LocalizationWeights::default(),
        }
    }
}

fn primary_subtag(tag: &str) -> String {
    tag.trim()
        .split(['-', '_'])
        .next()
        .unwrap_or("")
        .to_ascii_lowercase()
}

impl LanguageConfig {
    pub fn from_file(path: &Path) -> Result<LanguageConfig, ConfigError> {
        read_json(path)
    }

    /// Map the offered language tags onto the presence indicators.
    pub fn presence(&self, offered: &BTreeSet<String>) -> LanguagePresence {
        let mut offered: BTreeSet<String> = offered
            .iter()
            .map(|t| primary_subtag(t))
            .filter(|t| !t.is_empty())
            .collect();
        offered.extend(self.declared_offered.iter().map(|t| primary_subtag(t)));

        let state = primary_subtag(&self.state);
        let popular: BTreeSet<String> = self.popular.iter().map(|t| primary_subtag(t)).collect();
        let other_allowed: BTreeSet<String> =
            self.other.iter().map(|t| primary_subtag(t)).collect();

        let mut presence = LanguagePresence::default();
        for tag in &offered {
            if *tag == state {
                presence.state_language = true;
            } else if tag == "en" {
                presence.english = true;
            } else if popular.contains(tag) {
                presence.popular_european.insert(tag.clone());
            } else if other_allowed.is_empty() || other_allowed.contains(tag) {
                presence.other = true;
            }
        }
        presence
    }
}

impl AnnotationSet {
    pub fn from_file(path: &Path) -> Result<AnnotationSet, ConfigError> {
        let annotations: AnnotationSet = read_json(path)?;
        annotations.validate().map_err(ConfigError::Invalid)?;
        Ok(annotations)
    }
}

/// Load a flat `{id: weight}` override file on top of the defaults.
pub fn weights_from_file(path: &Path) -> Result<WeightSet, ConfigError> {
    let overrides: BTreeMap<String, f64> = read_json(path)?;
    Ok(WeightSet::with_overrides(&overrides)?)
}

pub fn heuristics_from_file(path: &Path) -> Result<HeuristicConfig, ConfigError> {
    read_json(path)
}

/// Everything an audit run needs beyond the target list.
#[derive(Debug, Clone, Default)]
pub struct AuditConfig {
    pub weights: WeightSet,
    pub annotations: Option<AnnotationSet>,
    pub languages: LanguageConfig,
    pub contrast_mode: ContrastMode,
    pub scale: Scale,
    /// Force every page deep (true) or shallow (false) instead of the
    /// per-page rule.
    pub deep_page_override: Option<bool>,
    pub heuristics: HeuristicConfig,
    /// Also evaluate each page on its own.
    pub per_page: bool,
}

/// The single-document form of the configuration, accepted by embedders;
/// the CLI assembles the same thing from its flags and file arguments.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfigDoc {
    pub weights: Option<BTreeMap<String, f64>>,
    pub annotations: Option<AnnotationSet>,
    pub languages: Option<LanguageConfig>,
    pub contrast_mode: Option<ContrastMode>,
    pub breakpoints: Option<[f64; 4]>,
    pub deep_pages: Option<bool>,
    pub heuristics: Option<HeuristicConfig>,
    pub per_page: Option<bool>,
}

impl AuditConfigDoc {
    pub fn build(self) -> Result<AuditConfig, ConfigError> {
        let weights = match self.weights {
            Some(overrides) => WeightSet::with_overrides(&overrides)?,
            None => WeightSet::default(),
        };
        let scale = match self.breakpoints {
            Some(bp) => Scale::new(bp)?,
            None => Scale::default(),
        };
        if let Some(annotations) = &self.annotations {
            annotations.validate().map_err(ConfigError::Invalid)?;
        }
        Ok(AuditConfig {
            weights,
            annotations: self.annotations,
            languages: self.languages.unwrap_or_default(),
            contrast_mode: self.contrast_mode.unwrap_or_default(),
            scale,
            deep_page_override: self.deep_pages,
            heuristics: self.heuristics.unwrap_or_default(),
            per_page: self.per_page.unwrap_or(false),
        })
    }
}

/// Parse `a,b,c,d` into scale breakpoints.
pub fn parse_breakpoints(text: &str) -> Result<Scale, ConfigError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(ConfigError::Invalid(format!(
            "expected 4 comma-separated breakpoints, got {}",
            parts.len()
        )));
    }
    let mut bp = [0.0; 4];
    for (slot, part) in bp.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("invalid breakpoint {part:?}")))?;
    }
    Ok(Scale::new(bp)?)
}
