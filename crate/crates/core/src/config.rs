//! Model configuration: the full declarative methodology.
//!
//! Configs are TOML. Every section is optional; omitted sections fall back
//! to the published defaults (standard interval table, the two shipped
//! support rows, equal weights, the standard star thresholds). See the
//! README for the schema reference.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::intervals::{Band, IntervalTable};
use crate::model::scoring::{CategoryBound, CategoryThresholds, WeightScheme};
use crate::model::stats::StdDevMode;
use crate::model::support::{DensityRow, SupportTable, TempRow};
use crate::model::types::{CriteriaGroup, ValueKind};

/// Screening parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningConfig {
    /// |r| at or above this is flagged; inclusive.
    pub threshold: f64,
    /// Factor ids exempt from pruning.
    pub whitelist: BTreeSet<String>,
    /// Pruning tie-break; higher survives.
    pub priorities: BTreeMap<String, i32>,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        ScreeningConfig {
            threshold: 0.7,
            whitelist: BTreeSet::new(),
            priorities: BTreeMap::new(),
        }
    }
}

/// Which factors get standardized within their population cluster, and
/// which get divided by population before scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratificationPolicy {
    /// Value kinds scored against the region's own cluster.
    pub stratified_kinds: BTreeSet<ValueKind>,
    /// Factor ids normalized per capita instead of stratified.
    pub per_capita: BTreeSet<String>,
}

impl Default for StratificationPolicy {
    fn default() -> Self {
        StratificationPolicy {
            stratified_kinds: [ValueKind::Absolute].into_iter().collect(),
            per_capita: BTreeSet::new(),
        }
    }
}

/// Metadata override for one factor, applied on top of dataset headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorOverride {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<CriteriaGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ValueKind>,
}

/// The fully validated methodology.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub intervals: IntervalTable,
    pub support: SupportTable,
    pub weights: WeightScheme,
    pub categories: CategoryThresholds,
    pub stratification: StratificationPolicy,
    pub stddev_mode: StdDevMode,
    pub screening: ScreeningConfig,
    pub factor_overrides: Vec<FactorOverride>,
    /// SHA-256 of the canonical TOML rendering, lowercase hex.
    pub digest: String,
}

impl Default for ModelConfig {
    fn default() -> Self {
        finalize(ModelConfig {
            intervals: IntervalTable::standard(),
            support: SupportTable::standard(),
            weights: WeightScheme::Equal,
            categories: CategoryThresholds::standard(),
            stratification: StratificationPolicy::default(),
            stddev_mode: StdDevMode::Population,
            screening: ScreeningConfig::default(),
            factor_overrides: Vec::new(),
            digest: String::new(),
        })
    }
}

impl ModelConfig {
    /// Resolves the weight scheme against a dataset's factor set, checking
    /// coverage of explicit weights.
    pub fn resolve_weights(&self, factor_ids: &[String]) -> Result<WeightScheme> {
        self.weights.check_coverage(factor_ids)?;
        Ok(self.weights.clone())
    }

    /// Applies factor overrides and screening whitelist/priorities to a
    /// parsed dataset. Clears the fallback warning for each piece of
    /// metadata the config supplies.
    pub fn apply_to_dataset(&self, dataset: &mut Dataset) -> Result<()> {
        for o in &self.factor_overrides {
            let Some(factor) = dataset.factors.iter_mut().find(|f| f.id == o.id) else {
                return Err(Error::config(format!(
                    "factors: override for unknown factor '{}'",
                    o.id
                )));
            };
            if let Some(name) = &o.name {
                factor.name = name.clone();
            }
            if let Some(group) = o.group {
                factor.group = group;
                let needle = crate::dataset::missing_group_warning(&o.id);
                dataset.warnings.retain(|w| !w.starts_with(&needle));
            }
            if let Some(kind) = o.kind {
                factor.value_kind = kind;
                let needle = crate::dataset::missing_kind_warning(&o.id);
                dataset.warnings.retain(|w| !w.starts_with(&needle));
            }
        }
        for id in &self.screening.whitelist {
            let Some(factor) = dataset.factors.iter_mut().find(|f| &f.id == id) else {
                return Err(Error::config(format!(
                    "screening.whitelist names unknown factor '{id}'"
                )));
            };
            factor.expert_whitelisted = true;
        }
        for (id, &priority) in &self.screening.priorities {
            let Some(factor) = dataset.factors.iter_mut().find(|f| &f.id == id) else {
                return Err(Error::config(format!(
                    "screening.priorities names unknown factor '{id}'"
                )));
            };
            factor.expert_priority = priority;
        }
        for id in &self.stratification.per_capita {
            if !dataset.factors.iter().any(|f| &f.id == id) {
                return Err(Error::config(format!(
                    "options.per_capita names unknown factor '{id}'"
                )));
            }
        }
        Ok(())
    }

    /// Canonical TOML rendering; the digest is the SHA-256 of these bytes.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(&RawConfig::from(self)).expect("config serializes")
    }

    /// Returns the config with another standard-deviation mode, digest
    /// refreshed; used for command-line overrides.
    pub fn with_stddev_mode(mut self, mode: StdDevMode) -> Self {
        self.stddev_mode = mode;
        finalize(self)
    }
}

fn finalize(mut config: ModelConfig) -> ModelConfig {
    config.digest = String::new();
    let canonical = config.canonical_toml();
    config.digest = hex::encode(Sha256::digest(canonical.as_bytes()));
    config
}

/// Loads and validates a config file.
pub fn load_config(path: &Path) -> Result<ModelConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

/// Parses and validates config text; empty input yields all defaults.
pub fn parse_config_str(text: &str) -> Result<ModelConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
    raw.build()
}

// ---------------------------------------------------------------------------
// raw TOML schema

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    intervals: Vec<RawBand>,
    #[serde(default, skip_serializing_if = "RawSupport::is_empty")]
    support: RawSupport,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    weights: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    categories: Vec<RawCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    screening: Option<RawScreening>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    options: Option<RawOptions>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    factors: Vec<FactorOverride>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    /// Omitted lower bound means open below.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    /// Omitted upper bound means open above.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<f64>,
    points: u8,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSupport {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    temperature: Vec<RawSupportRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    density: Vec<RawSupportRow>,
}

impl RawSupport {
    fn is_empty(&self) -> bool {
        self.temperature.is_empty() && self.density.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSupportRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<f64>,
    points: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCategory {
    stars: u8,
    min: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScreening {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    whitelist: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    priorities: BTreeMap<String, i32>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stddev: Option<StdDevMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symmetric_upper_bands: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stratify_kinds: Option<BTreeSet<ValueKind>>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    per_capita: BTreeSet<String>,
}

impl RawConfig {
    fn build(self) -> Result<ModelConfig> {
        let options = self.options.unwrap_or_default();

        let intervals = if self.intervals.is_empty() {
            if options.symmetric_upper_bands == Some(true) {
                IntervalTable::symmetric_upper()
            } else {
                IntervalTable::standard()
            }
        } else {
            if options.symmetric_upper_bands == Some(true) {
                return Err(Error::config(
                    "options.symmetric_upper_bands conflicts with an explicit [[intervals]] table",
                ));
            }
            IntervalTable::new(
                self.intervals
                    .into_iter()
                    .map(|b| Band {
                        lower: b.lower.unwrap_or(f64::NEG_INFINITY),
                        upper: b.upper.unwrap_or(f64::INFINITY),
                        points: b.points,
                    })
                    .collect(),
            )?
        };

        let support = if self.support.is_empty() {
            SupportTable::standard()
        } else {
            SupportTable {
                temperature: self
                    .support
                    .temperature
                    .into_iter()
                    .map(|r| TempRow {
                        lower: r.lower.unwrap_or(f64::NEG_INFINITY),
                        upper: r.upper.unwrap_or(f64::INFINITY),
                        points: r.points,
                    })
                    .collect(),
                density: self
                    .support
                    .density
                    .into_iter()
                    .map(|r| DensityRow {
                        lower: r.lower.unwrap_or(f64::NEG_INFINITY),
                        upper: r.upper.unwrap_or(f64::INFINITY),
                        points: r.points,
                    })
                    .collect(),
            }
        };
        support.validate()?;

        let weights = if self.weights.is_empty() {
            WeightScheme::Equal
        } else {
            WeightScheme::per_factor(self.weights)?
        };

        let categories = if self.categories.is_empty() {
            CategoryThresholds::standard()
        } else {
            CategoryThresholds::new(
                self.categories
                    .into_iter()
                    .map(|c| CategoryBound {
                        stars: c.stars,
                        min: c.min,
                    })
                    .collect(),
            )?
        };

        let screening = match self.screening {
            None => ScreeningConfig::default(),
            Some(raw) => {
                let threshold = raw.threshold.unwrap_or(0.7);
                if !(threshold > 0.0 && threshold <= 1.0) {
                    return Err(Error::config(format!(
                        "screening.threshold must be in (0, 1], got {threshold}"
                    )));
                }
                ScreeningConfig {
                    threshold,
                    whitelist: raw.whitelist,
                    priorities: raw.priorities,
                }
            }
        };

        let stratification = StratificationPolicy {
            stratified_kinds: options
                .stratify_kinds
                .unwrap_or_else(|| [ValueKind::Absolute].into_iter().collect()),
            per_capita: options.per_capita,
        };

        Ok(finalize(ModelConfig {
            intervals,
            support,
            weights,
            categories,
            stratification,
            stddev_mode: options.stddev.unwrap_or_default(),
            screening,
            factor_overrides: self.factors,
            digest: String::new(),
        }))
    }
}

impl From<&ModelConfig> for RawConfig {
    fn from(config: &ModelConfig) -> RawConfig {
        let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
        RawConfig {
            intervals: config
                .intervals
                .bands()
                .iter()
                .map(|b| RawBand {
                    lower: finite(b.lower),
                    upper: finite(b.upper),
                    points: b.points,
                })
                .collect(),
            support: RawSupport {
                temperature: config
                    .support
                    .temperature
                    .iter()
                    .map(|r| RawSupportRow {
                        lower: finite(r.lower),
                        upper: finite(r.upper),
                        points: r.points,
                    })
                    .collect(),
                density: config
                    .support
                    .density
                    .iter()
                    .map(|r| RawSupportRow {
                        lower: finite(r.lower),
                        upper: finite(r.upper),
                        points: r.points,
                    })
                    .collect(),
            },
            weights: match &config.weights {
                WeightScheme::Equal => BTreeMap::new(),
                WeightScheme::PerFactor(map) => map.clone(),
            },
            categories: config
                .categories
                .bounds()
                .iter()
                .map(|b| RawCategory {
                    stars: b.stars,
                    min: b.min,
                })
                .collect(),
            screening: Some(RawScreening {
                threshold: Some(config.screening.threshold),
                whitelist: config.screening.whitelist.clone(),
                priorities: config.screening.priorities.clone(),
            }),
            options: Some(RawOptions {
                stddev: Some(config.stddev_mode),
                symmetric_upper_bands: None,
                stratify_kinds: Some(config.stratification.stratified_kinds.clone()),
                per_capita: config.stratification.per_capita.clone(),
            }),
            factors: config.factor_overrides.clone(),
        }
    }
}
