//! Weighted aggregation, overall score and star categorization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Factor weighting scheme.
///
/// `Equal` is the default and weights every factor 1/I; the contingent
/// score then reduces to the arithmetic mean of the points, computed as
/// such so it can never leave `[0, 10]` through rounding. Explicit weights
/// need not sum to one; reports surface the implied maximum score.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    #[default]
    Equal,
    PerFactor(BTreeMap<String, f64>),
}

impl WeightScheme {
    pub fn per_factor(weights: BTreeMap<String, f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::config(
                "weights: at least one factor weight required",
            ));
        }
        for (id, &w) in &weights {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::config(format!(
                    "weights: factor '{id}' has weight {w}; weights must be finite and > 0"
                )));
            }
        }
        Ok(WeightScheme::PerFactor(weights))
    }

    /// Concrete weight per factor id; `Equal` materializes as 1/I.
    pub fn materialize(&self, factor_ids: &[String]) -> BTreeMap<String, f64> {
        match self {
            WeightScheme::Equal => {
                let w = 1.0 / factor_ids.len() as f64;
                factor_ids.iter().map(|id| (id.clone(), w)).collect()
            }
            WeightScheme::PerFactor(map) => map.clone(),
        }
    }

    /// Sum of weights over `factor_count` factors; 1 for equal weighting.
    pub fn weight_sum(&self, factor_count: usize) -> f64 {
        match self {
            WeightScheme::Equal => {
                debug_assert!(factor_count > 0);
                1.0
            }
            WeightScheme::PerFactor(map) => map.values().sum(),
        }
    }

    /// Checks that explicit weights cover exactly the given factor ids.
    pub fn check_coverage(&self, factor_ids: &[String]) -> Result<()> {
        let WeightScheme::PerFactor(map) = self else {
            return Ok(());
        };
        let missing: Vec<&String> = factor_ids
            .iter()
            .filter(|id| !map.contains_key(*id))
            .collect();
        let extra: Vec<&String> = map.keys().filter(|id| !factor_ids.contains(id)).collect();
        if missing.is_empty() && extra.is_empty() {
            return Ok(());
        }
        let mut parts = Vec::new();
        if !missing.is_empty() {
            parts.push(format!(
                "missing weights for {}",
                missing
                    .iter()
                    .map(|s| format!("'{s}'"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        if !extra.is_empty() {
            parts.push(format!(
                "weights for unknown factors {}",
                extra
                    .iter()
                    .map(|s| format!("'{s}'"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        Err(Error::KeyMismatch(parts.join("; ")))
    }
}

/// Combines per-factor points into the contingent score R.
///
/// Errors if explicit weights and the points map do not cover the same
/// factor ids.
pub fn contingent_score(points: &BTreeMap<String, u8>, weights: &WeightScheme) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::KeyMismatch("points map is empty".into()));
    }
    match weights {
        WeightScheme::Equal => {
            let total: u64 = points.values().map(|&p| p as u64).sum();
            Ok(total as f64 / points.len() as f64)
        }
        WeightScheme::PerFactor(map) => {
            let ids: Vec<String> = points.keys().cloned().collect();
            weights.check_coverage(&ids)?;
            Ok(points.iter().map(|(id, &p)| p as f64 * map[id]).sum())
        }
    }
}

/// Overall score: contingent score plus both support components.
pub fn overall_score(contingent: f64, density_support: f64, temp_support: f64) -> f64 {
    contingent + density_support + temp_support
}

/// Star thresholds, highest first; scores below the last threshold fall
/// into the one-star floor. Thresholds are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CategoryBound>", into = "Vec<CategoryBound>")]
pub struct CategoryThresholds {
    bounds: Vec<CategoryBound>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryBound {
    pub stars: u8,
    pub min: f64,
}

impl CategoryThresholds {
    pub fn new(bounds: Vec<CategoryBound>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::config("categories: at least one threshold required"));
        }
        for (i, b) in bounds.iter().enumerate() {
            if !b.min.is_finite() {
                return Err(Error::config(format!(
                    "categories: row {} has non-finite threshold",
                    i + 1
                )));
            }
            if b.stars < 2 || b.stars > 5 {
                return Err(Error::config(format!(
                    "categories: row {} names {} stars; thresholds cover 2..=5 and 1 star is the floor",
                    i + 1,
                    b.stars
                )));
            }
        }
        for i in 1..bounds.len() {
            if bounds[i].stars >= bounds[i - 1].stars {
                return Err(Error::config(format!(
                    "categories: stars not decreasing at row {} ({} after {})",
                    i + 1,
                    bounds[i].stars,
                    bounds[i - 1].stars
                )));
            }
            if bounds[i].min >= bounds[i - 1].min {
                return Err(Error::config(format!(
                    "categories: thresholds not decreasing at row {} ({} after {})",
                    i + 1,
                    bounds[i].min,
                    bounds[i - 1].min
                )));
            }
        }
        Ok(CategoryThresholds { bounds })
    }

    /// Published scale: 5★ ≥ 8, 4★ ≥ 6.5, 3★ ≥ 4.5, 2★ ≥ 2.5, else 1★.
    pub fn standard() -> Self {
        CategoryThresholds {
            bounds: vec![
                CategoryBound { stars: 5, min: 8.0 },
                CategoryBound { stars: 4, min: 6.5 },
                CategoryBound { stars: 3, min: 4.5 },
                CategoryBound { stars: 2, min: 2.5 },
            ],
        }
    }

    pub fn bounds(&self) -> &[CategoryBound] {
        &self.bounds
    }
}

impl Default for CategoryThresholds {
    fn default() -> Self {
        CategoryThresholds::standard()
    }
}

impl TryFrom<Vec<CategoryBound>> for CategoryThresholds {
    type Error = Error;

    fn try_from(bounds: Vec<CategoryBound>) -> Result<Self> {
        CategoryThresholds::new(bounds)
    }
}

impl From<CategoryThresholds> for Vec<CategoryBound> {
    fn from(t: CategoryThresholds) -> Vec<CategoryBound> {
        t.bounds
    }
}

/// Highest star category whose inclusive threshold the score meets.
pub fn categorize(overall: f64, thresholds: &CategoryThresholds) -> u8 {
    thresholds
        .bounds
        .iter()
        .find(|b| overall >= b.min)
        .map_or(1, |b| b.stars)
}
