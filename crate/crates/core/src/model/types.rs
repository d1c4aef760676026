//! Domain value types: criteria groups, factors, regions, population clusters.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The five criteria groups a model factor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriteriaGroup {
    ReserveTraining,
    EliteSport,
    Infrastructure,
    Grassroots,
    DevelopmentPromotion,
}

impl CriteriaGroup {
    pub const ALL: [CriteriaGroup; 5] = [
        CriteriaGroup::ReserveTraining,
        CriteriaGroup::EliteSport,
        CriteriaGroup::Infrastructure,
        CriteriaGroup::Grassroots,
        CriteriaGroup::DevelopmentPromotion,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CriteriaGroup::ReserveTraining => "reserve_training",
            CriteriaGroup::EliteSport => "elite_sport",
            CriteriaGroup::Infrastructure => "infrastructure",
            CriteriaGroup::Grassroots => "grassroots",
            CriteriaGroup::DevelopmentPromotion => "development_promotion",
        }
    }
}

impl fmt::Display for CriteriaGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CriteriaGroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "reserve_training" => Ok(CriteriaGroup::ReserveTraining),
            "elite_sport" => Ok(CriteriaGroup::EliteSport),
            "infrastructure" => Ok(CriteriaGroup::Infrastructure),
            "grassroots" => Ok(CriteriaGroup::Grassroots),
            "development_promotion" => Ok(CriteriaGroup::DevelopmentPromotion),
            other => Err(format!("unknown criteria group '{other}'")),
        }
    }
}

/// Whether a factor carries an absolute count, a ratio, or a period-over-period change.
///
/// Absolute factors are standardized within a region's population cluster by
/// default; relative and dynamic factors against the whole region set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Absolute,
    Relative,
    Dynamic,
}

impl ValueKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ValueKind::Absolute => "absolute",
            ValueKind::Relative => "relative",
            ValueKind::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ValueKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "absolute" => Ok(ValueKind::Absolute),
            "relative" => Ok(ValueKind::Relative),
            "dynamic" => Ok(ValueKind::Dynamic),
            other => Err(format!("unknown value kind '{other}'")),
        }
    }
}

/// One model criterion: identity, grouping and screening metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDefinition {
    pub id: String,
    pub name: String,
    pub group: CriteriaGroup,
    pub value_kind: ValueKind,
    /// Exempt from multicollinearity pruning.
    #[serde(default)]
    pub expert_whitelisted: bool,
    /// Pruning tie-break; higher survives.
    #[serde(default)]
    pub expert_priority: i32,
}

impl FactorDefinition {
    pub fn new(id: impl Into<String>, group: CriteriaGroup, value_kind: ValueKind) -> Self {
        let id = id.into();
        FactorDefinition {
            name: id.clone(),
            id,
            group,
            value_kind,
            expert_whitelisted: false,
            expert_priority: 0,
        }
    }
}

/// Region strata by resident count. Ordering is small < medium < large.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationCluster {
    Small,
    Medium,
    Large,
}

impl PopulationCluster {
    pub const ALL: [PopulationCluster; 3] = [
        PopulationCluster::Small,
        PopulationCluster::Medium,
        PopulationCluster::Large,
    ];

    /// Cluster for a resident count. The upper label reads strictly
    /// ("more than 2 mil."), so exactly 2 000 000 is medium; the middle
    /// band is inclusive at its lower edge, so exactly 1 000 000 is medium.
    pub fn from_population(population: u64) -> Self {
        if population > 2_000_000 {
            PopulationCluster::Large
        } else if population >= 1_000_000 {
            PopulationCluster::Medium
        } else {
            PopulationCluster::Small
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PopulationCluster::Small => "small",
            PopulationCluster::Medium => "medium",
            PopulationCluster::Large => "large",
        }
    }
}

impl fmt::Display for PopulationCluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which slice of the region set a statistic was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    All,
    Cluster(PopulationCluster),
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stratum::All => f.write_str("all"),
            Stratum::Cluster(c) => f.write_str(c.as_str()),
        }
    }
}

/// One region's raw inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub id: String,
    pub name: String,
    /// Resident count; validated positive at ingestion.
    pub population: u64,
    /// Mean January temperature, °C.
    pub january_mean_temp: f64,
    /// Population density in the model's percent units.
    pub population_density: f64,
    /// Raw value per factor id; dense over the model's factor set.
    pub factor_values: BTreeMap<String, f64>,
}

impl RegionRecord {
    pub fn cluster(&self) -> PopulationCluster {
        PopulationCluster::from_population(self.population)
    }
}

/// Per-region outcome of a rating run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingResult {
    pub region_id: String,
    /// Allocated points per factor id, each in 0..=10.
    pub points: BTreeMap<String, u8>,
    pub contingent_score: f64,
    pub density_support: f64,
    pub temp_support: f64,
    pub overall_score: f64,
    pub stars: u8,
    pub rank: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_boundaries() {
        assert_eq!(
            PopulationCluster::from_population(2_500_000),
            PopulationCluster::Large
        );
        // "more than 2 mil." is strict
        assert_eq!(
            PopulationCluster::from_population(2_000_000),
            PopulationCluster::Medium
        );
        assert_eq!(
            PopulationCluster::from_population(1_000_000),
            PopulationCluster::Medium
        );
        assert_eq!(
            PopulationCluster::from_population(999_999),
            PopulationCluster::Small
        );
    }

    #[test]
    fn cluster_monotone_in_population() {
        let mut last = PopulationCluster::Small;
        for p in [
            1u64, 500_000, 999_999, 1_000_000, 1_999_999, 2_000_000, 2_000_001, 9_000_000,
        ] {
            let c = PopulationCluster::from_population(p);
            assert!(c >= last, "cluster regressed at population {p}");
            last = c;
        }
    }

    #[test]
    fn group_round_trips_through_str() {
        for g in CriteriaGroup::ALL {
            assert_eq!(g.as_str().parse::<CriteriaGroup>().unwrap(), g);
        }
        assert!("football".parse::<CriteriaGroup>().is_err());
    }
}
