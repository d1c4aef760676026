//! Domain types and the pure scoring mathematics.
//!
//! Everything in this module is a plain value type or a pure function;
//! all of it is safe to share and call across threads.

pub mod intervals;
pub mod scoring;
pub mod stats;
pub mod support;
pub mod types;

pub use intervals::{allocate_points, Band, IntervalTable};
pub use scoring::{
    categorize, contingent_score, overall_score, CategoryBound, CategoryThresholds, WeightScheme,
};
pub use stats::{compute_factor_stats, FactorStats, StdDevMode};
pub use support::{support_scores, DensityRow, SupportTable, TempRow};
pub use types::{
    CriteriaGroup, FactorDefinition, PopulationCluster, RatingResult, RegionRecord, Stratum,
    ValueKind,
};
