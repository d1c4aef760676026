//! Composite-index rating engine for regional football development
//! efficiency.
//!
//! The engine scores every region on a set of model factors with the
//! three-sigma interval method (0..=10 points per factor against the
//! factor's mean and standard deviation, absolute factors standardized
//! within the region's population cluster), aggregates the points into a
//! weighted contingent score, adds temperature and density support scores,
//! and maps the overall score to a 1..=5 star category. Factor screening
//! (pairwise Pearson correlations with threshold pruning and expert
//! whitelists), cross-year trend comparison, weight-sensitivity analysis
//! and a seeded synthetic dataset generator round out the toolkit.
//!
//! All public operations are pure functions over immutable value types and
//! are safe to call concurrently.

pub mod config;
pub mod dataset;
pub mod error;
pub mod histogram;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod screening;
pub mod synth;

pub use config::{
    load_config, parse_config_str, ModelConfig, ScreeningConfig, StratificationPolicy,
};
pub use dataset::{
    cluster_population, parse_dataset, parse_dataset_bytes, parse_dataset_reader, to_csv_string,
    write_csv, Dataset, Provenance,
};
pub use error::{Error, Result};
pub use histogram::{histogram_report, Histogram, HistogramReport};
pub use model::{
    allocate_points, categorize, compute_factor_stats, contingent_score, overall_score,
    support_scores, Band, CategoryBound, CategoryThresholds, CriteriaGroup, FactorDefinition,
    FactorStats, IntervalTable, PopulationCluster, RatingResult, RegionRecord, StdDevMode, Stratum,
    SupportTable, ValueKind, WeightScheme,
};
pub use pipeline::{
    compare_years, group_subscores, run_rating, sensitivity, spearman, GroupSubscores, RatingTable,
    RegionStability, RegionTrend, StabilityReport, StarTransition, TrendPoint, TrendReport,
    TrendStatus,
};
pub use report::{combine_digests, sha256_hex, ReportEnvelope, ReportPayload};
pub use screening::{
    flag_collinear, pearson_matrix, prune, screen_dataset, CorrelationMatrix, Elimination,
    FlaggedPair, ScreeningReport,
};
pub use synth::{generate_synthetic, FactorDistribution, SyntheticFactor, SyntheticSpec};
