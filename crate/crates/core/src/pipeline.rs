//! Rating pipeline: stats, points, aggregation, categorization, ranking,
//! plus cross-year trends and weight-sensitivity analysis.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::intervals::allocate_points;
use crate::model::scoring::{categorize, contingent_score, overall_score};
use crate::model::stats::{compute_factor_stats, FactorStats, StdDevMode};
use crate::model::support::support_scores;
use crate::model::types::{CriteriaGroup, PopulationCluster, RatingResult, RegionRecord, Stratum};

/// A complete rating run: ranked results plus the statistics behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTable {
    pub year: i32,
    /// Rank ascending; ranks are 1..=N and unique. Ordering is descending
    /// overall score, ties broken by descending contingent score, then
    /// ascending region id.
    pub results: Vec<RatingResult>,
    /// Stats used per factor, one entry per stratum.
    pub factor_stats: BTreeMap<String, Vec<FactorStats>>,
    pub stddev_mode: StdDevMode,
    /// Sum of the factor weights; 1 under equal weighting.
    pub weight_sum: f64,
    /// Implied maximum contingent score, 10 x weight sum.
    pub max_contingent: f64,
    pub config_digest: String,
    pub dataset_digest: String,
    pub warnings: Vec<String>,
}

impl RatingTable {
    pub fn result(&self, region_id: &str) -> Option<&RatingResult> {
        self.results.iter().find(|r| r.region_id == region_id)
    }

    /// region id -> rank
    pub fn rank_map(&self) -> BTreeMap<String, usize> {
        self.results
            .iter()
            .map(|r| (r.region_id.clone(), r.rank))
            .collect()
    }
}

/// Runs the full rating: per-factor stats (cluster-stratified where the
/// policy says so), point allocation, weighted aggregation, support
/// scores, categorization and ranking. Deterministic for identical inputs.
pub fn run_rating(dataset: &Dataset, config: &ModelConfig) -> Result<RatingTable> {
    dataset.validate()?;
    let factor_ids = dataset.factor_ids();
    let weights = config.resolve_weights(&factor_ids)?;
    let mut warnings = Vec::new();

    // effective value: per-capita factors are divided by population first
    let effective = |region: &RegionRecord, factor_id: &str| -> f64 {
        let v = region.factor_values[factor_id];
        if config.stratification.per_capita.contains(factor_id) {
            v / region.population as f64
        } else {
            v
        }
    };

    // stats per factor, keyed by stratum for stratified factors
    let mut factor_stats: BTreeMap<String, Vec<FactorStats>> = BTreeMap::new();
    let mut stats_for: BTreeMap<(String, Stratum), FactorStats> = BTreeMap::new();
    for factor in &dataset.factors {
        let stratified = config
            .stratification
            .stratified_kinds
            .contains(&factor.value_kind)
            && !config.stratification.per_capita.contains(&factor.id);
        let mut entries = Vec::new();
        if stratified {
            for cluster in PopulationCluster::ALL {
                let members = dataset.cluster_members(cluster);
                if members.is_empty() {
                    continue;
                }
                if members.len() < 2 {
                    return Err(Error::ClusterTooSmall {
                        cluster: cluster.as_str().to_string(),
                        count: members.len(),
                        factor: factor.id.clone(),
                    });
                }
                let values: Vec<f64> = members.iter().map(|r| effective(r, &factor.id)).collect();
                let stats = compute_factor_stats(&values, config.stddev_mode)?
                    .with_stratum(Stratum::Cluster(cluster));
                if stats.sigma == 0.0 {
                    warnings.push(format!(
                        "factor '{}' has zero variance in cluster '{cluster}'; its {} region(s) receive {} points",
                        factor.id,
                        members.len(),
                        config.intervals.degenerate_points()
                    ));
                }
                stats_for.insert(
                    (factor.id.clone(), Stratum::Cluster(cluster)),
                    stats.clone(),
                );
                entries.push(stats);
            }
        } else {
            let values: Vec<f64> = dataset
                .regions
                .iter()
                .map(|r| effective(r, &factor.id))
                .collect();
            let stats = compute_factor_stats(&values, config.stddev_mode)?;
            if stats.sigma == 0.0 {
                warnings.push(format!(
                    "factor '{}' has zero variance; every region receives {} points",
                    factor.id,
                    config.intervals.degenerate_points()
                ));
            }
            stats_for.insert((factor.id.clone(), Stratum::All), stats.clone());
            entries.push(stats);
        }
        factor_stats.insert(factor.id.clone(), entries);
    }

    // score each region
    let mut results: Vec<RatingResult> = Vec::with_capacity(dataset.regions.len());
    for region in &dataset.regions {
        let mut points = BTreeMap::new();
        for factor in &dataset.factors {
            let key_all = (factor.id.clone(), Stratum::All);
            let key_cluster = (factor.id.clone(), Stratum::Cluster(region.cluster()));
            let stats = stats_for
                .get(&key_all)
                .or_else(|| stats_for.get(&key_cluster))
                .expect("stats computed for every factor/stratum");
            points.insert(
                factor.id.clone(),
                allocate_points(effective(region, &factor.id), stats, &config.intervals),
            );
        }
        let contingent = contingent_score(&points, &weights)?;
        let (temp_support, density_support) = support_scores(
            region.january_mean_temp,
            region.population_density,
            &config.support,
        );
        let overall = overall_score(contingent, density_support, temp_support);
        let stars = categorize(overall, &config.categories);
        results.push(RatingResult {
            region_id: region.id.clone(),
            points,
            contingent_score: contingent,
            density_support,
            temp_support,
            overall_score: overall,
            stars,
            rank: 0,
        });
    }

    rank_results(&mut results);

    // config rows no region matched are surfaced, they usually indicate
    // unit mismatches
    for (i, row) in config.support.temperature.iter().enumerate() {
        if !dataset
            .regions
            .iter()
            .any(|r| row.contains(r.january_mean_temp))
        {
            warnings.push(format!(
                "support temperature row {} ({}, {}] matched no region",
                i + 1,
                row.lower,
                row.upper
            ));
        }
    }
    for (i, row) in config.support.density.iter().enumerate() {
        if !dataset
            .regions
            .iter()
            .any(|r| row.contains(r.population_density))
        {
            warnings.push(format!(
                "support density row {} [{}, {}) matched no region",
                i + 1,
                row.lower,
                row.upper
            ));
        }
    }

    let weight_sum = weights.weight_sum(factor_ids.len());
    Ok(RatingTable {
        year: dataset.year,
        results,
        factor_stats,
        stddev_mode: config.stddev_mode,
        weight_sum,
        max_contingent: 10.0 * weight_sum,
        config_digest: config.digest.clone(),
        dataset_digest: dataset.provenance.sha256.clone(),
        warnings,
    })
}

/// Sorts by the rating order and assigns ranks 1..=N.
fn rank_results(results: &mut [RatingResult]) {
    results.sort_by(|a, b| {
        b.overall_score
            .total_cmp(&a.overall_score)
            .then_with(|| b.contingent_score.total_cmp(&a.contingent_score))
            .then_with(|| a.region_id.cmp(&b.region_id))
    });
    for (i, r) in results.iter_mut().enumerate() {
        r.rank = i + 1;
    }
}

/// Unweighted mean points per criteria group, per region. Groups with no
/// factors in the model are absent rather than zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupSubscores {
    pub per_region: BTreeMap<String, BTreeMap<CriteriaGroup, f64>>,
}

pub fn group_subscores(table: &RatingTable, dataset: &Dataset) -> GroupSubscores {
    let mut grouped: BTreeMap<CriteriaGroup, Vec<&str>> = BTreeMap::new();
    for f in &dataset.factors {
        grouped.entry(f.group).or_default().push(&f.id);
    }
    let mut per_region = BTreeMap::new();
    for result in &table.results {
        let mut scores = BTreeMap::new();
        for (&group, members) in &grouped {
            let total: u64 = members.iter().map(|id| result.points[*id] as u64).sum();
            scores.insert(group, total as f64 / members.len() as f64);
        }
        per_region.insert(result.region_id.clone(), scores);
    }
    GroupSubscores { per_region }
}

/// Presence of a region across compared years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendStatus {
    /// Present in every compared table.
    Throughout,
    /// Absent early, present in the last table.
    Entered,
    /// Present in the first table, absent at the end.
    Exited,
    /// Present only in some middle subset.
    Intermittent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub year: i32,
    pub overall_score: f64,
    pub rank: usize,
    pub stars: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarTransition {
    pub from_year: i32,
    pub to_year: i32,
    pub from_stars: u8,
    pub to_stars: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionTrend {
    pub region_id: String,
    /// One entry per compared table, in input order; absent years are None.
    pub entries: Vec<Option<TrendPoint>>,
    /// Last-present minus first-present overall score; None when the
    /// region appears in fewer than two tables.
    pub score_delta: Option<f64>,
    /// First-present minus last-present rank (positive = climbed).
    pub rank_delta: Option<i64>,
    /// Star changes between consecutive present years.
    pub star_transitions: Vec<StarTransition>,
    pub status: TrendStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub years: Vec<i32>,
    pub regions: Vec<RegionTrend>,
}

/// Compares two or more rating tables region by region.
pub fn compare_years(tables: &[RatingTable]) -> Result<TrendReport> {
    if tables.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "trend comparison needs at least 2 rating tables, got {}",
            tables.len()
        )));
    }
    let mut all_regions: BTreeSet<String> = BTreeSet::new();
    for t in tables {
        for r in &t.results {
            all_regions.insert(r.region_id.clone());
        }
    }
    let overlap = all_regions
        .iter()
        .any(|id| tables.iter().filter(|t| t.result(id).is_some()).count() >= 2);
    if !overlap {
        return Err(Error::NoOverlap);
    }

    let years: Vec<i32> = tables.iter().map(|t| t.year).collect();
    let mut regions = Vec::new();
    for id in all_regions {
        let entries: Vec<Option<TrendPoint>> = tables
            .iter()
            .map(|t| {
                t.result(&id).map(|r| TrendPoint {
                    year: t.year,
                    overall_score: r.overall_score,
                    rank: r.rank,
                    stars: r.stars,
                })
            })
            .collect();
        let present: Vec<&TrendPoint> = entries.iter().flatten().collect();
        let (score_delta, rank_delta) = if present.len() >= 2 {
            let first = present[0];
            let last = present[present.len() - 1];
            (
                Some(last.overall_score - first.overall_score),
                Some(first.rank as i64 - last.rank as i64),
            )
        } else {
            (None, None)
        };
        let mut star_transitions = Vec::new();
        for w in present.windows(2) {
            if w[0].stars != w[1].stars {
                star_transitions.push(StarTransition {
                    from_year: w[0].year,
                    to_year: w[1].year,
                    from_stars: w[0].stars,
                    to_stars: w[1].stars,
                });
            }
        }
        let first_present = entries.first().unwrap().is_some();
        let last_present = entries.last().unwrap().is_some();
        let status = if entries.iter().all(Option::is_some) {
            TrendStatus::Throughout
        } else if !first_present && last_present {
            TrendStatus::Entered
        } else if first_present && !last_present {
            TrendStatus::Exited
        } else {
            TrendStatus::Intermittent
        };
        regions.push(RegionTrend {
            region_id: id,
            entries,
            score_delta,
            rank_delta,
            star_transitions,
            status,
        });
    }
    Ok(TrendReport { years, regions })
}

/// Rank stability of one region across perturbation trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionStability {
    pub region_id: String,
    pub baseline_rank: usize,
    pub min_rank: usize,
    pub max_rank: usize,
}

/// Outcome of the weight-perturbation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub regions: Vec<RegionStability>,
    pub spearman_mean: f64,
    pub spearman_min: f64,
    pub spearman_max: f64,
}

/// Perturbs the weights `trials` times (each factor's weight multiplied by
/// an independent uniform draw from `[1-epsilon, 1+epsilon]`, then
/// renormalized to sum 1), re-ranks, and reports per-region rank ranges
/// plus the Spearman rank correlation against the baseline. Points never
/// change under reweighting, so trials reuse the baseline point vectors.
/// Deterministic for a given seed; trials run in parallel.
pub fn sensitivity(
    dataset: &Dataset,
    config: &ModelConfig,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be in [0, 1), got {epsilon}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }

    let baseline = run_rating(dataset, config)?;
    let factor_ids = dataset.factor_ids();
    let base_weights: Vec<f64> = {
        let map = config.weights.materialize(&factor_ids);
        factor_ids.iter().map(|id| map[id]).collect()
    };
    let baseline_order: Vec<&RatingResult> = baseline.results.iter().collect();
    let n = baseline_order.len();

    let trial_ranks: Vec<Vec<usize>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            if epsilon == 0.0 {
                // the null perturbation rescales all weights by the same
                // constant, which cannot reorder anything
                return (1..=n).collect();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial as u64));
            let mut w: Vec<f64> = base_weights
                .iter()
                .map(|&b| b * rng.random_range(1.0 - epsilon..=1.0 + epsilon))
                .collect();
            let total: f64 = w.iter().sum();
            for wi in &mut w {
                *wi /= total;
            }
            // recompute R and the overall score from frozen points
            let mut scored: Vec<(usize, f64, f64, &str)> = baseline_order
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let contingent: f64 = factor_ids
                        .iter()
                        .zip(&w)
                        .map(|(id, wi)| r.points[id] as f64 * wi)
                        .sum();
                    let overall = overall_score(contingent, r.density_support, r.temp_support);
                    (i, overall, contingent, r.region_id.as_str())
                })
                .collect();
            scored.sort_by(|a, b| {
                b.1.total_cmp(&a.1)
                    .then_with(|| b.2.total_cmp(&a.2))
                    .then_with(|| a.3.cmp(b.3))
            });
            let mut ranks = vec![0usize; n];
            for (rank0, &(i, ..)) in scored.iter().enumerate() {
                ranks[i] = rank0 + 1;
            }
            ranks
        })
        .collect();

    let baseline_ranks: Vec<usize> = (1..=n).collect();
    let mut spearmans = Vec::with_capacity(trials);
    let mut min_rank: Vec<usize> = vec![usize::MAX; n];
    let mut max_rank: Vec<usize> = vec![0; n];
    for ranks in &trial_ranks {
        spearmans.push(spearman(&baseline_ranks, ranks));
        for (i, &r) in ranks.iter().enumerate() {
            min_rank[i] = min_rank[i].min(r);
            max_rank[i] = max_rank[i].max(r);
        }
    }

    let regions: Vec<RegionStability> = baseline_order
        .iter()
        .enumerate()
        .map(|(i, r)| RegionStability {
            region_id: r.region_id.clone(),
            baseline_rank: r.rank,
            min_rank: min_rank[i],
            max_rank: max_rank[i],
        })
        .collect();

    let spearman_mean = spearmans.iter().sum::<f64>() / spearmans.len() as f64;
    let spearman_min = spearmans.iter().cloned().fold(f64::INFINITY, f64::min);
    let spearman_max = spearmans.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        epsilon,
        trials,
        seed,
        regions,
        spearman_mean,
        spearman_min,
        spearman_max,
    })
}

fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Spearman rank correlation of two rankings without ties.
pub fn spearman(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    if a.len() < 2 {
        return 1.0;
    }
    let d2: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;
    use crate::dataset::parse_dataset_bytes;
    use crate::model::types::ValueKind;

    const FIXTURE: &str = "\
region_id,region_name,population,jan_temp_c,density_pct,f1:infrastructure:absolute,f2:grassroots:relative,f3:reserve_training:dynamic,f4:elite_sport:relative
delta,Delta,1100000,-11,75,160,2,0.05,4500
step,Steppe,1500000,-8,40,200,4,0.2,3000
tundra,Tundra,1200000,-22,55,120,0.5,0,1500
ural,Ural,2500000,-18,80,300,1,-0.05,9000
vol,Volga,3200000,-12,60,500,2.5,0.1,12000
";

    fn fixture() -> Dataset {
        parse_dataset_bytes(FIXTURE.as_bytes(), "fixture", 2013).unwrap()
    }

    fn default_config() -> ModelConfig {
        ModelConfig::default()
    }

    #[test]
    fn dominant_region_takes_rank_one_with_all_tens() {
        // 7 regions; one leads every factor by more than two sigma
        let mut text = String::from(
            "region_id,region_name,population,jan_temp_c,density_pct,a:grassroots:relative,b:elite_sport:relative\n",
        );
        for i in 0..6 {
            text.push_str(&format!("r{i},R{i},500000,-12,60,0,0\n"));
        }
        text.push_str("top,Top,500000,-12,60,100,50\n");
        let ds = parse_dataset_bytes(text.as_bytes(), "t", 0).unwrap();
        let table = run_rating(&ds, &default_config()).unwrap();
        let top = table.result("top").unwrap();
        assert_eq!(top.rank, 1);
        assert_eq!(top.contingent_score, 10.0);
        assert!(top.points.values().all(|&p| p == 10));
    }

    #[test]
    fn identical_rows_tie_break_deterministically() {
        let mut text = String::from(
            "region_id,region_name,population,jan_temp_c,density_pct,a:grassroots:relative\n",
        );
        text.push_str("zeta,Z,500000,-12,60,5\n");
        text.push_str("alpha,A,500000,-12,60,5\n");
        text.push_str("mid,M,500000,-12,60,9\n");
        let ds = parse_dataset_bytes(text.as_bytes(), "t", 0).unwrap();
        let table = run_rating(&ds, &default_config()).unwrap();
        // identical scores, distinct ranks, ascending id order
        let alpha = table.result("alpha").unwrap();
        let zeta = table.result("zeta").unwrap();
        assert_eq!(alpha.overall_score, zeta.overall_score);
        assert_eq!(alpha.rank + 1, zeta.rank);
        let ranks: Vec<usize> = table.results.iter().map(|r| r.rank).collect();
        assert_eq!(ranks, vec![1, 2, 3]);
    }

    #[test]
    fn weight_mismatch_is_an_error() {
        let ds = fixture();
        let config = parse_config_str("[weights]\nf1 = 1.0\n").unwrap();
        let err = run_rating(&ds, &config).unwrap_err();
        assert!(
            err.to_string().contains("weights/points key mismatch"),
            "{err}"
        );
    }

    #[test]
    fn undersized_cluster_names_itself() {
        // one large region only; f1 is absolute, so stats stratify
        let text = "\
region_id,region_name,population,jan_temp_c,density_pct,f1:infrastructure:absolute
big,Big,3000000,-12,60,10
s1,S1,500000,-12,60,4
s2,S2,600000,-12,60,5
";
        let ds = parse_dataset_bytes(text.as_bytes(), "t", 0).unwrap();
        let err = run_rating(&ds, &default_config()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cluster 'large'"), "{msg}");
        assert!(msg.contains("'f1'"), "{msg}");
    }

    #[test]
    fn zero_variance_factor_warns_and_scores_at_par() {
        let text = "\
region_id,region_name,population,jan_temp_c,density_pct,flat:grassroots:relative,var:elite_sport:relative
a,A,500000,-12,60,3,1
b,B,600000,-12,60,3,2
c,C,700000,-12,60,3,9
";
        let ds = parse_dataset_bytes(text.as_bytes(), "t", 0).unwrap();
        let table = run_rating(&ds, &default_config()).unwrap();
        assert!(table
            .warnings
            .iter()
            .any(|w| w.contains("'flat'") && w.contains("zero variance")));
        for r in &table.results {
            assert_eq!(r.points["flat"], 5);
        }
    }

    #[test]
    fn rescaled_weights_keep_the_order() {
        let ds = fixture();
        let ids = ds.factor_ids();
        let base =
            parse_config_str("[weights]\nf1 = 0.1\nf2 = 0.3\nf3 = 0.45\nf4 = 0.15\n").unwrap();
        let scaled =
            parse_config_str("[weights]\nf1 = 0.7\nf2 = 2.1\nf3 = 3.15\nf4 = 1.05\n").unwrap();
        let t1 = run_rating(&ds, &base).unwrap();
        let t2 = run_rating(&ds, &scaled).unwrap();
        let order1: Vec<&str> = t1.results.iter().map(|r| r.region_id.as_str()).collect();
        let order2: Vec<&str> = t2.results.iter().map(|r| r.region_id.as_str()).collect();
        assert_eq!(order1, order2);
        assert!((t2.max_contingent - 70.0).abs() < 1e-9);
        assert_eq!(ids.len(), 4);
    }

    #[test]
    fn within_cluster_permutation_preserves_stats() {
        let ds = fixture();
        let mut shuffled = ds.clone();
        // swap the two large-cluster regions (ural, vol stay in the same stratum)
        let i = shuffled
            .regions
            .iter()
            .position(|r| r.id == "ural")
            .unwrap();
        let j = shuffled.regions.iter().position(|r| r.id == "vol").unwrap();
        shuffled.regions.swap(i, j);
        let t1 = run_rating(&ds, &default_config()).unwrap();
        let t2 = run_rating(&shuffled, &default_config()).unwrap();
        assert_eq!(t1.factor_stats["f1"], t2.factor_stats["f1"]);
        for r in &t1.results {
            assert_eq!(
                r.points,
                t2.result(&r.region_id).unwrap().points,
                "points changed for {}",
                r.region_id
            );
        }
    }

    #[test]
    fn per_capita_override_divides_by_population() {
        let ds = fixture();
        let config = parse_config_str("[options]\nper_capita = [\"f1\"]\n").unwrap();
        let table = run_rating(&ds, &config).unwrap();
        // with per-capita normalization f1 is scored over all regions,
        // so its stats carry the 'all' stratum
        assert_eq!(table.factor_stats["f1"].len(), 1);
        assert_eq!(table.factor_stats["f1"][0].stratum, Stratum::All);
        assert_eq!(table.factor_stats["f1"][0].n, 5);
    }

    #[test]
    fn group_subscores_mean_and_absence() {
        let ds = fixture();
        let table = run_rating(&ds, &default_config()).unwrap();
        let subs = group_subscores(&table, &ds);
        // single-factor groups equal their factor's points
        let vol = &subs.per_region["vol"];
        assert_eq!(vol[&CriteriaGroup::Infrastructure], 6.0);
        assert_eq!(vol[&CriteriaGroup::EliteSport], 8.0);
        // development_promotion has no factors in this model
        assert!(!vol.contains_key(&CriteriaGroup::DevelopmentPromotion));

        // a hand-built multi-factor group averages
        let text = "\
region_id,region_name,population,jan_temp_c,density_pct,a:grassroots:relative,b:grassroots:relative,c:grassroots:relative,d:grassroots:relative
r1,R1,500000,-12,60,8,2,5,5
r2,R2,600000,-12,60,1,1,1,1
r3,R3,700000,-12,60,9,9,9,9
r4,R4,800000,-12,60,4,6,2,8
r5,R5,810000,-12,60,3,3,3,3
r6,R6,820000,-12,60,7,5,6,4
";
        let ds2 = parse_dataset_bytes(text.as_bytes(), "t", 0).unwrap();
        let t2 = run_rating(&ds2, &default_config()).unwrap();
        let s2 = group_subscores(&t2, &ds2);
        for (region, groups) in &s2.per_region {
            let expect = t2
                .result(region)
                .unwrap()
                .points
                .values()
                .map(|&p| p as f64)
                .sum::<f64>()
                / 4.0;
            assert!((groups[&CriteriaGroup::Grassroots] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn trend_identity_has_zero_deltas() {
        let ds = fixture();
        let table = run_rating(&ds, &default_config()).unwrap();
        let report = compare_years(&[table.clone(), table]).unwrap();
        for region in &report.regions {
            assert_eq!(region.score_delta, Some(0.0));
            assert_eq!(region.rank_delta, Some(0));
            assert!(region.star_transitions.is_empty());
            assert_eq!(region.status, TrendStatus::Throughout);
        }
    }

    #[test]
    fn trend_star_transition_and_exit() {
        let ds = fixture();
        let mut t1 = run_rating(&ds, &default_config()).unwrap();
        let mut t2 = t1.clone();
        t1.year = 2013;
        t2.year = 2014;
        // move 'delta' from 5.0 (3 stars) to 6.6 (4 stars) by hand
        {
            let r = t1
                .results
                .iter_mut()
                .find(|r| r.region_id == "delta")
                .unwrap();
            r.overall_score = 5.0;
            r.stars = 3;
        }
        rank_results(&mut t1.results);
        {
            let r = t2
                .results
                .iter_mut()
                .find(|r| r.region_id == "delta")
                .unwrap();
            r.overall_score = 6.6;
            r.stars = 4;
        }
        // drop 'tundra' from year 2
        t2.results.retain(|r| r.region_id != "tundra");
        rank_results(&mut t2.results);

        let report = compare_years(&[t1, t2]).unwrap();
        let delta = report
            .regions
            .iter()
            .find(|r| r.region_id == "delta")
            .unwrap();
        assert_eq!(delta.star_transitions.len(), 1);
        assert_eq!(delta.star_transitions[0].from_stars, 3);
        assert_eq!(delta.star_transitions[0].to_stars, 4);
        assert_eq!(delta.star_transitions[0].from_year, 2013);
        assert!((delta.score_delta.unwrap() - 1.6).abs() < 1e-12);

        let tundra = report
            .regions
            .iter()
            .find(|r| r.region_id == "tundra")
            .unwrap();
        assert_eq!(tundra.status, TrendStatus::Exited);
        assert_eq!(tundra.score_delta, None);
        assert_eq!(tundra.rank_delta, None);
    }

    #[test]
    fn trend_status_over_three_years() {
        let ds = fixture();
        let base = run_rating(&ds, &default_config()).unwrap();
        let mut t1 = base.clone();
        let mut t2 = base.clone();
        let mut t3 = base.clone();
        t1.year = 2013;
        t2.year = 2014;
        t3.year = 2015;
        // 'delta' skips the middle year; 'ural' joins late; 'tundra' leaves
        t2.results.retain(|r| r.region_id != "delta");
        t1.results.retain(|r| r.region_id != "ural");
        t2.results.retain(|r| r.region_id != "ural");
        t2.results.retain(|r| r.region_id != "tundra");
        t3.results.retain(|r| r.region_id != "tundra");
        for t in [&mut t1, &mut t2, &mut t3] {
            rank_results(&mut t.results);
        }
        let report = compare_years(&[t1, t2, t3]).unwrap();
        let status_of = |id: &str| {
            report
                .regions
                .iter()
                .find(|r| r.region_id == id)
                .unwrap()
                .status
        };
        assert_eq!(status_of("step"), TrendStatus::Throughout);
        assert_eq!(status_of("delta"), TrendStatus::Intermittent);
        assert_eq!(status_of("ural"), TrendStatus::Entered);
        assert_eq!(status_of("tundra"), TrendStatus::Exited);
    }

    #[test]
    fn trend_requires_overlap() {
        let ds = fixture();
        let t1 = run_rating(&ds, &default_config()).unwrap();
        let mut t2 = t1.clone();
        for r in &mut t2.results {
            r.region_id = format!("other_{}", r.region_id);
        }
        let err = compare_years(&[t1.clone(), t2]).unwrap_err();
        assert!(matches!(err, Error::NoOverlap));
        assert!(compare_years(&[t1]).is_err());
    }

    #[test]
    fn sensitivity_null_perturbation_is_identity() {
        let ds = fixture();
        let report = sensitivity(&ds, &default_config(), 0.0, 10, 7).unwrap();
        assert_eq!(report.spearman_mean, 1.0);
        assert_eq!(report.spearman_min, 1.0);
        for r in &report.regions {
            assert_eq!(r.min_rank, r.baseline_rank);
            assert_eq!(r.max_rank, r.baseline_rank);
        }
    }

    #[test]
    fn sensitivity_single_factor_is_rank_invariant() {
        let text = "\
region_id,region_name,population,jan_temp_c,density_pct,solo:grassroots:relative
a,A,500000,-12,60,1
b,B,600000,-12,60,5
c,C,700000,-12,60,9
d,D,800000,-12,60,3
";
        let ds = parse_dataset_bytes(text.as_bytes(), "t", 0).unwrap();
        let report = sensitivity(&ds, &default_config(), 0.5, 50, 99).unwrap();
        assert_eq!(report.spearman_mean, 1.0);
        for r in &report.regions {
            assert_eq!(r.min_rank, r.baseline_rank);
            assert_eq!(r.max_rank, r.baseline_rank);
        }
    }

    #[test]
    fn sensitivity_is_deterministic_for_a_seed() {
        let ds = fixture();
        let a = sensitivity(&ds, &default_config(), 0.2, 40, 11).unwrap();
        let b = sensitivity(&ds, &default_config(), 0.2, 40, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sensitivity_validates_arguments() {
        let ds = fixture();
        assert!(sensitivity(&ds, &default_config(), 1.0, 10, 0).is_err());
        assert!(sensitivity(&ds, &default_config(), -0.1, 10, 0).is_err());
        assert!(sensitivity(&ds, &default_config(), 0.1, 0, 0).is_err());
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1, 2, 3], &[1, 2, 3]), 1.0);
        assert_eq!(spearman(&[1, 2, 3], &[3, 2, 1]), -1.0);
        assert_eq!(spearman(&[1, 2], &[2, 1]), -1.0);
    }

    #[test]
    fn determinism_byte_for_byte() {
        let ds = fixture();
        let t1 = run_rating(&ds, &default_config()).unwrap();
        let t2 = run_rating(&ds, &default_config()).unwrap();
        assert_eq!(
            serde_json::to_string(&t1).unwrap(),
            serde_json::to_string(&t2).unwrap()
        );
    }

    #[test]
    fn sample_mode_widens_sigma_and_is_recorded() {
        let ds = fixture();
        let population = run_rating(&ds, &default_config()).unwrap();
        let sample =
            run_rating(&ds, &default_config().with_stddev_mode(StdDevMode::Sample)).unwrap();
        assert_eq!(population.stddev_mode, StdDevMode::Population);
        assert_eq!(sample.stddev_mode, StdDevMode::Sample);
        assert_ne!(population.config_digest, sample.config_digest);
        let pop_sigma = population.factor_stats["f2"][0].sigma;
        let sample_sigma = sample.factor_stats["f2"][0].sigma;
        // sigma_sample = sigma_pop * sqrt(n / (n - 1)) for n = 5
        assert!((sample_sigma - pop_sigma * (5.0f64 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn stratified_factor_uses_cluster_stats() {
        let ds = fixture();
        let table = run_rating(&ds, &default_config()).unwrap();
        let strata: Vec<Stratum> = table.factor_stats["f1"].iter().map(|s| s.stratum).collect();
        assert_eq!(
            strata,
            vec![
                Stratum::Cluster(PopulationCluster::Medium),
                Stratum::Cluster(PopulationCluster::Large)
            ]
        );
        assert!(ds
            .factors
            .iter()
            .any(|f| f.value_kind == ValueKind::Absolute));
    }
}
