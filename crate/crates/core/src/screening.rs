//! Multicollinearity screening: pairwise Pearson correlations, threshold
//! flagging, and pruning with expert whitelist overrides.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Symmetric matrix of pairwise Pearson coefficients.
///
/// Cells touching a zero-variance factor are undefined, including that
/// factor's diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    factor_ids: Vec<String>,
    cells: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn factor_ids(&self) -> &[String] {
        &self.factor_ids
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i][j]
    }

    pub fn get_by_id(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.factor_ids.iter().position(|id| id == a)?;
        let j = self.factor_ids.iter().position(|id| id == b)?;
        self.cells[i][j]
    }

    /// Factors whose column had zero variance.
    pub fn constant_factors(&self) -> Vec<String> {
        self.factor_ids
            .iter()
            .enumerate()
            .filter(|(i, _)| self.cells[*i][*i].is_none())
            .map(|(_, id)| id.clone())
            .collect()
    }
}

/// An unordered factor pair whose |r| met the screening threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPair {
    pub a: String,
    pub b: String,
    pub r: f64,
}

impl FlaggedPair {
    pub fn involves(&self, id: &str) -> bool {
        self.a == id || self.b == id
    }

    pub fn other(&self, id: &str) -> &str {
        if self.a == id {
            &self.b
        } else {
            &self.a
        }
    }
}

/// One pruning step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub step: usize,
    pub factor_id: String,
    /// Flagged pairs among non-whitelisted retained factors at the time.
    pub degree: usize,
    /// The offending partners and coefficients that caused the drop.
    pub partners: Vec<(String, f64)>,
}

/// Outcome of the screening pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    /// All flagged pairs, descending |r|.
    pub flagged: Vec<FlaggedPair>,
    pub eliminations: Vec<Elimination>,
    /// Factors put back after the greedy pass because every partner that
    /// got them dropped was itself dropped later.
    pub reinstated: Vec<String>,
    pub retained: Vec<String>,
    /// Flagged pairs that survive because a member is whitelisted.
    pub whitelist_hits: Vec<FlaggedPair>,
    /// Zero-variance factors; never auto-eliminated, reported instead.
    pub constant_factors: Vec<String>,
    pub warnings: Vec<String>,
}

/// Computes the pairwise Pearson matrix over factor columns.
///
/// Every column must hold one value per region, at least two regions.
pub fn pearson_matrix(factor_ids: &[String], columns: &[Vec<f64>]) -> Result<CorrelationMatrix> {
    assert_eq!(factor_ids.len(), columns.len(), "one column per factor id");
    let n = columns.first().map_or(0, Vec::len);
    if n < 2 {
        return Err(Error::InsufficientObservations(format!(
            "correlation needs at least 2 regions, got {n}"
        )));
    }
    for (id, col) in factor_ids.iter().zip(columns) {
        if col.len() != n {
            return Err(Error::data(format!(
                "factor '{id}' has {} values, expected {n}",
                col.len()
            )));
        }
        if let Some(bad) = col.iter().find(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "factor '{id}' has non-finite value {bad}"
            )));
        }
    }

    let k = factor_ids.len();
    let means: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let sum_sq: Vec<f64> = columns
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|v| (v - m) * (v - m)).sum())
        .collect();

    let mut cells = vec![vec![None; k]; k];
    for i in 0..k {
        if sum_sq[i] > 0.0 {
            cells[i][i] = Some(1.0);
        }
        for j in (i + 1)..k {
            if sum_sq[i] == 0.0 || sum_sq[j] == 0.0 {
                continue;
            }
            let cov: f64 = columns[i]
                .iter()
                .zip(&columns[j])
                .map(|(x, y)| (x - means[i]) * (y - means[j]))
                .sum();
            let r = (cov / (sum_sq[i] * sum_sq[j]).sqrt()).clamp(-1.0, 1.0);
            cells[i][j] = Some(r);
            cells[j][i] = Some(r);
        }
    }
    Ok(CorrelationMatrix {
        factor_ids: factor_ids.to_vec(),
        cells,
    })
}

/// All unordered pairs with defined |r| at or above the threshold,
/// sorted by descending |r|, ties by factor ids.
pub fn flag_collinear(matrix: &CorrelationMatrix, threshold: f64) -> Vec<FlaggedPair> {
    let ids = matrix.factor_ids();
    let mut flagged = Vec::new();
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            if let Some(r) = matrix.get(i, j) {
                if r.abs() >= threshold {
                    flagged.push(FlaggedPair {
                        a: ids[i].clone(),
                        b: ids[j].clone(),
                        r,
                    });
                }
            }
        }
    }
    flagged.sort_by(|x, y| {
        y.r.abs()
            .total_cmp(&x.r.abs())
            .then_with(|| x.a.cmp(&y.a))
            .then_with(|| x.b.cmp(&y.b))
    });
    flagged
}

/// Greedy pruning with whitelist overrides.
///
/// Repeatedly drops the non-whitelisted factor in the most flagged pairs
/// among retained non-whitelisted factors; ties go to the lower expert
/// priority, then the lexicographically smaller id. A final sweep
/// reinstates drops whose every offending partner was itself dropped
/// later, so the retained set is maximal: putting back any eliminated
/// factor recreates a fully non-whitelisted flagged pair.
pub fn prune(
    matrix: &CorrelationMatrix,
    flagged: &[FlaggedPair],
    whitelist: &BTreeSet<String>,
    priorities: &BTreeMap<String, i32>,
) -> ScreeningReport {
    let all_ids: Vec<String> = matrix.factor_ids().to_vec();
    let mut retained: BTreeSet<String> = all_ids.iter().cloned().collect();
    let mut warnings = Vec::new();

    let is_violating = |pair: &FlaggedPair, retained: &BTreeSet<String>| {
        retained.contains(&pair.a)
            && retained.contains(&pair.b)
            && !whitelist.contains(&pair.a)
            && !whitelist.contains(&pair.b)
    };

    let mut eliminations = Vec::new();
    let mut step = 0;
    loop {
        let mut degree: BTreeMap<&str, usize> = BTreeMap::new();
        for pair in flagged.iter().filter(|p| is_violating(p, &retained)) {
            *degree.entry(pair.a.as_str()).or_default() += 1;
            *degree.entry(pair.b.as_str()).or_default() += 1;
        }
        let Some(victim) = degree
            .iter()
            .map(|(&id, &d)| (id, d))
            .max_by(|(id_a, d_a), (id_b, d_b)| {
                // highest degree wins; among those the lowest priority,
                // then the smaller id, is dropped
                d_a.cmp(d_b)
                    .then_with(|| {
                        priorities
                            .get(*id_b)
                            .copied()
                            .unwrap_or(0)
                            .cmp(&priorities.get(*id_a).copied().unwrap_or(0))
                    })
                    .then_with(|| id_b.cmp(id_a))
            })
            .map(|(id, _)| id.to_string())
        else {
            break;
        };

        step += 1;
        let partners: Vec<(String, f64)> = flagged
            .iter()
            .filter(|p| is_violating(p, &retained) && p.involves(&victim))
            .map(|p| (p.other(&victim).to_string(), p.r))
            .collect();
        eliminations.push(Elimination {
            step,
            factor_id: victim.clone(),
            degree: partners.len(),
            partners,
        });
        retained.remove(&victim);
    }

    // reinstatement sweep, in elimination order
    let mut reinstated = Vec::new();
    for elim in &eliminations {
        let id = &elim.factor_id;
        let blocked = flagged.iter().any(|p| {
            p.involves(id)
                && retained.contains(p.other(id))
                && !whitelist.contains(&p.a)
                && !whitelist.contains(&p.b)
        });
        if !blocked {
            retained.insert(id.clone());
            reinstated.push(id.clone());
        }
    }

    let whitelist_hits: Vec<FlaggedPair> = flagged
        .iter()
        .filter(|p| retained.contains(&p.a) && retained.contains(&p.b))
        .cloned()
        .collect();
    for pair in &whitelist_hits {
        if whitelist.contains(&pair.a) && whitelist.contains(&pair.b) {
            warnings.push(format!(
                "collinear pair '{}'/'{}' (r = {:.4}) retained: both whitelisted",
                pair.a, pair.b, pair.r
            ));
        }
    }

    ScreeningReport {
        flagged: flagged.to_vec(),
        eliminations,
        reinstated,
        retained: retained.into_iter().collect(),
        whitelist_hits,
        constant_factors: matrix.constant_factors(),
        warnings,
    }
}

/// Full screening pass over a dataset: matrix, flags, prune. Whitelist and
/// priorities come from the dataset's factor definitions.
pub fn screen_dataset(
    dataset: &Dataset,
    threshold: f64,
) -> Result<(CorrelationMatrix, ScreeningReport)> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "screening threshold must be in (0, 1], got {threshold}"
        )));
    }
    let ids = dataset.factor_ids();
    let columns: Vec<Vec<f64>> = ids.iter().map(|id| dataset.factor_column(id)).collect();
    let matrix = pearson_matrix(&ids, &columns)?;
    let flagged = flag_collinear(&matrix, threshold);
    let whitelist: BTreeSet<String> = dataset
        .factors
        .iter()
        .filter(|f| f.expert_whitelisted)
        .map(|f| f.id.clone())
        .collect();
    let priorities: BTreeMap<String, i32> = dataset
        .factors
        .iter()
        .map(|f| (f.id.clone(), f.expert_priority))
        .collect();
    let report = prune(&matrix, &flagged, &whitelist, &priorities);
    Ok((matrix, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_columns_correlate_fully() {
        let m = pearson_matrix(
            &ids(&["x", "y"]),
            &[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]],
        )
        .unwrap();
        assert_eq!(m.get(0, 1), Some(1.0));
        assert_eq!(m.get(0, 0), Some(1.0));
    }

    #[test]
    fn negated_column_anticorrelates() {
        let m = pearson_matrix(
            &ids(&["x", "neg"]),
            &[vec![1.0, 2.0, 3.0], vec![-1.0, -2.0, -3.0]],
        )
        .unwrap();
        assert_eq!(m.get(0, 1), Some(-1.0));
    }

    #[test]
    fn hand_computed_pearson() {
        let m = pearson_matrix(
            &ids(&["x", "y"]),
            &[vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 1.0, 4.0, 3.0]],
        )
        .unwrap();
        let r = m.get(0, 1).unwrap();
        assert!((r - 0.6).abs() < 1e-15, "r = {r}");
    }

    #[test]
    fn single_region_rejected() {
        let err = pearson_matrix(&ids(&["x"]), &[vec![1.0]]).unwrap_err();
        assert!(
            err.to_string().contains("insufficient observations"),
            "{err}"
        );
    }

    #[test]
    fn constant_column_is_undefined() {
        let m = pearson_matrix(
            &ids(&["c", "x"]),
            &[vec![5.0, 5.0, 5.0], vec![1.0, 2.0, 3.0]],
        )
        .unwrap();
        assert_eq!(m.get(0, 1), None);
        assert_eq!(m.get(0, 0), None);
        assert_eq!(m.get(1, 1), Some(1.0));
        assert_eq!(m.constant_factors(), vec!["c".to_string()]);
    }

    #[test]
    fn threshold_is_inclusive_on_magnitude() {
        // columns engineered for r = 0.7 are brittle; drive flag_collinear
        // through a synthetic matrix instead
        let matrix = CorrelationMatrix {
            factor_ids: ids(&["a", "b", "c", "d"]),
            cells: vec![
                vec![Some(1.0), Some(0.7), Some(-0.71), Some(0.699)],
                vec![Some(0.7), Some(1.0), Some(0.1), Some(0.2)],
                vec![Some(-0.71), Some(0.1), Some(1.0), Some(0.3)],
                vec![Some(0.699), Some(0.2), Some(0.3), Some(1.0)],
            ],
        };
        let flagged = flag_collinear(&matrix, 0.7);
        let pairs: Vec<(String, String)> =
            flagged.iter().map(|p| (p.a.clone(), p.b.clone())).collect();
        assert_eq!(
            pairs,
            vec![
                ("a".to_string(), "c".to_string()),
                ("a".to_string(), "b".to_string()),
            ]
        );
        assert_eq!(flagged[0].r, -0.71);
    }

    fn matrix_with(pairs: &[(&str, &str, f64)], factors: &[&str]) -> CorrelationMatrix {
        let k = factors.len();
        let mut cells = vec![vec![Some(0.0); k]; k];
        for (i, row) in cells.iter_mut().enumerate() {
            row[i] = Some(1.0);
        }
        for &(a, b, r) in pairs {
            let i = factors.iter().position(|f| *f == a).unwrap();
            let j = factors.iter().position(|f| *f == b).unwrap();
            cells[i][j] = Some(r);
            cells[j][i] = Some(r);
        }
        CorrelationMatrix {
            factor_ids: ids(factors),
            cells,
        }
    }

    #[test]
    fn prune_drops_lower_priority_member() {
        let matrix = matrix_with(&[("a", "b", 0.9)], &["a", "b"]);
        let flagged = flag_collinear(&matrix, 0.7);
        let priorities: BTreeMap<String, i32> = [("a".to_string(), 5), ("b".to_string(), 1)]
            .into_iter()
            .collect();
        let report = prune(&matrix, &flagged, &BTreeSet::new(), &priorities);
        assert_eq!(report.retained, vec!["a".to_string()]);
        assert_eq!(report.eliminations.len(), 1);
        assert_eq!(report.eliminations[0].factor_id, "b");
        assert_eq!(report.eliminations[0].degree, 1);
    }

    #[test]
    fn prune_respects_whitelist() {
        // a whitelisted member neutralizes the pair: nothing is dropped on
        // its account, and the pair is reported as a whitelist hit. This
        // keeps the retained set maximal under the validity predicate.
        let matrix = matrix_with(&[("a", "b", 0.9)], &["a", "b"]);
        let flagged = flag_collinear(&matrix, 0.7);
        let whitelist: BTreeSet<String> = [String::from("b")].into_iter().collect();
        let report = prune(&matrix, &flagged, &whitelist, &BTreeMap::new());
        assert_eq!(report.retained, ids(&["a", "b"]));
        assert!(report.eliminations.is_empty());
        assert_eq!(report.whitelist_hits.len(), 1);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn no_flags_is_identity() {
        let matrix = matrix_with(&[("a", "b", 0.3)], &["a", "b", "c"]);
        let flagged = flag_collinear(&matrix, 0.7);
        assert!(flagged.is_empty());
        let report = prune(&matrix, &flagged, &BTreeSet::new(), &BTreeMap::new());
        assert_eq!(report.retained, ids(&["a", "b", "c"]));
        assert!(report.eliminations.is_empty());
    }

    #[test]
    fn fully_whitelisted_clique_retained_with_warning() {
        let matrix = matrix_with(&[("a", "b", 0.95)], &["a", "b"]);
        let flagged = flag_collinear(&matrix, 0.7);
        let whitelist: BTreeSet<String> =
            [String::from("a"), String::from("b")].into_iter().collect();
        let report = prune(&matrix, &flagged, &whitelist, &BTreeMap::new());
        assert_eq!(report.retained, ids(&["a", "b"]));
        assert_eq!(report.whitelist_hits.len(), 1);
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("both whitelisted"));
    }

    #[test]
    fn reinstatement_restores_maximality() {
        // a pairs with b and c; b with d; c with e. Greedy drops a first
        // (degree 2, smallest id among the tied), then b and c, at which
        // point a has no retained partner and must come back.
        let matrix = matrix_with(
            &[
                ("a", "b", 0.9),
                ("a", "c", 0.9),
                ("b", "d", 0.8),
                ("c", "e", 0.8),
            ],
            &["a", "b", "c", "d", "e"],
        );
        let flagged = flag_collinear(&matrix, 0.7);
        let report = prune(&matrix, &flagged, &BTreeSet::new(), &BTreeMap::new());
        assert_eq!(report.retained, ids(&["a", "d", "e"]));
        assert_eq!(report.reinstated, vec!["a".to_string()]);
        // and the result is valid: no fully non-whitelisted pair remains
        for pair in &report.flagged {
            assert!(
                !(report.retained.contains(&pair.a) && report.retained.contains(&pair.b)),
                "violating pair {pair:?} survived"
            );
        }
    }
}
