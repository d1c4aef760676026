//! Dataset ingestion: CSV parsing, validation, cluster assignment.
//!
//! The dataset file is UTF-8 CSV with a header row. The first five columns
//! are fixed: `region_id, region_name, population, jan_temp_c, density_pct`.
//! Every further column is a model factor. A factor header is either a bare
//! id, or `id:group`, or `id:group:kind` (e.g. `stadiums:infrastructure:absolute`);
//! bare ids fall back to group `development_promotion` and kind `relative`
//! and the fallback is reported as a warning. Qualitative criteria must
//! arrive pre-encoded as numbers; the encoding is the supplier's concern.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::types::{
    CriteriaGroup, FactorDefinition, PopulationCluster, RegionRecord, ValueKind,
};

pub const REQUIRED_COLUMNS: [&str; 5] = [
    "region_id",
    "region_name",
    "population",
    "jan_temp_c",
    "density_pct",
];

const DEFAULT_GROUP: CriteriaGroup = CriteriaGroup::DevelopmentPromotion;
const DEFAULT_KIND: ValueKind = ValueKind::Relative;

/// Where a dataset came from, for reproducibility audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// SHA-256 of the raw bytes, lowercase hex.
    pub sha256: String,
}

/// A validated, dense region-by-factor table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    /// Year label; supplied by the caller, not the file.
    pub year: i32,
    pub regions: Vec<RegionRecord>,
    pub factors: Vec<FactorDefinition>,
    pub provenance: Provenance,
    /// Ingestion notes, e.g. defaulted factor metadata.
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn factor_ids(&self) -> Vec<String> {
        self.factors.iter().map(|f| f.id.clone()).collect()
    }

    /// Values of one factor in region order.
    pub fn factor_column(&self, factor_id: &str) -> Vec<f64> {
        self.regions
            .iter()
            .map(|r| r.factor_values[factor_id])
            .collect()
    }

    pub fn region(&self, id: &str) -> Option<&RegionRecord> {
        self.regions.iter().find(|r| r.id == id)
    }

    /// Regions of one population cluster, in dataset order.
    pub fn cluster_members(&self, cluster: PopulationCluster) -> Vec<&RegionRecord> {
        self.regions
            .iter()
            .filter(|r| r.cluster() == cluster)
            .collect()
    }

    /// Re-checks every structural invariant. Parsing enforces these; this
    /// exists for datasets assembled in code.
    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::data("dataset declares no factors"));
        }
        if self.regions.len() < 2 {
            return Err(Error::data(format!(
                "insufficient observations: dataset has {} region(s); at least 2 required",
                self.regions.len()
            )));
        }
        let mut region_ids = BTreeSet::new();
        for r in &self.regions {
            if !region_ids.insert(&r.id) {
                return Err(Error::data(format!("duplicate region id '{}'", r.id)));
            }
            if r.population == 0 {
                return Err(Error::data(format!(
                    "region '{}' has non-positive population",
                    r.id
                )));
            }
            if !r.january_mean_temp.is_finite() || !r.population_density.is_finite() {
                return Err(Error::data(format!(
                    "region '{}' has non-finite support factors",
                    r.id
                )));
            }
        }
        let mut factor_ids = BTreeSet::new();
        for f in &self.factors {
            if !factor_ids.insert(&f.id) {
                return Err(Error::data(format!("duplicate factor id '{}'", f.id)));
            }
        }
        for r in &self.regions {
            for f in &self.factors {
                match r.factor_values.get(&f.id) {
                    None => {
                        return Err(Error::data(format!(
                            "missing value for factor '{}' in region '{}'",
                            f.id, r.id
                        )))
                    }
                    Some(v) if !v.is_finite() => {
                        return Err(Error::data(format!(
                            "non-finite value for factor '{}' in region '{}'",
                            f.id, r.id
                        )))
                    }
                    Some(_) => {}
                }
            }
            if r.factor_values.len() != self.factors.len() {
                let extra: Vec<&String> = r
                    .factor_values
                    .keys()
                    .filter(|k| !factor_ids.contains(k))
                    .collect();
                return Err(Error::data(format!(
                    "region '{}' carries values for undeclared factors {extra:?}",
                    r.id
                )));
            }
        }
        Ok(())
    }
}

/// Cluster for a resident count; zero is rejected.
pub fn cluster_population(population: u64) -> Result<PopulationCluster> {
    if population == 0 {
        return Err(Error::data("population must be positive"));
    }
    Ok(PopulationCluster::from_population(population))
}

/// Warning text prefixes; config overrides clear them individually.
pub(crate) fn missing_group_warning(factor_id: &str) -> String {
    format!("factor '{factor_id}' column omits its criteria group")
}

pub(crate) fn missing_kind_warning(factor_id: &str) -> String {
    format!("factor '{factor_id}' column omits its value kind")
}

fn parse_factor_header(
    raw: &str,
    column: usize,
    warnings: &mut Vec<String>,
) -> Result<FactorDefinition> {
    let parts: Vec<&str> = raw.split(':').collect();
    let id = parts[0].trim();
    if id.is_empty() {
        return Err(Error::data(format!(
            "column {column}: empty factor id in header"
        )));
    }
    let group = match parts.get(1) {
        Some(g) => CriteriaGroup::from_str(g.trim())
            .map_err(|e| Error::data(format!("column {column} ('{raw}'): {e}")))?,
        None => {
            warnings.push(format!(
                "{}; assuming {DEFAULT_GROUP}",
                missing_group_warning(id)
            ));
            DEFAULT_GROUP
        }
    };
    let kind = match parts.get(2) {
        Some(k) => ValueKind::from_str(k.trim())
            .map_err(|e| Error::data(format!("column {column} ('{raw}'): {e}")))?,
        None => {
            warnings.push(format!(
                "{}; assuming {DEFAULT_KIND}",
                missing_kind_warning(id)
            ));
            DEFAULT_KIND
        }
    };
    if parts.len() > 3 {
        return Err(Error::data(format!(
            "column {column} ('{raw}'): expected id[:group[:kind]]"
        )));
    }
    Ok(FactorDefinition::new(id, group, kind))
}

/// Parses and validates a dataset file.
pub fn parse_dataset(path: &Path, year: i32) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset_bytes(&bytes, &path.display().to_string(), year)
}

/// Parses a dataset from an open reader (e.g. stdin).
pub fn parse_dataset_reader<R: Read>(mut reader: R, source: &str, year: i32) -> Result<Dataset> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(|e| Error::Io {
        path: source.to_string(),
        source: e,
    })?;
    parse_dataset_bytes(&bytes, source, year)
}

pub fn parse_dataset_bytes(bytes: &[u8], source: &str, year: i32) -> Result<Dataset> {
    let sha256 = hex::encode(Sha256::digest(bytes));
    let mut warnings = Vec::new();

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader.headers()?.clone();
    if headers.len() < REQUIRED_COLUMNS.len() {
        return Err(Error::data(format!(
            "header row has {} column(s); expected {} then one per factor",
            headers.len(),
            REQUIRED_COLUMNS.join(", ")
        )));
    }
    for (i, required) in REQUIRED_COLUMNS.iter().enumerate() {
        let got = &headers[i];
        if got != *required {
            return Err(Error::data(format!(
                "missing required column '{required}' (column {} reads '{got}')",
                i + 1
            )));
        }
    }

    let mut factors = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, raw) in headers.iter().enumerate().skip(REQUIRED_COLUMNS.len()) {
        let definition = parse_factor_header(raw, i + 1, &mut warnings)?;
        if !seen.insert(definition.id.clone()) {
            return Err(Error::data(format!(
                "duplicate factor id '{}' (column {})",
                definition.id,
                i + 1
            )));
        }
        factors.push(definition);
    }
    if factors.is_empty() {
        return Err(Error::data("dataset declares no factor columns"));
    }

    let mut regions: Vec<RegionRecord> = Vec::new();
    let mut region_ids = BTreeSet::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2; // header is line 1
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::data(format!(
                "row {row}: expected {} cells, got {}",
                headers.len(),
                record.len()
            )));
        }
        let cell = |i: usize| -> &str { &record[i] };
        let require = |i: usize| -> Result<&str> {
            let v = cell(i);
            if v.is_empty() {
                Err(Error::data(format!(
                    "missing value for '{}' (row {row}, column {})",
                    &headers[i],
                    i + 1
                )))
            } else {
                Ok(v)
            }
        };
        let parse_f64 = |i: usize| -> Result<f64> {
            let raw = require(i)?;
            let v: f64 = raw.parse().map_err(|_| {
                Error::data(format!(
                    "invalid number '{raw}' for '{}' (row {row}, column {})",
                    &headers[i],
                    i + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "non-finite value for '{}' (row {row}, column {})",
                    &headers[i],
                    i + 1
                )));
            }
            Ok(v)
        };

        let id = require(0)?.to_string();
        if !region_ids.insert(id.clone()) {
            return Err(Error::data(format!(
                "duplicate region id '{id}' (row {row})"
            )));
        }
        let name = require(1)?.to_string();
        let population: u64 = require(2)?.parse().map_err(|_| {
            Error::data(format!(
                "invalid population '{}' (row {row}, column 3); expected a positive integer",
                cell(2)
            ))
        })?;
        if population == 0 {
            return Err(Error::data(format!(
                "population must be positive (row {row}, column 3)"
            )));
        }
        let january_mean_temp = parse_f64(3)?;
        let population_density = parse_f64(4)?;

        let mut factor_values = BTreeMap::new();
        for (k, factor) in factors.iter().enumerate() {
            let value = parse_f64(REQUIRED_COLUMNS.len() + k)?;
            factor_values.insert(factor.id.clone(), value);
        }

        regions.push(RegionRecord {
            id,
            name,
            population,
            january_mean_temp,
            population_density,
            factor_values,
        });
    }

    if regions.len() < 2 {
        return Err(Error::data(format!(
            "insufficient observations: dataset has {} region(s); at least 2 required",
            regions.len()
        )));
    }

    let dataset = Dataset {
        year,
        regions,
        factors,
        provenance: Provenance {
            source: source.to_string(),
            sha256,
        },
        warnings,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Writes a dataset in the canonical CSV layout with fully qualified
/// factor headers. Parsing the output reproduces the dataset.
pub fn write_csv<W: std::io::Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = REQUIRED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for f in &dataset.factors {
        header.push(format!("{}:{}:{}", f.id, f.group, f.value_kind));
    }
    w.write_record(&header)?;
    for r in &dataset.regions {
        let mut row: Vec<String> = vec![
            r.id.clone(),
            r.name.clone(),
            r.population.to_string(),
            format_f64(r.january_mean_temp),
            format_f64(r.population_density),
        ];
        for f in &dataset.factors {
            row.push(format_f64(r.factor_values[&f.id]));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv writer>".to_string(),
        source: e,
    })?;
    Ok(())
}

pub fn to_csv_string(dataset: &Dataset) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(dataset, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

// std's f64 Display is shortest-round-trip, so parse(write(ds)) == ds
fn format_f64(v: f64) -> String {
    format!("{v}")
}
