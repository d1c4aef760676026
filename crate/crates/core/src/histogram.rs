//! Point-distribution summaries per factor.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::RatingTable;

/// Counts per point value 0..=10 for one factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub factor_id: String,
    pub n: usize,
    /// Index = point value; counts sum to n.
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_points<I: IntoIterator<Item = u8>>(
        factor_id: impl Into<String>,
        points: I,
    ) -> Self {
        let mut counts = vec![0u64; 11];
        let mut n = 0usize;
        for p in points {
            counts[p.min(10) as usize] += 1;
            n += 1;
        }
        Histogram {
            factor_id: factor_id.into(),
            n,
            counts,
        }
    }

    /// Share of regions per point value; zero when the histogram is empty.
    pub fn proportions(&self) -> Vec<f64> {
        if self.n == 0 {
            return vec![0.0; 11];
        }
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n as f64)
            .collect()
    }

    /// Point value(s) with the highest count.
    pub fn modes(&self) -> Vec<u8> {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == max && max > 0)
            .map(|(p, _)| p as u8)
            .collect()
    }
}

/// One histogram per factor, in model order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub factors: Vec<Histogram>,
}

/// Builds per-factor histograms from a finished rating run.
pub fn histogram_report(table: &RatingTable, dataset: &Dataset) -> Result<HistogramReport> {
    let mut factors = Vec::with_capacity(dataset.factors.len());
    for f in &dataset.factors {
        let points: Vec<u8> = table
            .results
            .iter()
            .map(|r| {
                r.points.get(&f.id).copied().ok_or_else(|| {
                    Error::KeyMismatch(format!("rating table has no points for factor '{}'", f.id))
                })
            })
            .collect::<Result<_>>()?;
        factors.push(Histogram::from_points(f.id.clone(), points));
    }
    Ok(HistogramReport { factors })
}
