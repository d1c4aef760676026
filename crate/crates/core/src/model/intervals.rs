//! Sigma-multiple interval bands and point allocation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::stats::FactorStats;

/// One band of the point-allocation table, in sigma units around the mean.
///
/// Membership is left-exclusive, right-inclusive: `lower < z <= upper`.
/// `lower` may be `-inf` and `upper` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
    pub points: u8,
}

impl Band {
    pub fn contains(&self, z: f64) -> bool {
        self.lower < z && z <= self.upper
    }
}

/// Ordered bands mapping a standardized deviation to 0..=10 points.
///
/// Valid tables partition the real line: bands are contiguous, the first
/// lower bound is `-inf`, the last upper bound is `+inf`, and points run
/// exactly 0..=10 in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Band>", into = "Vec<Band>")]
pub struct IntervalTable {
    bands: Vec<Band>,
}

impl IntervalTable {
    pub fn new(bands: Vec<Band>) -> Result<Self> {
        if bands.len() != 11 {
            return Err(Error::config(format!(
                "intervals: expected 11 bands covering points 0..=10, got {}",
                bands.len()
            )));
        }
        for (i, band) in bands.iter().enumerate() {
            if band.points as usize != i {
                return Err(Error::config(format!(
                    "intervals: band {} must award {} points, got {}",
                    i + 1,
                    i,
                    band.points
                )));
            }
            if band.lower.is_nan() || band.upper.is_nan() {
                return Err(Error::config(format!(
                    "intervals: band {} has a NaN bound",
                    i + 1
                )));
            }
            if band.lower >= band.upper {
                return Err(Error::config(format!(
                    "intervals: band {} is empty ({} >= {})",
                    i + 1,
                    band.lower,
                    band.upper
                )));
            }
        }
        if bands[0].lower != f64::NEG_INFINITY {
            return Err(Error::config(
                "intervals: band 1 must be open below (lower = -inf)".to_string(),
            ));
        }
        if bands[bands.len() - 1].upper != f64::INFINITY {
            return Err(Error::config(
                "intervals: band 11 must be open above (upper = +inf)".to_string(),
            ));
        }
        for i in 1..bands.len() {
            if bands[i].lower != bands[i - 1].upper {
                return Err(Error::config(format!(
                    "intervals: gap between band {} (upper {}) and band {} (lower {})",
                    i,
                    bands[i - 1].upper,
                    i + 1,
                    bands[i].lower
                )));
            }
        }
        Ok(IntervalTable { bands })
    }

    /// The standard table. Upper-side coefficients 1.3 and 1.7 are kept
    /// as published, not evened out to a 0.5-sigma grid.
    pub fn standard() -> Self {
        IntervalTable::from_edges(&[-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.3, 1.7, 2.0])
    }

    /// Experimental variant with every finite band 0.5 sigma wide; the top
    /// band then starts at 2.5 sigma.
    pub fn symmetric_upper() -> Self {
        IntervalTable::from_edges(&[-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5])
    }

    fn from_edges(edges: &[f64; 10]) -> Self {
        let mut bands = Vec::with_capacity(11);
        let mut lower = f64::NEG_INFINITY;
        for (i, &edge) in edges.iter().enumerate() {
            bands.push(Band {
                lower,
                upper: edge,
                points: i as u8,
            });
            lower = edge;
        }
        bands.push(Band {
            lower,
            upper: f64::INFINITY,
            points: 10,
        });
        IntervalTable { bands }
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// The band holding a value, by standardized deviation.
    pub fn band_for(&self, z: f64) -> &Band {
        // partition invariant: exactly one band matches any finite z
        self.bands
            .iter()
            .find(|b| b.contains(z))
            .expect("interval table bands partition the real line")
    }

    /// Points awarded when a factor has zero variance: the first band
    /// strictly above the mean, treating all-equal values as at par.
    pub fn degenerate_points(&self) -> u8 {
        self.bands
            .iter()
            .find(|b| b.lower <= 0.0 && b.upper > 0.0)
            .expect("interval table bands cover zero")
            .points
    }
}

impl Default for IntervalTable {
    fn default() -> Self {
        IntervalTable::standard()
    }
}

impl TryFrom<Vec<Band>> for IntervalTable {
    type Error = Error;

    fn try_from(bands: Vec<Band>) -> Result<Self> {
        IntervalTable::new(bands)
    }
}

impl From<IntervalTable> for Vec<Band> {
    fn from(table: IntervalTable) -> Vec<Band> {
        table.bands
    }
}

/// Allocates 0..=10 points to `value` by where its deviation from the
/// stratum mean falls among the table's bands.
///
/// With `sigma == 0` every value equals the mean and the degenerate
/// at-par points are returned; callers surface a warning for such factors.
pub fn allocate_points(value: f64, stats: &FactorStats, table: &IntervalTable) -> u8 {
    debug_assert!(value.is_finite());
    debug_assert!(stats.sigma >= 0.0);
    if stats.sigma == 0.0 {
        return table.degenerate_points();
    }
    let z = (value - stats.mean) / stats.sigma;
    table.band_for(z).points
}
