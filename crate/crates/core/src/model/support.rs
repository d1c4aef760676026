//! Support scores compensating exogenous climate and density disadvantage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temperature row: matches `lower < t <= upper`, in °C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempRow {
    pub lower: f64,
    pub upper: f64,
    /// Absolute score addition (0.2 means 2% of the maximum overall score).
    pub points: f64,
}

impl TempRow {
    pub fn contains(&self, t: f64) -> bool {
        self.lower < t && t <= self.upper
    }
}

/// Density row: matches `lower <= d < upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub lower: f64,
    pub upper: f64,
    pub points: f64,
}

impl DensityRow {
    pub fn contains(&self, d: f64) -> bool {
        self.lower <= d && d < self.upper
    }
}

/// Support score rows for temperature and density.
///
/// The temperature side is left-exclusive/right-inclusive and the density
/// side left-inclusive/right-exclusive, following the published table. A
/// value matching no row contributes zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportTable {
    pub temperature: Vec<TempRow>,
    pub density: Vec<DensityRow>,
}

impl SupportTable {
    /// The two shipped rows (groups 2 and 3 of the published example).
    /// Full national tables are supplied through the model config.
    pub fn standard() -> Self {
        SupportTable {
            temperature: vec![
                TempRow {
                    lower: -15.0,
                    upper: -10.0,
                    points: 0.2,
                },
                TempRow {
                    lower: -20.0,
                    upper: -15.0,
                    points: 0.3,
                },
            ],
            density: vec![
                DensityRow {
                    lower: 75.0,
                    upper: f64::INFINITY,
                    points: 0.2,
                },
                DensityRow {
                    lower: 50.0,
                    upper: 75.0,
                    points: 0.3,
                },
            ],
        }
    }

    /// Checks row well-formedness and pairwise disjointness within each list.
    pub fn validate(&self) -> Result<()> {
        validate_rows(
            "support.temperature",
            &self
                .temperature
                .iter()
                .map(|r| (r.lower, r.upper, r.points))
                .collect::<Vec<_>>(),
        )?;
        validate_rows(
            "support.density",
            &self
                .density
                .iter()
                .map(|r| (r.lower, r.upper, r.points))
                .collect::<Vec<_>>(),
        )
    }
}

impl Default for SupportTable {
    fn default() -> Self {
        SupportTable::standard()
    }
}

fn validate_rows(section: &str, rows: &[(f64, f64, f64)]) -> Result<()> {
    for (i, &(lower, upper, points)) in rows.iter().enumerate() {
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::config(format!(
                "{section} row {} has a NaN bound",
                i + 1
            )));
        }
        if lower >= upper {
            return Err(Error::config(format!(
                "{section} row {} is empty ({lower} >= {upper})",
                i + 1
            )));
        }
        if points < 0.0 || !points.is_finite() {
            return Err(Error::config(format!(
                "{section} row {} has invalid points {points}; must be finite and >= 0",
                i + 1
            )));
        }
    }
    // both semantics are half-open, so intervals intersect iff
    // max(lower) < min(upper)
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let lo = rows[i].0.max(rows[j].0);
            let hi = rows[i].1.min(rows[j].1);
            if lo < hi {
                return Err(Error::config(format!(
                    "overlapping support rows: {section} rows {} and {} both cover ({lo}, {hi})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// Looks up the temperature and density support for a region.
///
/// Returns `(temp_support, density_support)`; an unmatched component is 0.
pub fn support_scores(temp: f64, density: f64, table: &SupportTable) -> (f64, f64) {
    let temp_support = table
        .temperature
        .iter()
        .find(|row| row.contains(temp))
        .map_or(0.0, |row| row.points);
    let density_support = table
        .density
        .iter()
        .find(|row| row.contains(density))
        .map_or(0.0, |row| row.points);
    (temp_support, density_support)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_totals_half_point() {
        let (t, d) = support_scores(-11.0, 60.0, &SupportTable::standard());
        assert_eq!(t, 0.2);
        assert_eq!(d, 0.3);
        assert_eq!(t + d, 0.5);
    }

    #[test]
    fn boundary_membership() {
        let table = SupportTable::standard();
        // -15 is excluded from (-15, -10] and included in (-20, -15];
        // 75 starts the open-ended density row
        assert_eq!(support_scores(-15.0, 75.0, &table), (0.3, 0.2));
        assert_eq!(support_scores(-10.0, 50.0, &table), (0.2, 0.3));
        assert_eq!(support_scores(-20.0, 74.999, &table), (0.0, 0.3));
    }

    #[test]
    fn unmatched_components_are_zero() {
        let table = SupportTable::standard();
        assert_eq!(support_scores(20.0, 10.0, &table), (0.0, 0.0));
        assert_eq!(support_scores(-30.0, 10_000.0, &table), (0.0, 0.2));
    }

    #[test]
    fn row_order_does_not_matter() {
        let mut table = SupportTable::standard();
        table.temperature.reverse();
        table.density.reverse();
        table.validate().unwrap();
        assert_eq!(support_scores(-11.0, 60.0, &table), (0.2, 0.3));
        assert_eq!(support_scores(-15.0, 75.0, &table), (0.3, 0.2));
    }

    #[test]
    fn overlapping_rows_rejected() {
        let mut table = SupportTable::standard();
        table.density.push(DensityRow {
            lower: 55.0,
            upper: 65.0,
            points: 0.1,
        });
        let err = table.validate().unwrap_err();
        assert!(
            err.to_string().contains("overlapping support rows"),
            "{err}"
        );

        // adjacent half-open rows are fine
        assert!(SupportTable::standard().validate().is_ok());
    }

    #[test]
    fn degenerate_rows_rejected() {
        let mut table = SupportTable::standard();
        table.temperature.push(TempRow {
            lower: -5.0,
            upper: -5.0,
            points: 0.1,
        });
        assert!(table.validate().is_err());

        let mut table = SupportTable::standard();
        table.density[0].points = -0.2;
        assert!(table.validate().is_err());
    }
}
