//! Per-factor mean and standard deviation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::types::Stratum;

/// Denominator used for the standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdDevMode {
    /// Divide by n.
    #[default]
    Population,
    /// Divide by n - 1.
    Sample,
}

impl StdDevMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            StdDevMode::Population => "population",
            StdDevMode::Sample => "sample",
        }
    }
}

/// Mean and standard deviation of one factor over one stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorStats {
    pub mean: f64,
    /// Standard deviation; zero iff all observations are equal.
    pub sigma: f64,
    pub n: usize,
    pub stratum: Stratum,
}

impl FactorStats {
    pub fn with_stratum(mut self, stratum: Stratum) -> Self {
        self.stratum = stratum;
        self
    }
}

/// Computes mean and standard deviation over `values`.
///
/// Errors on an empty list, on any non-finite value, and on sample mode
/// with fewer than two observations.
pub fn compute_factor_stats(values: &[f64], mode: StdDevMode) -> Result<FactorStats> {
    if values.is_empty() {
        return Err(Error::NoObservations);
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::InvalidObservation { index, value });
        }
    }
    let n = values.len();
    if mode == StdDevMode::Sample && n < 2 {
        return Err(Error::InsufficientObservations(
            "sample standard deviation needs at least 2 observations".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sum_sq: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = match mode {
        StdDevMode::Population => n as f64,
        StdDevMode::Sample => (n - 1) as f64,
    };
    let sigma = (sum_sq / denom).sqrt();
    Ok(FactorStats {
        mean,
        sigma,
        n,
        stratum: Stratum::All,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_vector_has_zero_sigma() {
        let s = compute_factor_stats(&[5.0, 5.0, 5.0], StdDevMode::Population).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.sigma, 0.0);
        assert_eq!(s.n, 3);
    }

    #[test]
    fn population_sigma() {
        let s = compute_factor_stats(&[1.0, 2.0, 3.0], StdDevMode::Population).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.sigma - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.sigma - 0.816_496_580_927_726).abs() < 1e-12);
    }

    #[test]
    fn sample_sigma() {
        let s = compute_factor_stats(&[0.0, 10.0], StdDevMode::Sample).unwrap();
        assert_eq!(s.mean, 5.0);
        assert!((s.sigma - 50.0f64.sqrt()).abs() < 1e-15);
        assert!((s.sigma - 7.071_067_811_865_475_5).abs() < 1e-12);
    }

    #[test]
    fn empty_list_rejected() {
        assert!(matches!(
            compute_factor_stats(&[], StdDevMode::Population),
            Err(Error::NoObservations)
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let err = compute_factor_stats(&[1.0, f64::NAN], StdDevMode::Population).unwrap_err();
        assert!(err.to_string().contains("invalid observation"));
        assert!(compute_factor_stats(&[f64::INFINITY], StdDevMode::Population).is_err());
    }

    #[test]
    fn sample_mode_needs_two_observations() {
        let err = compute_factor_stats(&[4.2], StdDevMode::Sample).unwrap_err();
        assert!(err.to_string().contains("insufficient observations"));
        assert!(compute_factor_stats(&[4.2], StdDevMode::Population).is_ok());
    }
}
