//! Shared fixtures for the engine benchmarks.

use refd_core::{generate_synthetic, Dataset, ModelConfig, SyntheticSpec};

/// The standard benchmark shape: 83 regions, 20 factors in 5 groups.
pub fn paper_shape_dataset(seed: u64) -> Dataset {
    generate_synthetic(&SyntheticSpec::with_shape(83, 4, seed)).expect("synthetic dataset")
}

/// A larger stress shape: 830 regions, 40 factors.
pub fn large_dataset(seed: u64) -> Dataset {
    generate_synthetic(&SyntheticSpec::with_shape(830, 8, seed)).expect("synthetic dataset")
}

pub fn default_config() -> ModelConfig {
    ModelConfig::default()
}
