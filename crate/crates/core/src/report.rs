//! Report envelope shared by every CLI emitter.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::histogram::HistogramReport;
use crate::pipeline::{GroupSubscores, RatingTable, StabilityReport, TrendReport};
use crate::screening::{CorrelationMatrix, ScreeningReport};

/// SHA-256 of arbitrary bytes as lowercase hex.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Combines several input digests into one, order-sensitive.
pub fn combine_digests<'a, I: IntoIterator<Item = &'a str>>(digests: I) -> String {
    let mut hasher = Sha256::new();
    for d in digests {
        hasher.update(d.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportPayload {
    Rating {
        table: RatingTable,
        subscores: GroupSubscores,
    },
    Screening {
        threshold: f64,
        matrix: CorrelationMatrix,
        report: ScreeningReport,
    },
    Trend {
        report: TrendReport,
    },
    Sensitivity {
        report: StabilityReport,
    },
    Histogram {
        report: HistogramReport,
    },
}

/// Wraps a payload with the provenance needed to reproduce it. The
/// timestamp is informational and excluded from determinism comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub tool_version: String,
    pub config_digest: String,
    pub dataset_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub payload: ReportPayload,
}

impl ReportEnvelope {
    pub fn new(config_digest: String, dataset_digest: String, payload: ReportPayload) -> Self {
        ReportEnvelope {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest,
            dataset_digest,
            generated_at: None,
            payload,
        }
    }

    pub fn with_timestamp(mut self, timestamp: String) -> Self {
        self.generated_at = Some(timestamp);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
