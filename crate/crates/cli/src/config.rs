//! JSON run configuration. Every field is optional; command-line flags take
//! precedence over the file.

use std::path::Path;

use ks_core::kp::WeightSequence;
use ks_core::TailFamily;
use serde::Deserialize;
use std::sync::Arc;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Canonical,
    Scaled,
}

impl From<Tail> for TailFamily {
    fn from(t: Tail) -> Self {
        match t {
            Tail::Canonical => TailFamily::CanonicalJ,
            Tail::Scaled => TailFamily::ScaledJ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum Weights {
    /// `t_k = (1 - r) r^(k-1)`.
    Geometric { ratio: f64 },
    /// `t_k = 1 / (k (k + 1))`, with tail `1 / (K + 1)`.
    Telescoping,
}

impl Weights {
    pub fn sequence(&self) -> Result<WeightSequence, CliError> {
        match *self {
            Weights::Geometric { ratio } => {
                WeightSequence::geometric(ratio).map_err(CliError::Compute)
            }
            Weights::Telescoping => Ok(WeightSequence::Normalized {
                weight: Arc::new(|k| 1.0 / (k as f64 * (k + 1) as f64)),
                total: 1.0,
                tail: Arc::new(|n| 1.0 / (n + 1) as f64),
            }),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub weights: Option<Weights>,
    /// Window of the dyadic family, one `[lo, hi]` per axis.
    pub window: Option<Vec<[f64; 2]>>,
    /// Replicates a one-axis window to this many dimensions.
    pub dimension: Option<usize>,
    pub truncation: Option<usize>,
    pub tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub tail: Option<Tail>,
    pub normalize: Option<bool>,
    pub singular_points: Option<Vec<f64>>,
    pub breakpoints: Option<Vec<f64>>,
    pub abs_bound: Option<f64>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_document() {
        let c = RunConfig::parse(
            r#"{"weights": {"name": "geometric", "ratio": 0.25}, "window": [[0, 1], [-1, 1]],
                "truncation": 32, "tol": 1e-8, "tail": "scaled", "format": "json",
                "singular_points": [0], "normalize": false}"#,
        )
        .unwrap();
        assert_eq!(c.weights, Some(Weights::Geometric { ratio: 0.25 }));
        assert_eq!(c.window.as_ref().unwrap().len(), 2);
        assert_eq!(c.tail, Some(Tail::Scaled));
        assert_eq!(c.format, Some(Format::Json));
        assert_eq!(c.normalize, Some(false));
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(RunConfig::parse(r#"{"truncaton": 3}"#).is_err());
        assert!(RunConfig::parse(r#"{"weights": {"name": "harmonic"}}"#).is_err());
        assert_eq!(RunConfig::parse("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn telescoping_weights_sum_to_one() {
        let w = Weights::Telescoping.sequence().unwrap();
        let s: f64 = (1..=1000).map(|k| w.weight(k)).sum();
        assert!((s + w.tail_sum(1000) - 1.0).abs() < 1e-12);
    }
}
