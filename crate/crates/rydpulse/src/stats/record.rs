//! Per-sample ensemble record, the JSON-lines row of every ensemble study.

use serde::{Deserialize, Serialize};

/// Everything recorded about one evolved (or Haar-sampled) state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub sample_id: u64,
    pub seed: u64,
    pub t_final: f64,
    pub spacing: f64,
    pub entropy: f64,
    pub normalized_entropy: f64,
    pub gap_ratios: Vec<f64>,
    pub nn_correlation: f64,
    pub mean_excitation: f64,
    /// Rescaled Born probabilities omega = D p(sigma); omitted when not
    /// requested to keep record files small.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
}
