//! Set-level precision/recall/F1 from a pairwise similarity.
//!
//! `Precision(G, T)` is the mean, over sentences of `G`, of the best
//! similarity to any sentence of `T`; `Recall(G, T)` is the same quantity
//! with the roles swapped. Both the semantic and the syntactic metrics are
//! built on [`best_matches`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetSimilarityScores {
    #[serde(rename = "p")]
    pub precision: f64,
    #[serde(rename = "r")]
    pub recall: f64,
    pub f1: f64,
}

impl SetSimilarityScores {
    pub fn new(precision: f64, recall: f64) -> Self {
        SetSimilarityScores {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

/// How a sentence aggregates its similarities to the sentences of the other
/// set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Best match: largest similarity, smallest distance.
    #[default]
    Max,
    /// Worst match: smallest similarity, largest distance.
    Min,
}

impl std::str::FromStr for Aggregation {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(Aggregation::Max),
            "min" => Ok(Aggregation::Min),
            _ => Err(crate::error::Error::InvalidArgument(format!(
                "aggregation must be `max` or `min`, got `{s}`"
            ))),
        }
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    let sum = precision + recall;
    if sum == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / sum
    }
}

/// Evaluates `best(i)` for every `i in 0..n` in parallel, preserving index
/// order.
pub(crate) fn best_matches<F>(n: usize, best: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..n).into_par_iter().map(best).collect()
}

/// Mean accumulated in index order, so the value does not depend on how the
/// maxima were scheduled.
pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
