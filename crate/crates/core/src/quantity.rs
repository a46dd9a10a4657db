//! Sentence-quantity and vocabulary-augmentation metrics.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{vocabulary, Corpus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniquenessResult {
    pub n: usize,
    pub unique_count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabGainResult {
    pub new_terms: usize,
    pub new_term_list: Vec<String>,
}

/// Counts generated sentences whose normalized form occurs exactly once in
/// `generated` and never in `train`. Every member of a duplicate group is
/// non-unique.
pub fn unique_count(generated: &Corpus, train: &Corpus) -> Result<usize> {
    if generated.is_empty() {
        return Err(Error::EmptyCorpus(generated.name.clone()));
    }
    let seen: HashSet<&str> = train
        .records()
        .iter()
        .map(|r| r.normalized.as_str())
        .collect();
    Ok(count_unique(generated, &seen))
}

fn count_unique(generated: &Corpus, train: &HashSet<&str>) -> usize {
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for r in generated.records() {
        *occurrences.entry(r.normalized.as_str()).or_default() += 1;
    }
    occurrences
        .into_iter()
        .filter(|(text, count)| *count == 1 && !train.contains(text))
        .count()
}

pub fn unique_fraction(generated: &Corpus, train: &Corpus) -> Result<UniquenessResult> {
    let unique = unique_count(generated, train)?;
    Ok(uniqueness(generated.len(), unique))
}

fn uniqueness(n: usize, unique_count: usize) -> UniquenessResult {
    UniquenessResult {
        n,
        unique_count,
        fraction: unique_count as f64 / n as f64,
    }
}

/// `Unique(n)` over the first `n` generated records for each checkpoint.
pub fn uniqueness_curve(
    generated: &Corpus,
    train: &Corpus,
    checkpoints: &[usize],
) -> Result<Vec<UniquenessResult>> {
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(
            "checkpoints must be ascending".into(),
        ));
    }
    let seen: HashSet<&str> = train
        .records()
        .iter()
        .map(|r| r.normalized.as_str())
        .collect();
    checkpoints
        .iter()
        .map(|&n| {
            if n == 0 || n > generated.len() {
                return Err(Error::InvalidArgument(format!(
                    "checkpoint {n} outside 1..={}",
                    generated.len()
                )));
            }
            Ok(uniqueness(n, count_unique(&generated.prefix(n), &seen)))
        })
        .collect()
}

/// Terms of `generated` that never appear in `train`.
pub fn vocab_gain(generated: &Corpus, train: &Corpus) -> VocabGainResult {
    let known = vocabulary(train);
    let new_term_list: Vec<String> = vocabulary(generated)
        .terms
        .into_keys()
        .filter(|t| !known.contains(t))
        .collect();
    VocabGainResult {
        new_terms: new_term_list.len(),
        new_term_list,
    }
}

/// Number of distinct normalized sentences.
pub fn distinct_sentences(corpus: &Corpus) -> usize {
    corpus
        .records()
        .iter()
        .map(|r| r.normalized.as_str())
        .collect::<HashSet<_>>()
        .len()
}
