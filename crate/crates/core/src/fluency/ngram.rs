use std::collections::HashMap;

use crate::corpus::{Corpus, SentenceRecord};
use crate::error::{Error, Result};

use super::LanguageModel;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

const BOS_ID: u32 = 0;
const EOS_ID: u32 = 1;
const UNK_ID: u32 = 2;

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_ADD_K: f64 = 0.1;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ContextCounts {
    total: u64,
    next: HashMap<u32, u64>,
}

/// Add-k smoothed n-gram language model.
///
/// Sentences are padded with `order - 1` BOS markers and one EOS marker.
/// Predictions range over every vocabulary entry except BOS, which is only
/// ever conditioned on; unknown terms map to UNK.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    add_k: f64,
    terms: Vec<String>,
    ids: HashMap<String, u32>,
    contexts: HashMap<Vec<u32>, ContextCounts>,
}

impl NGramModel {
    pub fn train(corpus: &Corpus, order: usize, add_k: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "n-gram order must be at least 1".into(),
            ));
        }
        if !(add_k >= 0.0 && add_k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "add-k constant must be a finite non-negative number, got {add_k}"
            )));
        }
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus(corpus.name.clone()));
        }
        let mut model = NGramModel {
            order,
            add_k,
            terms: Vec::new(),
            ids: HashMap::new(),
            contexts: HashMap::new(),
        };
        for reserved in [BOS, EOS, UNK] {
            model.intern(reserved);
        }
        for record in corpus.records() {
            let ids: Vec<u32> = record.tokens.iter().map(|t| model.intern(t)).collect();
            let padded = model.pad(ids);
            for window in padded.windows(order) {
                let (context, next) = window.split_at(order - 1);
                let counts = model.contexts.entry(context.to_vec()).or_default();
                counts.total += 1;
                *counts.next.entry(next[0]).or_default() += 1;
            }
        }
        Ok(model)
    }

    fn intern(&mut self, term: &str) -> u32 {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(term.to_string());
        self.ids.insert(term.to_string(), id);
        id
    }

    fn pad(&self, ids: Vec<u32>) -> Vec<u32> {
        let mut padded = vec![BOS_ID; self.order - 1];
        padded.extend(ids);
        padded.push(EOS_ID);
        padded
    }

    fn lookup(&self, term: &str) -> u32 {
        self.ids.get(term).copied().unwrap_or(UNK_ID)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn add_k(&self) -> f64 {
        self.add_k
    }

    /// Vocabulary including the BOS, EOS and UNK markers.
    pub fn vocab(&self) -> &[String] {
        &self.terms
    }

    /// Number of terms a context can predict (the vocabulary minus BOS).
    fn event_space(&self) -> usize {
        self.terms.len() - 1
    }

    /// Training count of `term` after `context`.
    pub fn count(&self, context: &[&str], term: &str) -> u64 {
        let context: Vec<u32> = context.iter().map(|t| self.lookup(t)).collect();
        self.contexts
            .get(&context)
            .and_then(|c| c.next.get(&self.lookup(term)))
            .copied()
            .unwrap_or(0)
    }

    /// Every context seen in training.
    pub fn contexts(&self) -> impl Iterator<Item = Vec<&str>> {
        self.contexts.keys().map(|k| {
            k.iter()
                .map(|&id| self.terms[id as usize].as_str())
                .collect()
        })
    }

    fn prob_ids(&self, context: &[u32], next: u32) -> Result<f64> {
        let (count, total) = match self.contexts.get(context) {
            Some(c) => (c.next.get(&next).copied().unwrap_or(0), c.total),
            None => (0, 0),
        };
        let numerator = count as f64 + self.add_k;
        if numerator == 0.0 {
            return Err(Error::UnsmoothedZero {
                context: context
                    .iter()
                    .map(|&id| self.terms[id as usize].clone())
                    .collect(),
                term: self.terms[next as usize].clone(),
            });
        }
        Ok(numerator / (total as f64 + self.add_k * self.event_space() as f64))
    }

    /// `p(term | context)`; `context` must hold `order - 1` terms.
    pub fn probability(&self, context: &[&str], term: &str) -> Result<f64> {
        if context.len() != self.order - 1 {
            return Err(Error::InvalidArgument(format!(
                "context must have {} terms",
                self.order - 1
            )));
        }
        let context: Vec<u32> = context.iter().map(|t| self.lookup(t)).collect();
        self.prob_ids(&context, self.lookup(term))
    }

    /// The full conditional distribution after `context`, over every
    /// predictable term.
    pub fn distribution(&self, context: &[&str]) -> Result<Vec<(String, f64)>> {
        self.terms
            .iter()
            .filter(|t| t.as_str() != BOS)
            .map(|t| Ok((t.clone(), self.probability(context, t)?)))
            .collect()
    }

    /// `exp(-(1/N) Σ ln p)` over the sentence tokens plus EOS.
    pub fn perplexity(&self, sentence: &SentenceRecord) -> Result<f64> {
        if sentence.is_empty() {
            return Err(Error::EmptySentence);
        }
        let ids: Vec<u32> = sentence.tokens.iter().map(|t| self.lookup(t)).collect();
        let padded = self.pad(ids);
        let mut log_sum = 0.0;
        let mut events = 0usize;
        for window in padded.windows(self.order) {
            let (context, next) = window.split_at(self.order - 1);
            log_sum += self.prob_ids(context, next[0])?.ln();
            events += 1;
        }
        Ok((-log_sum / events as f64).exp())
    }
}

impl LanguageModel for NGramModel {
    fn id(&self) -> String {
        format!("ngram/{}/{}", self.order, self.add_k)
    }

    fn perplexity(&self, sentence: &SentenceRecord) -> Result<f64> {
        NGramModel::perplexity(self, sentence)
    }
}
