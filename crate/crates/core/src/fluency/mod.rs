//! Grammar-error density and plausibility (perplexity) scoring.

mod languagetool;
mod ngram;
mod remote_lm;

pub use languagetool::{
    check_remote, parse_check_response, LanguageToolClient, DEFAULT_CONCURRENCY, DEFAULT_LANGUAGE,
};
pub use ngram::{NGramModel, BOS, DEFAULT_ADD_K, DEFAULT_ORDER, EOS, UNK};
pub use remote_lm::{parse_score_response, RemoteLanguageModel};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SentenceRecord};
use crate::error::{Error, Result};

/// Counts grammatical errors in a raw sentence.
pub trait Proofreader: Send + Sync {
    fn id(&self) -> String;

    fn count_errors(&self, raw: &str) -> Result<usize>;

    /// One result per input, in input order.
    fn count_errors_many(&self, raws: &[&str]) -> Vec<Result<usize>> {
        raws.iter().map(|r| self.count_errors(r)).collect()
    }
}

/// Scores sentences by perplexity; lower is more plausible.
pub trait LanguageModel: Send + Sync {
    fn id(&self) -> String;

    fn perplexity(&self, sentence: &SentenceRecord) -> Result<f64>;

    /// One result per input, in input order.
    fn perplexities(&self, sentences: &[SentenceRecord]) -> Vec<Result<f64>> {
        sentences.par_iter().map(|s| self.perplexity(s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrammarScore {
    pub errors: usize,
    pub length: usize,
    pub score: f64,
}

impl GrammarScore {
    pub fn new(errors: usize, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::EmptySentence);
        }
        Ok(GrammarScore {
            errors,
            length,
            score: errors as f64 / length as f64,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityScore {
    pub perplexity: f64,
}

/// Errors found in the raw sentence over the normalized token count.
pub fn grammar_score(
    sentence: &SentenceRecord,
    proofreader: &dyn Proofreader,
) -> Result<GrammarScore> {
    if sentence.is_empty() {
        return Err(Error::EmptySentence);
    }
    GrammarScore::new(proofreader.count_errors(&sentence.raw)?, sentence.len())
}

/// Per-sentence grammar scores; the first failure aborts with its id.
pub fn grammar_scores(corpus: &Corpus, proofreader: &dyn Proofreader) -> Result<Vec<GrammarScore>> {
    let provenance = |id| move |e: Error| e.in_metric("grammar", &corpus.name, Some(id));
    if let Some(empty) = corpus.records().iter().find(|r| r.is_empty()) {
        return Err(provenance(empty.id)(Error::EmptySentence));
    }
    let raws: Vec<&str> = corpus.raw_sentences().collect();
    proofreader
        .count_errors_many(&raws)
        .into_iter()
        .zip(corpus.records())
        .map(|(count, record)| {
            count
                .and_then(|c| GrammarScore::new(c, record.len()))
                .map_err(provenance(record.id))
        })
        .collect()
}

pub fn corpus_grammar(corpus: &Corpus, proofreader: &dyn Proofreader) -> Result<f64> {
    let scores = grammar_scores(corpus, proofreader)?;
    mean_of(corpus, scores.iter().map(|s| s.score))
}

pub fn plausibility_scores(
    corpus: &Corpus,
    model: &dyn LanguageModel,
) -> Result<Vec<PlausibilityScore>> {
    model
        .perplexities(corpus.records())
        .into_iter()
        .zip(corpus.records())
        .map(|(p, record)| {
            p.map(|perplexity| PlausibilityScore { perplexity })
                .map_err(|e| e.in_metric("plausibility", &corpus.name, Some(record.id)))
        })
        .collect()
}

pub fn corpus_plausibility(corpus: &Corpus, model: &dyn LanguageModel) -> Result<f64> {
    let scores = plausibility_scores(corpus, model)?;
    mean_of(corpus, scores.iter().map(|s| s.perplexity))
}

fn mean_of(corpus: &Corpus, values: impl ExactSizeIterator<Item = f64>) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptyCorpus(corpus.name.clone()));
    }
    Ok(values.sum::<f64>() / n as f64)
}
