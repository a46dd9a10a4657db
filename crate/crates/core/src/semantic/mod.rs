//! Embedding-based semantic similarity between sentence sets.

mod embed;
mod remote;

pub use embed::{
    embed_builtin, format_cache_line, parse_cache_line, sentence_key, CacheEntry, CachedEmbedder,
    Embedding, EmbeddingBackend, FeatureHashEmbedder, CACHE_FILE, DEFAULT_DIM,
};
pub use remote::{parse_embed_response, parse_health, Health, RemoteEmbedder, DEFAULT_BATCH_SIZE};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
pub use crate::setscore::Aggregation;
use crate::setscore::{best_matches, mean, SetSimilarityScores};

/// Cosine similarity clamped to `[-1, 1]`; 0 when either vector is zero.
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(cosine_unchecked(a.values(), b.values()))
}

fn cosine_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): for a == b this is
    // exactly na, so self-similarity is exactly 1.
    (dot / (na * nb).sqrt()).clamp(-1.0, 1.0)
}

pub fn embed_corpus(corpus: &Corpus, backend: &dyn EmbeddingBackend) -> Result<Vec<Embedding>> {
    let sentences: Vec<&str> = corpus.raw_sentences().collect();
    let out = backend.embed_batch(&sentences)?;
    if out.len() != sentences.len() {
        return Err(Error::InvalidArgument(format!(
            "backend returned {} embeddings for {} sentences",
            out.len(),
            sentences.len()
        )));
    }
    if let Some(e) = out.iter().find(|e| e.dim() != backend.dim()) {
        return Err(Error::DimensionMismatch {
            left: backend.dim(),
            right: e.dim(),
        });
    }
    Ok(out)
}

/// For every embedding in `left`, its maximal cosine to any of `right`.
pub fn best_cosines(left: &[Embedding], right: &[Embedding]) -> Result<Vec<f64>> {
    aggregate_cosines(left, right, Aggregation::Max)
}

pub fn aggregate_cosines(
    left: &[Embedding],
    right: &[Embedding],
    aggregation: Aggregation,
) -> Result<Vec<f64>> {
    if left.is_empty() || right.is_empty() {
        return Err(Error::InvalidArgument(
            "similarity sets must be non-empty".into(),
        ));
    }
    let dim = right[0].dim();
    if let Some(e) = left.iter().chain(right).find(|e| e.dim() != dim) {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: e.dim(),
        });
    }
    Ok(best_matches(left.len(), |i| {
        let sims = right
            .iter()
            .map(|r| cosine_unchecked(left[i].values(), r.values()));
        match aggregation {
            Aggregation::Max => sims.fold(f64::NEG_INFINITY, f64::max),
            Aggregation::Min => sims.fold(f64::INFINITY, f64::min),
        }
    }))
}

/// `Precision(G, T)` over precomputed embeddings.
pub fn embedding_precision(generated: &[Embedding], reference: &[Embedding]) -> Result<f64> {
    Ok(mean(&best_cosines(generated, reference)?))
}

pub fn embedding_set_scores(
    generated: &[Embedding],
    reference: &[Embedding],
) -> Result<SetSimilarityScores> {
    let precision = embedding_precision(generated, reference)?;
    let recall = embedding_precision(reference, generated)?;
    Ok(SetSimilarityScores::new(precision, recall))
}

pub fn semantic_set_scores(
    generated: &Corpus,
    reference: &Corpus,
    backend: &dyn EmbeddingBackend,
) -> Result<SetSimilarityScores> {
    for c in [generated, reference] {
        if c.is_empty() {
            return Err(Error::EmptyCorpus(c.name.clone()));
        }
    }
    let g = embed_corpus(generated, backend)?;
    let t = embed_corpus(reference, backend)?;
    embedding_set_scores(&g, &t)
}
