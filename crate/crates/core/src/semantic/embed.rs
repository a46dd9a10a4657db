use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use xxhash_rust::xxh64::xxh64;

use crate::corpus::{normalize, tokenize};
use crate::error::{Error, Result};

/// A sentence embedding with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("embedding has no components".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "embedding component {bad} is not finite"
            )));
        }
        Ok(Embedding(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Embedding(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

/// Turns raw sentences into embeddings of a fixed dimension.
///
/// Implementations must be deterministic: embedding the same sentence twice
/// within a process yields bitwise-identical vectors.
pub trait EmbeddingBackend: Send + Sync {
    /// Identifies the backend and its parameters; used as the cache key prefix.
    fn id(&self) -> String;

    fn dim(&self) -> usize;

    fn embed_batch(&self, sentences: &[&str]) -> Result<Vec<Embedding>>;
}

impl<B: EmbeddingBackend + ?Sized> EmbeddingBackend for &B {
    fn id(&self) -> String {
        (**self).id()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn embed_batch(&self, sentences: &[&str]) -> Result<Vec<Embedding>> {
        (**self).embed_batch(sentences)
    }
}

impl<B: EmbeddingBackend + ?Sized> EmbeddingBackend for Box<B> {
    fn id(&self) -> String {
        (**self).id()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn embed_batch(&self, sentences: &[&str]) -> Result<Vec<Embedding>> {
        (**self).embed_batch(sentences)
    }
}

pub const DEFAULT_DIM: usize = 256;

/// Bag-of-terms feature hashing: each term of the normalized sentence is
/// hashed with XXH64 (fixed seed) into one of `dim` buckets, bucket counts
/// are accumulated and the vector is L2-normalized. An empty sentence maps
/// to the zero vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureHashEmbedder {
    dim: usize,
    seed: u64,
}

impl FeatureHashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding dim must be positive".into(),
            ));
        }
        Ok(FeatureHashEmbedder { dim, seed })
    }

    pub fn embed_one(&self, sentence: &str) -> Embedding {
        let mut buckets = vec![0.0f64; self.dim];
        for term in tokenize(&normalize(sentence)) {
            let bucket = (xxh64(term.as_bytes(), self.seed) % self.dim as u64) as usize;
            buckets[bucket] += 1.0;
        }
        let norm = buckets.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut buckets {
                *v /= norm;
            }
        }
        Embedding(buckets)
    }
}

impl Default for FeatureHashEmbedder {
    fn default() -> Self {
        FeatureHashEmbedder {
            dim: DEFAULT_DIM,
            seed: 0,
        }
    }
}

impl EmbeddingBackend for FeatureHashEmbedder {
    fn id(&self) -> String {
        format!("feature-hash/{}/seed{}", self.dim, self.seed)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, sentences: &[&str]) -> Result<Vec<Embedding>> {
        Ok(sentences.par_iter().map(|s| self.embed_one(s)).collect())
    }
}

/// Embeds with the default feature-hash backend.
pub fn embed_builtin(sentences: &[&str]) -> Vec<Embedding> {
    let backend = FeatureHashEmbedder::default();
    sentences.iter().map(|s| backend.embed_one(s)).collect()
}

pub const CACHE_FILE: &str = "embeddings.cache";

/// Wraps a backend with an append-only on-disk cache.
///
/// Each line is `<backend id>\t<xxh64 of raw sentence, hex>\t<space-separated
/// components>`; components are written in shortest round-trip decimal so a
/// reload is bit-exact.
pub struct CachedEmbedder<B> {
    inner: B,
    backend_id: String,
    path: PathBuf,
    entries: Mutex<HashMap<u64, Embedding>>,
}

impl<B: EmbeddingBackend> CachedEmbedder<B> {
    pub fn open(inner: B, dir: &Path) -> Result<Self> {
        let backend_id = inner.id();
        if backend_id.contains(['\t', '\n']) {
            return Err(Error::InvalidArgument(format!(
                "backend id `{backend_id}` cannot be used as a cache key"
            )));
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(CACHE_FILE);
        let mut entries = HashMap::new();
        match File::open(&path) {
            Ok(file) => {
                for line in BufReader::new(file).lines() {
                    let line = line.map_err(|e| Error::io(&path, e))?;
                    // Torn or foreign lines are skipped rather than fatal.
                    if let Ok(entry) = parse_cache_line(&line) {
                        if entry.backend_id == backend_id && entry.embedding.dim() == inner.dim() {
                            entries.insert(entry.key, entry.embedding);
                        }
                    }
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(&path, e)),
        }
        Ok(CachedEmbedder {
            inner,
            backend_id,
            path,
            entries: Mutex::new(entries),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<B: EmbeddingBackend> EmbeddingBackend for CachedEmbedder<B> {
    fn id(&self) -> String {
        self.backend_id.clone()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed_batch(&self, sentences: &[&str]) -> Result<Vec<Embedding>> {
        let keys: Vec<u64> = sentences.iter().map(|s| sentence_key(s)).collect();
        let mut entries = self.entries.lock().expect("cache lock");
        let mut misses: Vec<usize> = Vec::new();
        for (i, key) in keys.iter().enumerate() {
            if !entries.contains_key(key) && !misses.iter().any(|&m| keys[m] == *key) {
                misses.push(i);
            }
        }
        if !misses.is_empty() {
            let texts: Vec<&str> = misses.iter().map(|&i| sentences[i]).collect();
            let fresh = self.inner.embed_batch(&texts)?;
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| Error::io(&self.path, e))?;
            let mut buf = String::new();
            for (&i, emb) in misses.iter().zip(fresh) {
                buf.push_str(&format_cache_line(&self.backend_id, keys[i], &emb));
                buf.push('\n');
                entries.insert(keys[i], emb);
            }
            file.write_all(buf.as_bytes())
                .map_err(|e| Error::io(&self.path, e))?;
        }
        Ok(keys.iter().map(|k| entries[k].clone()).collect())
    }
}

pub fn sentence_key(raw: &str) -> u64 {
    xxh64(raw.as_bytes(), 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub backend_id: String,
    pub key: u64,
    pub embedding: Embedding,
}

pub fn format_cache_line(backend_id: &str, key: u64, embedding: &Embedding) -> String {
    let values: Vec<String> = embedding.values().iter().map(|v| v.to_string()).collect();
    format!("{backend_id}\t{key:016x}\t{}", values.join(" "))
}

pub fn parse_cache_line(line: &str) -> Result<CacheEntry> {
    let mut fields = line.split('\t');
    let (Some(id), Some(key), Some(values), None) =
        (fields.next(), fields.next(), fields.next(), fields.next())
    else {
        return Err(Error::parse(
            "cache line must have three tab-separated fields",
        ));
    };
    let key = u64::from_str_radix(key, 16)
        .map_err(|e| Error::parse(format!("bad cache key `{key}`: {e}")))?;
    let values = values
        .split(' ')
        .map(|v| v.parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::parse(format!("bad cache vector: {e}")))?;
    Ok(CacheEntry {
        backend_id: id.to_string(),
        key,
        embedding: Embedding::new(values)?,
    })
}
