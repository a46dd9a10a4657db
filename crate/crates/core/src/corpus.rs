//! Sentence normalization, corpus ingestion, splitting and vocabulary.
//!
//! Every metric in the crate works on [`SentenceRecord`]s: a raw sentence
//! together with its normalized form (lowercased, punctuation removed,
//! whitespace collapsed) and the whitespace-separated terms of that form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static PUNCTUATION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\p{P}[:punct:]]+").expect("static regex"));

/// Lowercases (simple per-character mapping), strips punctuation and
/// collapses whitespace.
pub fn normalize(raw: &str) -> String {
    let lowered: String = raw.chars().map(simple_lowercase).collect();
    let stripped = PUNCTUATION.replace_all(&lowered, "");
    let mut out = String::with_capacity(stripped.len());
    for term in stripped.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(term);
    }
    out
}

fn simple_lowercase(c: char) -> char {
    // U+0130 is the only character whose full lowercase mapping differs from
    // its simple one by expanding to several characters.
    if c == '\u{130}' {
        return 'i';
    }
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

/// Splits a normalized sentence into terms.
pub fn tokenize(normalized: &str) -> Vec<String> {
    normalized.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: usize,
    pub raw: String,
    pub normalized: String,
    pub tokens: Vec<String>,
}

impl SentenceRecord {
    pub fn new(id: usize, raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let normalized = normalize(&raw);
        let tokens = tokenize(&normalized);
        SentenceRecord {
            id,
            raw,
            normalized,
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Validation,
    Test,
    Generated,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Train => "train",
            Role::Validation => "validation",
            Role::Test => "test",
            Role::Generated => "generated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub role: Role,
    records: Vec<SentenceRecord>,
}

impl Corpus {
    /// Builds a corpus from raw sentences, assigning ids in order.
    pub fn from_sentences<I, S>(name: impl Into<String>, role: Role, sentences: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let records = sentences
            .into_iter()
            .enumerate()
            .map(|(id, s)| SentenceRecord::new(id, s))
            .collect();
        Corpus {
            name: name.into(),
            role,
            records,
        }
    }

    pub fn records(&self) -> &[SentenceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn raw_sentences(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.raw.as_str())
    }

    /// A new corpus holding the records at `indices`, renumbered from 0.
    pub fn select(&self, indices: &[usize], name: impl Into<String>, role: Role) -> Corpus {
        Corpus::from_sentences(
            name,
            role,
            indices.iter().map(|&i| self.records[i].raw.clone()),
        )
    }

    /// The first `n` records.
    pub fn prefix(&self, n: usize) -> Corpus {
        Corpus {
            name: self.name.clone(),
            role: self.role,
            records: self.records[..n.min(self.records.len())].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputFormat {
    Lines,
    Csv { column: String },
}

impl FromStr for InputFormat {
    type Err = Error;

    /// `lines`, or `csv:<column>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "lines" {
            return Ok(InputFormat::Lines);
        }
        match s.strip_prefix("csv:") {
            Some(column) if !column.is_empty() => Ok(InputFormat::Csv {
                column: column.to_string(),
            }),
            _ => Err(Error::InvalidArgument(format!(
                "unknown input format `{s}` (expected `lines` or `csv:<column>`)"
            ))),
        }
    }
}

pub fn load_corpus(
    path: &Path,
    format: &InputFormat,
    role: Role,
    name: impl Into<String>,
) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = name.into();
    let sentences = match format {
        InputFormat::Lines => read_lines(file).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })?,
        InputFormat::Csv { column } => read_csv_column(file, column)?,
    };
    corpus_from_cells(name, role, sentences)
}

/// Parses one-sentence-per-line text into a corpus.
pub fn parse_lines(input: impl Read, role: Role, name: impl Into<String>) -> Result<Corpus> {
    corpus_from_cells(name.into(), role, read_lines(input)?)
}

/// Parses a headed CSV document, taking sentences from `column`.
pub fn parse_csv(
    input: impl Read,
    column: &str,
    role: Role,
    name: impl Into<String>,
) -> Result<Corpus> {
    corpus_from_cells(name.into(), role, read_csv_column(input, column)?)
}

fn read_lines(input: impl Read) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in BufReader::new(input).lines() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        out.push(line);
    }
    Ok(out)
}

fn read_csv_column(input: impl Read, column: &str) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let index = reader
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::MissingColumn(column.to_string()))?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        out.push(row.get(index).unwrap_or_default().to_string());
    }
    Ok(out)
}

// Cells that normalize to nothing carry no terms and are dropped along with
// blank lines.
fn corpus_from_cells(name: String, role: Role, cells: Vec<String>) -> Result<Corpus> {
    let kept: Vec<String> = cells
        .into_iter()
        .map(|c| c.trim_end_matches('\r').to_string())
        .filter(|c| !normalize(c).is_empty())
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyCorpus(name));
    }
    Ok(Corpus::from_sentences(name, role, kept))
}

/// Train/validation/test ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self> {
        let ratios = SplitRatios {
            train,
            validation,
            test,
        };
        let all = [train, validation, test];
        if all.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::InvalidArgument(
                "split ratios must be positive".into(),
            ));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("split ratios must sum to 1".into()));
        }
        Ok(ratios)
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl FromStr for SplitRatios {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("bad ratios `{s}`: {e}")))?;
        match parts.as_slice() {
            [a, b, c] => SplitRatios::new(*a, *b, *c),
            _ => Err(Error::InvalidArgument(format!(
                "expected three comma-separated ratios, got `{s}`"
            ))),
        }
    }
}

/// Index sets of a train/validation/test split of `n` items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n` with a ChaCha8 stream keyed by `seed`, then cuts
/// validation and test as `floor(n * ratio)`; the remainder goes to train.
pub fn split_indices(n: usize, ratios: SplitRatios, seed: u64) -> Result<SplitIndices> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "cannot split a corpus of {n} records (need at least 3)"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = |ratio: f64| ((n as f64) * ratio + 1e-9).floor() as usize;
    let n_valid = cut(ratios.validation);
    let n_test = cut(ratios.test);
    let n_train = n - n_valid - n_test;
    let test = order.split_off(n_train + n_valid);
    let validation = order.split_off(n_train);
    Ok(SplitIndices {
        train: order,
        validation,
        test,
    })
}

pub fn split_corpus(
    corpus: &Corpus,
    ratios: SplitRatios,
    seed: u64,
) -> Result<(Corpus, Corpus, Corpus)> {
    let idx = split_indices(corpus.len(), ratios, seed)?;
    let part = |indices: &[usize], suffix: &str, role| {
        corpus.select(indices, format!("{}-{suffix}", corpus.name), role)
    };
    Ok((
        part(&idx.train, "train", Role::Train),
        part(&idx.validation, "valid", Role::Validation),
        part(&idx.test, "test", Role::Test),
    ))
}

/// Term occurrence counts over a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VocabSet {
    pub terms: BTreeMap<String, usize>,
}

impl VocabSet {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains_key(term)
    }

    pub fn total(&self) -> usize {
        self.terms.values().sum()
    }
}

pub fn vocabulary(corpus: &Corpus) -> VocabSet {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for token in corpus.records().iter().flat_map(|r| &r.tokens) {
        *counts.entry(token.as_str()).or_default() += 1;
    }
    VocabSet {
        terms: counts
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    }
}
