//! Human-rating ingestion and the rating-vs-metric analysis.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{likert_top2, mann_whitney_u, spearman, SampleVec, TestResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanRatingRow {
    pub sentence_id: String,
    pub rater_id: String,
    pub grammar: u8,
    pub make_sense: u8,
    pub domain_rel: u8,
    pub general: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Grammar,
    MakeSense,
    DomainRel,
    General,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Grammar,
        Dimension::MakeSense,
        Dimension::DomainRel,
        Dimension::General,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Dimension::Grammar => "grammar",
            Dimension::MakeSense => "make_sense",
            Dimension::DomainRel => "domain_rel",
            Dimension::General => "general",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl HumanRatingRow {
    pub fn rating(&self, dim: Dimension) -> u8 {
        match dim {
            Dimension::Grammar => self.grammar,
            Dimension::MakeSense => self.make_sense,
            Dimension::DomainRel => self.domain_rel,
            Dimension::General => self.general,
        }
    }
}

const RATING_COLUMNS: [&str; 6] = [
    "sentence_id",
    "rater_id",
    "grammar",
    "make_sense",
    "domain_rel",
    "general",
];

pub fn load_ratings(path: &Path) -> Result<Vec<HumanRatingRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ratings(file)
}

/// Parses a ratings CSV with header
/// `sentence_id,rater_id,grammar,make_sense,domain_rel,general` (any column
/// order, extra columns ignored).
pub fn parse_ratings(input: impl Read) -> Result<Vec<HumanRatingRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let index: Vec<usize> = RATING_COLUMNS
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h.trim() == *c)
                .ok_or_else(|| Error::MissingColumn(c.to_string()))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record?;
        let row = n + 1;
        let cell = |i: usize| record.get(index[i]).unwrap_or("").trim();
        let rating = |i: usize| -> Result<u8> {
            let column = RATING_COLUMNS[i];
            let value: i64 = cell(i).parse().map_err(|_| {
                Error::parse(format!(
                    "row {row}: `{}` in column `{column}` is not an integer",
                    cell(i)
                ))
            })?;
            if !(1..=5).contains(&value) {
                return Err(Error::RatingOutOfRange {
                    row,
                    column: column.to_string(),
                    value,
                });
            }
            Ok(value as u8)
        };
        rows.push(HumanRatingRow {
            sentence_id: cell(0).to_string(),
            rater_id: cell(1).to_string(),
            grammar: rating(2)?,
            make_sense: rating(3)?,
            domain_rel: rating(4)?,
            general: rating(5)?,
        });
    }
    Ok(rows)
}

/// Per-sentence metric values with the group (corpus) each sentence came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricScores {
    pub metrics: Vec<String>,
    /// sentence id -> (group, one value per metric; `None` where not available).
    pub rows: BTreeMap<String, (String, Vec<Option<f64>>)>,
}

impl MetricScores {
    pub fn group_of(&self, sentence_id: &str) -> Option<&str> {
        self.rows.get(sentence_id).map(|(g, _)| g.as_str())
    }
}

pub fn load_metric_scores(path: &Path) -> Result<MetricScores> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_metric_scores(file)
}

/// Parses a CSV whose first two columns are `sentence_id,group`, followed by
/// any number of numeric metric columns. Empty or `NA` cells are missing.
pub fn parse_metric_scores(input: impl Read) -> Result<MetricScores> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("sentence_id") {
        return Err(Error::MissingColumn("sentence_id".into()));
    }
    if headers.get(1) != Some("group") {
        return Err(Error::MissingColumn("group".into()));
    }
    let metrics: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut rows = BTreeMap::new();
    for (n, record) in reader.records().enumerate() {
        let record = record?;
        let id = record.get(0).unwrap_or("").to_string();
        let group = record.get(1).unwrap_or("").to_string();
        let values = (0..metrics.len())
            .map(|i| {
                let cell = record.get(i + 2).unwrap_or("").trim();
                if cell.is_empty() || cell == "NA" {
                    return Ok(None);
                }
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Some(v)),
                    _ => Err(Error::parse(format!(
                        "row {}: `{cell}` in column `{}` is not a finite number",
                        n + 1,
                        metrics[i]
                    ))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.insert(id.clone(), (group, values)).is_some() {
            return Err(Error::parse(format!("duplicate sentence_id `{id}`")));
        }
    }
    Ok(MetricScores { metrics, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LikertMode {
    /// Top-2 share over individual ratings.
    #[default]
    PerRating,
    /// Top-2 share over sentences, each scored by its mean rating (>= 4).
    PerSentenceMean,
}

impl FromStr for LikertMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-rating" => Ok(LikertMode::PerRating),
            "per-sentence-mean" => Ok(LikertMode::PerSentenceMean),
            _ => Err(Error::InvalidArgument(format!(
                "likert mode must be `per-rating` or `per-sentence-mean`, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikertRow {
    pub group: String,
    pub ratings: usize,
    pub grammar: f64,
    pub make_sense: f64,
    pub domain_rel: f64,
    pub general: f64,
}

fn grouped<'a>(
    ratings: &'a [HumanRatingRow],
    scores: &MetricScores,
) -> Result<BTreeMap<String, Vec<&'a HumanRatingRow>>> {
    let mut groups: BTreeMap<String, Vec<&HumanRatingRow>> = BTreeMap::new();
    for r in ratings {
        let group = scores.group_of(&r.sentence_id).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "rated sentence `{}` has no entry in the metric scores",
                r.sentence_id
            ))
        })?;
        groups.entry(group.to_string()).or_default().push(r);
    }
    Ok(groups)
}

fn sentence_means(rows: &[&HumanRatingRow], dim: Dimension) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(r.sentence_id.clone()).or_default();
        e.0 += f64::from(r.rating(dim));
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(k, (sum, n))| (k, sum / n as f64))
        .collect()
}

fn top2(rows: &[&HumanRatingRow], dim: Dimension, mode: LikertMode) -> Result<f64> {
    match mode {
        LikertMode::PerRating => {
            let values: Vec<i64> = rows.iter().map(|r| i64::from(r.rating(dim))).collect();
            likert_top2(&values)
        }
        LikertMode::PerSentenceMean => {
            let means = sentence_means(rows, dim);
            if means.is_empty() {
                return Err(Error::InvalidArgument("no ratings".into()));
            }
            let top = means.values().filter(|m| **m >= 4.0).count();
            Ok(100.0 * top as f64 / means.len() as f64)
        }
    }
}

/// Likert top-2 percentages per group, groups in name order.
pub fn likert_table(
    ratings: &[HumanRatingRow],
    scores: &MetricScores,
    mode: LikertMode,
) -> Result<Vec<LikertRow>> {
    grouped(ratings, scores)?
        .into_iter()
        .map(|(group, rows)| {
            Ok(LikertRow {
                ratings: rows.len(),
                grammar: top2(&rows, Dimension::Grammar, mode)?,
                make_sense: top2(&rows, Dimension::MakeSense, mode)?,
                domain_rel: top2(&rows, Dimension::DomainRel, mode)?,
                general: top2(&rows, Dimension::General, mode)?,
                group,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub dimension: Dimension,
    pub group_a: String,
    pub group_b: String,
    #[serde(flatten)]
    pub result: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanReport {
    pub metric: String,
    pub n: usize,
    #[serde(flatten)]
    pub result: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanStats {
    pub likert_mode: LikertMode,
    pub likert_top2: Vec<LikertRow>,
    pub mann_whitney: Vec<GroupComparison>,
    pub spearman: Option<SpearmanReport>,
}

/// Likert table, pairwise Mann-Whitney tests between groups on every
/// dimension, and the Spearman correlation between each sentence's mean
/// `general` rating and `metric` (defaults to the first metric column).
pub fn human_stats(
    ratings: &[HumanRatingRow],
    scores: &MetricScores,
    mode: LikertMode,
    metric: Option<&str>,
) -> Result<HumanStats> {
    if ratings.is_empty() {
        return Err(Error::InvalidArgument("no ratings".into()));
    }
    let likert = likert_table(ratings, scores, mode)?;
    let groups = grouped(ratings, scores)?;
    let names: Vec<&String> = groups.keys().collect();
    let mut comparisons = Vec::new();
    for dim in Dimension::ALL {
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                let sample = |g: &str| {
                    SampleVec::new(groups[g].iter().map(|r| f64::from(r.rating(dim))).collect())
                };
                comparisons.push(GroupComparison {
                    dimension: dim,
                    group_a: a.to_string(),
                    group_b: b.to_string(),
                    result: mann_whitney_u(&sample(a)?, &sample(b)?)?,
                });
            }
        }
    }
    let metric = metric.or(scores.metrics.first().map(String::as_str));
    let spearman = match metric {
        None => None,
        Some(name) => {
            let column = scores
                .metrics
                .iter()
                .position(|m| m == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
            let all: Vec<&HumanRatingRow> = ratings.iter().collect();
            let (mut general, mut values) = (Vec::new(), Vec::new());
            for (id, mean) in sentence_means(&all, Dimension::General) {
                if let Some(Some(v)) = scores.rows.get(&id).map(|(_, vals)| vals[column]) {
                    general.push(mean);
                    values.push(v);
                }
            }
            let n = general.len();
            let result = spearman(&SampleVec::new(general)?, &SampleVec::new(values)?)?;
            Some(SpearmanReport {
                metric: name.to_string(),
                n,
                result,
            })
        }
    };
    Ok(HumanStats {
        likert_mode: mode,
        likert_top2: likert,
        mann_whitney: comparisons,
        spearman,
    })
}
