use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{CharacterizationRow, Report, SentenceScores, UniqueCell, UniquenessCurve};
use crate::error::{Error, Result};
use crate::setscore::SetSimilarityScores;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::InvalidArgument(format!(
                "report format must be json, markdown or csv, got `{s}`"
            ))),
        }
    }
}

const NA: &str = "NA";

fn fixed(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |v| format!("{v:.4}"))
}

fn unique_md(u: UniqueCell) -> String {
    match u {
        UniqueCell::Count(n) => n.to_string(),
        UniqueCell::Fraction(f) => format!("{:.2}%", f * 100.0),
    }
}

fn unique_csv(u: UniqueCell) -> String {
    match u {
        UniqueCell::Count(n) => n.to_string(),
        UniqueCell::Fraction(f) => format!("{f:.4}"),
    }
}

fn scores(s: Option<SetSimilarityScores>) -> [String; 3] {
    [
        fixed(s.map(|s| s.precision)),
        fixed(s.map(|s| s.recall)),
        fixed(s.map(|s| s.f1)),
    ]
}

fn cells(row: &CharacterizationRow, unique: fn(UniqueCell) -> String) -> Vec<String> {
    let mut out = vec![
        row.corpus.clone(),
        unique(row.unique),
        row.vocab.to_string(),
        fixed(row.grammar),
        fixed(row.plausibility),
    ];
    out.extend(scores(row.semantic));
    out.extend(scores(row.syntactic));
    out
}

/// The table grid, NA where a cell does not apply.
pub fn render_markdown(rows: &[CharacterizationRow]) -> String {
    let mut s = String::new();
    s.push_str("| Corpus | Unique | Vocab | Grammar | Plausibility | Semantic P | Semantic R | Semantic F1 | Syntactic P | Syntactic R | Syntactic F1 |\n");
    s.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    for row in rows {
        let _ = writeln!(s, "| {} |", cells(row, unique_md).join(" | "));
    }
    s
}

pub fn render_csv(rows: &[CharacterizationRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "corpus",
        "unique",
        "vocab",
        "grammar",
        "plausibility",
        "semantic_p",
        "semantic_r",
        "semantic_f1",
        "syntactic_p",
        "syntactic_r",
        "syntactic_f1",
    ])?;
    for row in rows {
        w.write_record(cells(row, unique_csv))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_report(report: &Report, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Markdown => render_markdown(&report.rows),
        ReportFormat::Csv => render_csv(&report.rows)?,
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Columns `sentence_id,group,grammar,plausibility,semantic,syntactic`, empty
/// cells where a value does not apply; readable as metric scores.
pub fn write_sentence_scores_csv(scores: &[SentenceScores], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sentence_id",
        "group",
        "grammar",
        "plausibility",
        "semantic",
        "syntactic",
    ])?;
    for s in scores {
        w.write_record([
            s.sentence_id.clone(),
            s.group.clone(),
            opt(s.grammar),
            opt(s.plausibility),
            opt(s.semantic),
            opt(s.syntactic),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<sentence scores>", e))
}

pub fn write_curves_csv(curves: &[UniquenessCurve], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["corpus", "n", "unique_count", "fraction"])?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.corpus.clone(),
                p.n.to_string(),
                p.unique_count.to_string(),
                p.fraction.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<curves>", e))
}
