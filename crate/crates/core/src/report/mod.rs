//! The characterization table: one row per corpus, with train and test
//! baseline rows first, followed by per-sentence score dumps and uniqueness
//! curves for the generated corpora.

mod render;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use render::{
    render_csv, render_markdown, write_curves_csv, write_report, write_sentence_scores_csv,
    ReportFormat,
};

use crate::config::RunConfig;
use crate::corpus::{vocabulary, Corpus};
use crate::error::{Error, Result};
use crate::fluency::{grammar_scores, plausibility_scores, LanguageModel, Proofreader};
use crate::quantity::{
    distinct_sentences, unique_fraction, uniqueness_curve, vocab_gain, UniquenessResult,
};
use crate::semantic::{best_cosines, embed_corpus, Embedding, EmbeddingBackend};
use crate::setscore::{mean, SetSimilarityScores};
use crate::syntactic::best_syn_sims;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UniqueCell {
    /// Distinct sentences in a baseline corpus.
    Count(u64),
    /// Fraction of generated sentences that are unique.
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationRow {
    pub corpus: String,
    pub unique: UniqueCell,
    pub vocab: u64,
    pub grammar: Option<f64>,
    pub plausibility: Option<f64>,
    pub semantic: Option<SetSimilarityScores>,
    pub syntactic: Option<SetSimilarityScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<CharacterizationRow>,
    pub config: RunConfig,
    pub tool_version: String,
}

impl Report {
    pub fn new(rows: Vec<CharacterizationRow>, config: RunConfig) -> Self {
        Report {
            rows,
            config,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Per-sentence values behind a row's means; `None` where the row is NA or
/// the sentence was not sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScores {
    pub sentence_id: String,
    pub group: String,
    pub grammar: Option<f64>,
    pub plausibility: Option<f64>,
    pub semantic: Option<f64>,
    pub syntactic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCurve {
    pub corpus: String,
    pub points: Vec<UniquenessResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    pub rows: Vec<CharacterizationRow>,
    pub sentence_scores: Vec<SentenceScores>,
    pub curves: Vec<UniquenessCurve>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportOptions {
    /// Evaluate set similarities on a uniform sample of this many generated
    /// sentences.
    pub sample_g: Option<usize>,
    pub sample_seed: u64,
    /// Prefix sizes for the uniqueness curves; sizes above a corpus's length
    /// are skipped and its full length is always included.
    pub checkpoints: Vec<usize>,
}

impl From<&RunConfig> for ReportOptions {
    fn from(c: &RunConfig) -> Self {
        ReportOptions {
            sample_g: c.sample_g,
            sample_seed: c.sample_seed,
            checkpoints: c.checkpoints.clone(),
        }
    }
}

pub struct Backends<'a> {
    pub embedder: &'a dyn EmbeddingBackend,
    pub proofreader: Option<&'a dyn Proofreader>,
    pub language_model: &'a dyn LanguageModel,
}

/// Sorted indices of the generated sentences that enter the set similarities.
pub fn sample_indices(len: usize, sample: Option<usize>, seed: u64) -> Vec<usize> {
    match sample {
        Some(n) if n < len => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, len, n).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..len).collect(),
    }
}

fn sentence_id(corpus: &Corpus, id: usize) -> String {
    format!("{}:{id}", corpus.name)
}

struct Dump<'c> {
    corpus: &'c Corpus,
    grammar: Option<Vec<f64>>,
    plausibility: Option<Vec<f64>>,
    semantic: Option<Vec<Option<f64>>>,
    syntactic: Option<Vec<Option<f64>>>,
}

impl<'c> Dump<'c> {
    fn rows(self) -> impl Iterator<Item = SentenceScores> + 'c {
        let Dump {
            corpus,
            grammar,
            plausibility,
            semantic,
            syntactic,
        } = self;
        (0..corpus.len()).map(move |i| SentenceScores {
            sentence_id: sentence_id(corpus, corpus.records()[i].id),
            group: corpus.name.clone(),
            grammar: grammar.as_ref().map(|v| v[i]),
            plausibility: plausibility.as_ref().map(|v| v[i]),
            semantic: semantic.as_ref().and_then(|v| v[i]),
            syntactic: syntactic.as_ref().and_then(|v| v[i]),
        })
    }
}

fn all(values: Vec<f64>) -> Option<Vec<Option<f64>>> {
    Some(values.into_iter().map(Some).collect())
}

fn grammar(corpus: &Corpus, backends: &Backends) -> Result<Option<Vec<f64>>> {
    backends
        .proofreader
        .map(|p| {
            Ok(grammar_scores(corpus, p)?
                .into_iter()
                .map(|s| s.score)
                .collect())
        })
        .transpose()
}

fn plausibility(corpus: &Corpus, backends: &Backends) -> Result<Vec<f64>> {
    Ok(plausibility_scores(corpus, backends.language_model)?
        .into_iter()
        .map(|s| s.perplexity)
        .collect())
}

fn embed(corpus: &Corpus, backends: &Backends) -> Result<Vec<Embedding>> {
    embed_corpus(corpus, backends.embedder).map_err(|e| e.in_metric("semantic", &corpus.name, None))
}

fn cosines(left: &[Embedding], right: &[Embedding], corpus: &Corpus) -> Result<Vec<f64>> {
    best_cosines(left, right).map_err(|e| e.in_metric("semantic", &corpus.name, None))
}

fn syn_sims(left: &Corpus, right: &Corpus) -> Result<Vec<f64>> {
    best_syn_sims(left, right).map_err(|e| e.in_metric("syntactic", &left.name, None))
}

fn mean_opt(values: &Option<Vec<f64>>) -> Option<f64> {
    values.as_deref().map(mean)
}

/// Builds the characterization table.
///
/// Train row: distinct-sentence count, distinct-term count, semantic scores
/// against test. Test row: distinct-sentence count, vocabulary gain over
/// train, plausibility, syntactic scores against train. Generated rows:
/// unique fraction and vocabulary gain against train, fluency means,
/// semantic scores against test and syntactic scores against train.
pub fn assemble_report(
    train: &Corpus,
    test: &Corpus,
    generated: &[Corpus],
    options: &ReportOptions,
    backends: &Backends,
) -> Result<Characterization> {
    for c in [train, test].into_iter().chain(generated) {
        if c.is_empty() {
            return Err(Error::EmptyCorpus(c.name.clone()));
        }
    }
    let train_emb = embed(train, backends)?;
    let test_emb = embed(test, backends)?;

    let mut rows = Vec::with_capacity(generated.len() + 2);
    let mut dumps = Vec::with_capacity(generated.len() + 2);

    let train_grammar = grammar(train, backends)?;
    let train_sem = cosines(&train_emb, &test_emb, train)?;
    let test_sem = cosines(&test_emb, &train_emb, test)?;
    rows.push(CharacterizationRow {
        corpus: train.name.clone(),
        unique: UniqueCell::Count(distinct_sentences(train) as u64),
        vocab: vocabulary(train).len() as u64,
        grammar: mean_opt(&train_grammar),
        plausibility: None,
        semantic: Some(SetSimilarityScores::new(mean(&train_sem), mean(&test_sem))),
        syntactic: None,
    });
    dumps.push(Dump {
        corpus: train,
        grammar: train_grammar,
        plausibility: None,
        semantic: all(train_sem),
        syntactic: None,
    });

    let test_grammar = grammar(test, backends)?;
    let test_plaus = plausibility(test, backends)?;
    let test_syn = syn_sims(test, train)?;
    let train_syn = syn_sims(train, test)?;
    rows.push(CharacterizationRow {
        corpus: test.name.clone(),
        unique: UniqueCell::Count(distinct_sentences(test) as u64),
        vocab: vocab_gain(test, train).new_terms as u64,
        grammar: mean_opt(&test_grammar),
        plausibility: Some(mean(&test_plaus)),
        semantic: None,
        syntactic: Some(SetSimilarityScores::new(mean(&test_syn), mean(&train_syn))),
    });
    dumps.push(Dump {
        corpus: test,
        grammar: test_grammar,
        plausibility: Some(test_plaus),
        semantic: None,
        syntactic: all(test_syn),
    });

    let mut curves = Vec::with_capacity(generated.len());
    for g in generated {
        let mut checkpoints: Vec<usize> = options
            .checkpoints
            .iter()
            .copied()
            .filter(|&c| c < g.len())
            .collect();
        checkpoints.push(g.len());
        let points = uniqueness_curve(g, train, &checkpoints)
            .map_err(|e| e.in_metric("quantity", &g.name, None))?;
        let unique =
            unique_fraction(g, train).map_err(|e| e.in_metric("quantity", &g.name, None))?;
        curves.push(UniquenessCurve {
            corpus: g.name.clone(),
            points,
        });

        let g_grammar = grammar(g, backends)?;
        let g_plaus = plausibility(g, backends)?;

        let picked = sample_indices(g.len(), options.sample_g, options.sample_seed);
        let sampled = if picked.len() == g.len() {
            g.clone()
        } else {
            g.select(&picked, g.name.clone(), g.role)
        };
        let g_emb = embed(&sampled, backends)?;
        let g_sem = cosines(&g_emb, &test_emb, g)?;
        let test_to_g = cosines(&test_emb, &g_emb, g)?;
        let g_syn = syn_sims(&sampled, train)?;
        let train_to_g = syn_sims(train, &sampled)?;

        rows.push(CharacterizationRow {
            corpus: g.name.clone(),
            unique: UniqueCell::Fraction(unique.fraction),
            vocab: vocab_gain(g, train).new_terms as u64,
            grammar: mean_opt(&g_grammar),
            plausibility: Some(mean(&g_plaus)),
            semantic: Some(SetSimilarityScores::new(mean(&g_sem), mean(&test_to_g))),
            syntactic: Some(SetSimilarityScores::new(mean(&g_syn), mean(&train_to_g))),
        });

        let mut semantic = vec![None; g.len()];
        let mut syntactic = vec![None; g.len()];
        for (k, &i) in picked.iter().enumerate() {
            semantic[i] = Some(g_sem[k]);
            syntactic[i] = Some(g_syn[k]);
        }
        dumps.push(Dump {
            corpus: g,
            grammar: g_grammar,
            plausibility: Some(g_plaus),
            semantic: Some(semantic),
            syntactic: Some(syntactic),
        });
    }

    Ok(Characterization {
        rows,
        sentence_scores: dumps.into_iter().flat_map(Dump::rows).collect(),
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Role;
    use crate::fluency::NGramModel;
    use crate::quantity::unique_fraction;
    use crate::semantic::{semantic_set_scores, FeatureHashEmbedder};
    use crate::syntactic::syntactic_set_scores;

    struct Fixed(usize);

    impl Proofreader for Fixed {
        fn id(&self) -> String {
            "fixed".into()
        }
        fn count_errors(&self, _raw: &str) -> Result<usize> {
            Ok(self.0)
        }
    }

    fn corpus(name: &str, role: Role, s: &[&str]) -> Corpus {
        Corpus::from_sentences(name, role, s.iter().copied())
    }

    fn fixture() -> (Corpus, Corpus, Corpus) {
        (
            corpus(
                "train",
                Role::Train,
                &[
                    "the cat sat",
                    "a dog ran",
                    "the cat sat",
                    "birds sing loudly",
                ],
            ),
            corpus("test", Role::Test, &["the dog sat", "fish swim"]),
            corpus(
                "gen",
                Role::Generated,
                &["the cat sat", "a fish ran", "a fish ran", "new words here"],
            ),
        )
    }

    #[test]
    fn identical_corpora_are_fully_similar_and_never_unique() {
        let s = ["one two", "three four five"];
        let (a, b, c) = (
            corpus("train", Role::Train, &s),
            corpus("test", Role::Test, &s),
            corpus("gen", Role::Generated, &s),
        );
        let lm = NGramModel::train(&a, 2, 0.1).unwrap();
        let emb = FeatureHashEmbedder::default();
        let backends = Backends {
            embedder: &emb,
            proofreader: None,
            language_model: &lm,
        };
        let out = assemble_report(
            &a,
            &b,
            std::slice::from_ref(&c),
            &ReportOptions::default(),
            &backends,
        )
        .unwrap();
        let g = &out.rows[2];
        assert_eq!(g.unique, UniqueCell::Fraction(0.0));
        assert_eq!(g.vocab, 0);
        for scores in [
            g.semantic.unwrap(),
            g.syntactic.unwrap(),
            out.rows[0].semantic.unwrap(),
            out.rows[1].syntactic.unwrap(),
        ] {
            assert_eq!(scores, SetSimilarityScores::new(1.0, 1.0));
        }
    }

    #[test]
    fn cells_match_module_operations() {
        let (train, test, gen) = fixture();
        let lm = NGramModel::train(&train, 3, 0.1).unwrap();
        let emb = FeatureHashEmbedder::default();
        let proof = Fixed(1);
        let backends = Backends {
            embedder: &emb,
            proofreader: Some(&proof),
            language_model: &lm,
        };
        let out = assemble_report(
            &train,
            &test,
            std::slice::from_ref(&gen),
            &ReportOptions::default(),
            &backends,
        )
        .unwrap();
        let [tr, te, g] = &out.rows[..] else {
            panic!("three rows")
        };

        assert_eq!(tr.unique, UniqueCell::Count(3));
        assert_eq!(tr.vocab, 9);
        assert_eq!(tr.plausibility, None);
        assert_eq!(tr.syntactic, None);
        assert_eq!(
            tr.semantic,
            Some(semantic_set_scores(&train, &test, &emb).unwrap())
        );
        assert_eq!(
            tr.grammar,
            Some(crate::fluency::corpus_grammar(&train, &proof).unwrap())
        );
        assert_eq!(tr.grammar, Some(1.0 / 3.0));

        assert_eq!(te.unique, UniqueCell::Count(2));
        assert_eq!(te.vocab, 2);
        assert_eq!(te.semantic, None);
        assert_eq!(
            te.syntactic,
            Some(syntactic_set_scores(&test, &train).unwrap())
        );
        assert_eq!(
            te.plausibility,
            Some(crate::fluency::corpus_plausibility(&test, &lm).unwrap())
        );

        assert_eq!(
            g.unique,
            UniqueCell::Fraction(unique_fraction(&gen, &train).unwrap().fraction)
        );
        assert_eq!(g.unique, UniqueCell::Fraction(0.25));
        assert_eq!(g.vocab, 4);
        assert_eq!(
            g.semantic,
            Some(semantic_set_scores(&gen, &test, &emb).unwrap())
        );
        assert_eq!(
            g.syntactic,
            Some(syntactic_set_scores(&gen, &train).unwrap())
        );

        assert_eq!(out.sentence_scores.len(), 10);
        assert_eq!(out.sentence_scores[0].sentence_id, "train:0");
        assert_eq!(out.sentence_scores[0].syntactic, None);
        assert_eq!(out.sentence_scores[6].group, "gen");
        assert_eq!(out.sentence_scores[6].syntactic, Some(1.0));
        assert_eq!(out.curves[0].points.last().unwrap().fraction, 0.25);
    }

    #[test]
    fn empty_generated_list_gives_baselines_only() {
        let (train, test, _) = fixture();
        let lm = NGramModel::train(&train, 3, 0.1).unwrap();
        let emb = FeatureHashEmbedder::default();
        let backends = Backends {
            embedder: &emb,
            proofreader: None,
            language_model: &lm,
        };
        let out =
            assemble_report(&train, &test, &[], &ReportOptions::default(), &backends).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert_eq!(out.rows[0].grammar, None);
        assert!(out.curves.is_empty());
    }

    #[test]
    fn sampling_is_seeded_and_recorded_per_sentence() {
        let (train, test, gen) = fixture();
        let lm = NGramModel::train(&train, 3, 0.1).unwrap();
        let emb = FeatureHashEmbedder::default();
        let backends = Backends {
            embedder: &emb,
            proofreader: None,
            language_model: &lm,
        };
        let options = ReportOptions {
            sample_g: Some(2),
            sample_seed: 7,
            checkpoints: vec![2, 100],
        };
        let a = assemble_report(
            &train,
            &test,
            std::slice::from_ref(&gen),
            &options,
            &backends,
        )
        .unwrap();
        let b = assemble_report(
            &train,
            &test,
            std::slice::from_ref(&gen),
            &options,
            &backends,
        )
        .unwrap();
        assert_eq!(a, b);
        let sampled = a
            .sentence_scores
            .iter()
            .filter(|s| s.group == "gen" && s.semantic.is_some())
            .count();
        assert_eq!(sampled, 2);
        let picked = sample_indices(4, Some(2), 7);
        let sub = gen.select(&picked, "gen", Role::Generated);
        assert_eq!(
            a.rows[2].semantic,
            Some(semantic_set_scores(&sub, &test, &emb).unwrap())
        );
        assert_eq!(
            a.curves[0].points.iter().map(|p| p.n).collect::<Vec<_>>(),
            vec![2, 4]
        );
        assert_eq!(sample_indices(3, Some(5), 1), vec![0, 1, 2]);
    }

    #[test]
    fn failures_carry_provenance() {
        let (train, test, gen) = fixture();
        let lm = NGramModel::train(&train, 3, 0.0).unwrap();
        let emb = FeatureHashEmbedder::default();
        let backends = Backends {
            embedder: &emb,
            proofreader: None,
            language_model: &lm,
        };
        let err = assemble_report(
            &train,
            &test,
            std::slice::from_ref(&gen),
            &ReportOptions::default(),
            &backends,
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::Metric { module: "plausibility", ref corpus, sentence: Some(0), .. } if corpus == "test")
        );
    }
}
