//! Word-level Levenshtein distance and the syntactic set scores.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SentenceRecord};
use crate::error::{Error, Result};
use crate::setscore::{best_matches, mean, Aggregation, SetSimilarityScores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditDistanceResult {
    pub distance: usize,
    pub len_a: usize,
    pub len_b: usize,
}

impl EditDistanceResult {
    /// `distance / max(len_a, len_b)`, 0 when both sequences are empty.
    pub fn normalized(&self) -> f64 {
        normalized_distance(self.distance, self.len_a.max(self.len_b))
    }
}

fn normalized_distance(distance: usize, max_len: usize) -> f64 {
    if max_len == 0 {
        0.0
    } else {
        distance as f64 / max_len as f64
    }
}

/// `[1 + d / max(|a|, |b|)]^-1`.
fn syn_sim_from_normalized(normalized: f64) -> f64 {
    1.0 / (1.0 + normalized)
}

/// Unit-cost Levenshtein distance over term sequences, using a single DP
/// row sized by the shorter input.
pub fn word_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> EditDistanceResult {
    EditDistanceResult {
        distance: levenshtein(a, b),
        len_a: a.len(),
        len_b: b.len(),
    }
}

fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, x) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in short.iter().enumerate() {
            let above = row[j + 1];
            let substitute = diag + usize::from(x != y);
            row[j + 1] = substitute.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynSimScore {
    pub value: f64,
}

pub fn syn_sim(s1: &SentenceRecord, s2: &SentenceRecord) -> SynSimScore {
    syn_sim_tokens(&s1.tokens, &s2.tokens)
}

pub fn syn_sim_tokens<T: PartialEq>(a: &[T], b: &[T]) -> SynSimScore {
    SynSimScore {
        value: syn_sim_from_normalized(word_edit_distance(a, b).normalized()),
    }
}

/// Term sequences of several corpora interned into one id space.
pub(crate) struct Interned {
    pub(crate) sequences: Vec<Vec<Vec<u32>>>,
}

impl Interned {
    pub(crate) fn new(corpora: &[&Corpus]) -> Self {
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let sequences = corpora
            .iter()
            .map(|c| {
                c.records()
                    .iter()
                    .map(|r| {
                        r.tokens
                            .iter()
                            .map(|t| {
                                let next = ids.len() as u32;
                                *ids.entry(t.as_str()).or_insert(next)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Interned { sequences }
    }
}

/// For each sequence of `left`, the smallest (or largest) normalized edit
/// distance to any sequence of `right`.
///
/// In `Max`-similarity mode candidates whose length gap alone already rules
/// them out are skipped; `|len_a - len_b|` is a lower bound on the distance,
/// so the result is identical to the exhaustive scan.
pub(crate) fn aggregate_normalized_distance(
    left: &[Vec<u32>],
    right: &[Vec<u32>],
    aggregation: Aggregation,
) -> Vec<f64> {
    best_matches(left.len(), |i| {
        let g = &left[i];
        match aggregation {
            Aggregation::Max => {
                let mut best = f64::INFINITY;
                for r in right {
                    let max_len = g.len().max(r.len());
                    let bound = normalized_distance(g.len().abs_diff(r.len()), max_len);
                    if bound >= best {
                        continue;
                    }
                    best = best.min(normalized_distance(levenshtein(g, r), max_len));
                    if best == 0.0 {
                        break;
                    }
                }
                best
            }
            Aggregation::Min => right
                .iter()
                .map(|r| normalized_distance(levenshtein(g, r), g.len().max(r.len())))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    })
}

/// For each record of `left`, its best SynSim to any record of `right`.
pub fn best_syn_sims(left: &Corpus, right: &Corpus) -> Result<Vec<f64>> {
    for c in [left, right] {
        if c.is_empty() {
            return Err(Error::EmptyCorpus(c.name.clone()));
        }
    }
    let interned = Interned::new(&[left, right]);
    Ok(aggregate_normalized_distance(
        &interned.sequences[0],
        &interned.sequences[1],
        Aggregation::Max,
    )
    .into_iter()
    .map(syn_sim_from_normalized)
    .collect())
}

/// Set precision/recall/F1 with SynSim against a reference set, usually the
/// train split.
pub fn syntactic_set_scores(generated: &Corpus, reference: &Corpus) -> Result<SetSimilarityScores> {
    let precision = mean(&best_syn_sims(generated, reference)?);
    let recall = mean(&best_syn_sims(reference, generated)?);
    Ok(SetSimilarityScores::new(precision, recall))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Role;
    use proptest::prelude::*;

    fn brute_force(a: &[u8], b: &[u8]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                let sub = brute_force(ra, rb) + usize::from(x != y);
                sub.min(brute_force(ra, b) + 1).min(brute_force(a, rb) + 1)
            }
        }
    }

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            word_edit_distance(&toks("a b c"), &toks("a b c")).distance,
            0
        );
        assert_eq!(
            word_edit_distance(&toks("a b c"), &toks("a b d")).distance,
            1
        );
        assert_eq!(word_edit_distance(&toks("a b"), &toks("c d e")).distance, 3);
        assert_eq!(word_edit_distance::<&str>(&[], &toks("c d e")).distance, 3);
        assert_eq!(word_edit_distance::<&str>(&[], &[]).distance, 0);
    }

    #[test]
    fn syn_sim_examples() {
        let r = |s: &str| SentenceRecord::new(0, s);
        assert_eq!(syn_sim(&r("Great phone"), &r("great phone!")).value, 1.0);
        assert_eq!(syn_sim(&r("a b c"), &r("a b d")).value, 0.75);
        assert_eq!(syn_sim(&r("a b"), &r("c d e")).value, 0.5);
        assert_eq!(syn_sim(&r(""), &r("")).value, 1.0);
        assert_eq!(syn_sim(&r(""), &r("x y")).value, 0.5);
    }

    fn corpus(s: &[&str]) -> Corpus {
        Corpus::from_sentences("c", Role::Train, s.iter().copied())
    }

    #[test]
    fn set_score_examples() {
        let c = corpus(&["a b c", "d e", "f"]);
        let s = syntactic_set_scores(&c, &c).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = syntactic_set_scores(&corpus(&["a b"]), &corpus(&["a b c"])).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.75, 0.75, 0.75));
        assert!(syntactic_set_scores(&corpus(&[]), &c).is_err());
    }

    fn exhaustive_min(left: &[Vec<u32>], right: &[Vec<u32>]) -> Vec<f64> {
        left.iter()
            .map(|g| {
                right
                    .iter()
                    .map(|r| normalized_distance(levenshtein(g, r), g.len().max(r.len())))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    fn seqs() -> impl Strategy<Value = Vec<Vec<u32>>> {
        proptest::collection::vec(proptest::collection::vec(0u32..4, 0..7), 1..8)
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in proptest::collection::vec(0u8..3, 0..6), b in proptest::collection::vec(0u8..3, 0..6)) {
            prop_assert_eq!(levenshtein(&a, &b), brute_force(&a, &b));
        }

        #[test]
        fn symmetric_and_bounded(a in proptest::collection::vec(0u8..4, 0..10), b in proptest::collection::vec(0u8..4, 0..10)) {
            let d = word_edit_distance(&a, &b);
            prop_assert_eq!(d.distance, word_edit_distance(&b, &a).distance);
            prop_assert!(d.distance <= a.len().max(b.len()));
            prop_assert!(d.distance >= a.len().abs_diff(b.len()));
            let s = syn_sim_tokens(&a, &b).value;
            prop_assert!((0.5..=1.0).contains(&s));
            prop_assert_eq!(s == 1.0, a == b);
        }

        #[test]
        fn triangle_inequality(a in proptest::collection::vec(0u8..3, 0..6), b in proptest::collection::vec(0u8..3, 0..6), c in proptest::collection::vec(0u8..3, 0..6)) {
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }

        #[test]
        fn pruned_scan_equals_exhaustive(left in seqs(), right in seqs()) {
            let pruned = aggregate_normalized_distance(&left, &right, Aggregation::Max);
            let full = exhaustive_min(&left, &right);
            prop_assert_eq!(
                pruned.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                full.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }

        #[test]
        fn set_score_duality(g in proptest::collection::vec("[a-c]( [a-c]){0,3}", 1..8), t in proptest::collection::vec("[a-c]( [a-c]){0,3}", 1..8)) {
            let gc = Corpus::from_sentences("g", Role::Generated, g);
            let tc = Corpus::from_sentences("t", Role::Train, t);
            let gt = syntactic_set_scores(&gc, &tc).unwrap();
            let tg = syntactic_set_scores(&tc, &gc).unwrap();
            prop_assert_eq!(gt.precision.to_bits(), tg.recall.to_bits());
        }
    }
}
