//! Per-sentence semantic/syntactic trade-off points and their density.
//!
//! Each generated sentence becomes a point whose x coordinate is its
//! similarity to the test set and whose y coordinate is its normalized word
//! edit distance to the train set. Sentences in the upper-right corner are
//! on-topic yet not copied.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::semantic::{aggregate_cosines, embed_corpus, EmbeddingBackend};
use crate::setscore::Aggregation;
use crate::syntactic::{aggregate_normalized_distance, Interned};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub sentence_id: usize,
    pub sem_to_test: f64,
    pub syn_novelty: f64,
}

/// Computes one point per generated sentence.
///
/// With [`Aggregation::Max`] the semantic axis is the best cosine to any test
/// sentence and the syntactic axis the distance to the closest train
/// sentence; [`Aggregation::Min`] takes the worst match on both axes.
pub fn compute_tradeoff(
    generated: &Corpus,
    test: &Corpus,
    train: &Corpus,
    backend: &dyn EmbeddingBackend,
    aggregation: Aggregation,
) -> Result<Vec<TradeoffPoint>> {
    for c in [generated, test, train] {
        if c.is_empty() {
            return Err(Error::EmptyCorpus(c.name.clone()));
        }
    }
    let g = embed_corpus(generated, backend)?;
    let t = embed_corpus(test, backend)?;
    let sem = aggregate_cosines(&g, &t, aggregation)?;
    let interned = Interned::new(&[generated, train]);
    let syn =
        aggregate_normalized_distance(&interned.sequences[0], &interned.sequences[1], aggregation);
    Ok(generated
        .records()
        .iter()
        .zip(sem.into_iter().zip(syn))
        .map(|(r, (sem_to_test, syn_novelty))| TradeoffPoint {
            sentence_id: r.id,
            sem_to_test,
            syn_novelty,
        })
        .collect())
}

/// Ids of points with `sem_to_test >= sem` and `syn_novelty >= syn`, ascending.
pub fn filter_upper_right(points: &[TradeoffPoint], sem: f64, syn: f64) -> Vec<usize> {
    let mut ids: Vec<usize> = points
        .iter()
        .filter(|p| p.sem_to_test >= sem && p.syn_novelty >= syn)
        .map(|p| p.sentence_id)
        .collect();
    ids.sort_unstable();
    ids
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `counts[x][y]`.
    pub counts: Vec<Vec<usize>>,
}

/// Uniform 2-D histogram over the observed range of each axis; the top bin
/// of each axis is closed on the right. An axis with a single observed value
/// is widened to `[v - 0.5, v + 0.5]`.
pub fn density_grid(points: &[TradeoffPoint], x_bins: usize, y_bins: usize) -> Result<DensityGrid> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points to bin".into()));
    }
    if x_bins == 0 || y_bins == 0 {
        return Err(Error::InvalidArgument(
            "bin counts must be at least 1".into(),
        ));
    }
    let x_edges = edges(points.iter().map(|p| p.sem_to_test), x_bins)?;
    let y_edges = edges(points.iter().map(|p| p.syn_novelty), y_bins)?;
    let mut counts = vec![vec![0usize; y_bins]; x_bins];
    for p in points {
        let x = bin(&x_edges, p.sem_to_test);
        let y = bin(&y_edges, p.syn_novelty);
        counts[x][y] += 1;
    }
    Ok(DensityGrid {
        x_edges,
        y_edges,
        counts,
    })
}

fn edges(values: impl Iterator<Item = f64>, bins: usize) -> Result<Vec<f64>> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "point coordinate {v} is not finite"
            )));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
    out.push(hi);
    Ok(out)
}

fn bin(edges: &[f64], v: f64) -> usize {
    let bins = edges.len() - 1;
    // Pick the last lower edge not above v; this respects the stored edges
    // exactly instead of recomputing them from the width.
    let idx = edges[..bins].partition_point(|&e| e <= v);
    idx.saturating_sub(1).min(bins - 1)
}

pub fn write_points_csv(points: &[TradeoffPoint], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sentence_id", "sem_to_test", "syn_novelty"])?;
    for p in points {
        w.write_record([
            p.sentence_id.to_string(),
            p.sem_to_test.to_string(),
            p.syn_novelty.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<points>", e))
}

/// One row per cell, keyed by the cell's lower edges.
pub fn write_grid_csv(grid: &DensityGrid, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_edge", "y_edge", "count"])?;
    for (x, column) in grid.counts.iter().enumerate() {
        for (y, count) in column.iter().enumerate() {
            w.write_record([
                grid.x_edges[x].to_string(),
                grid.y_edges[y].to_string(),
                count.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<grid>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Role;
    use crate::semantic::FeatureHashEmbedder;
    use proptest::prelude::*;

    fn corpus(role: Role, s: &[&str]) -> Corpus {
        Corpus::from_sentences(role.to_string(), role, s.iter().copied())
    }

    fn point(id: usize, sem: f64, syn: f64) -> TradeoffPoint {
        TradeoffPoint {
            sentence_id: id,
            sem_to_test: sem,
            syn_novelty: syn,
        }
    }

    #[test]
    fn hand_case_with_one_hot_backend() {
        let backend = crate::semantic::tests::OneHot::new(8);
        let pts = compute_tradeoff(
            &corpus(Role::Generated, &["a b"]),
            &corpus(Role::Test, &["a b"]),
            &corpus(Role::Train, &["a b c"]),
            &backend,
            Aggregation::Max,
        )
        .unwrap();
        assert_eq!(pts[0].sem_to_test, 1.0);
        assert_eq!(pts[0].syn_novelty, 1.0 / 3.0);
    }

    #[test]
    fn copies_and_test_matches() {
        let b = FeatureHashEmbedder::default();
        let pts = compute_tradeoff(
            &corpus(Role::Generated, &["the battery died", "Great phone!"]),
            &corpus(Role::Test, &["great phone", "slow shipping"]),
            &corpus(Role::Train, &["The battery died.", "fast shipping"]),
            &b,
            Aggregation::Max,
        )
        .unwrap();
        assert_eq!(pts[0].syn_novelty, 0.0);
        assert_eq!(pts[1].sem_to_test, 1.0);
        assert!(pts[1].syn_novelty > 0.0);
        assert!(compute_tradeoff(
            &corpus(Role::Generated, &[]),
            &corpus(Role::Test, &["x"]),
            &corpus(Role::Train, &["y"]),
            &b,
            Aggregation::Max
        )
        .is_err());
    }

    #[test]
    fn filter_examples() {
        let pts = [point(2, 0.9, 0.6), point(0, 0.4, 0.9), point(1, 0.7, 0.5)];
        assert_eq!(filter_upper_right(&pts, 0.0, 0.0), vec![0, 1, 2]);
        assert!(filter_upper_right(&pts, 1.01, 0.0).is_empty());
        assert_eq!(filter_upper_right(&pts, 0.5, 0.5), vec![1, 2]);
    }

    #[test]
    fn grid_examples() {
        let g = density_grid(&[point(0, 0.3, 0.3)], 1, 1).unwrap();
        assert_eq!(g.counts, vec![vec![1]]);
        assert_eq!(g.x_edges, vec![-0.2, 0.8]);
        let corners = [
            point(0, 0.0, 0.0),
            point(1, 1.0, 0.0),
            point(2, 0.0, 1.0),
            point(3, 1.0, 1.0),
        ];
        let g = density_grid(&corners, 2, 2).unwrap();
        assert_eq!(g.counts, vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(g.x_edges, vec![0.0, 0.5, 1.0]);
        assert!(density_grid(&[], 2, 2).is_err());
        assert!(density_grid(&corners, 0, 2).is_err());
    }

    #[test]
    fn csv_exports() {
        let mut buf = Vec::new();
        write_points_csv(&[point(0, 0.5, 0.25)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "sentence_id,sem_to_test,syn_novelty\n0,0.5,0.25\n"
        );
        let g = density_grid(&[point(0, 0.0, 0.0), point(1, 1.0, 1.0)], 2, 1).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&g, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x_edge,y_edge,count\n0,0,1\n0.5,0,1\n"
        );
    }

    fn points() -> impl Strategy<Value = Vec<TradeoffPoint>> {
        proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..60).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (a, b))| point(i, a, b))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn grid_conserves_mass(pts in points(), xb in 1usize..12, yb in 1usize..12) {
            let g = density_grid(&pts, xb, yb).unwrap();
            prop_assert_eq!(g.counts.iter().flatten().sum::<usize>(), pts.len());
            prop_assert!(g.x_edges.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(g.y_edges.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn filter_is_monotone(pts in points(), a in 0.0f64..1.0, b in 0.0f64..1.0, da in 0.0f64..0.5, db in 0.0f64..0.5) {
            let loose = filter_upper_right(&pts, a, b);
            let strict = filter_upper_right(&pts, a + da, b + db);
            prop_assert!(strict.iter().all(|id| loose.contains(id)));
        }

        #[test]
        fn reference_order_is_irrelevant(g in proptest::collection::vec("[a-c]( [a-c]){0,3}", 1..6), t in proptest::collection::vec("[a-c]( [a-c]){0,3}", 1..6), r in proptest::collection::vec("[a-c]( [a-c]){0,3}", 1..6)) {
            let b = FeatureHashEmbedder::new(16, 0).unwrap();
            let gc = Corpus::from_sentences("g", Role::Generated, g);
            let fwd = compute_tradeoff(&gc, &Corpus::from_sentences("t", Role::Test, t.clone()), &Corpus::from_sentences("r", Role::Train, r.clone()), &b, Aggregation::Max).unwrap();
            let (mut t2, mut r2) = (t, r);
            t2.reverse();
            r2.reverse();
            let rev = compute_tradeoff(&gc, &Corpus::from_sentences("t", Role::Test, t2), &Corpus::from_sentences("r", Role::Train, r2), &b, Aggregation::Max).unwrap();
            prop_assert_eq!(fwd, rev);
        }
    }
}
