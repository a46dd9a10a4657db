//! Two-sample significance tests, rank correlation and Likert summaries.

mod ratings;

pub use ratings::{
    human_stats, likert_table, load_metric_scores, load_ratings, parse_metric_scores,
    parse_ratings, Dimension, GroupComparison, HumanRatingRow, HumanStats, LikertMode, LikertRow,
    MetricScores, SpearmanReport,
};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// A non-empty sample of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVec(Vec<f64>);

impl SampleVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("sample is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample value {bad} is not finite"
            )));
        }
        Ok(SampleVec(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Unbiased sample variance.
    fn variance(&self) -> f64 {
        let m = self.mean();
        self.0.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (self.0.len() - 1) as f64
    }
}

impl TryFrom<Vec<f64>> for SampleVec {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        SampleVec::new(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: String,
    pub statistic: f64,
    pub p_two_sided: f64,
}

fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

fn normal_two_sided(z: f64) -> f64 {
    let dist = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * dist.sf(z.abs())).clamp(0.0, 1.0)
}

/// Welch's unequal-variance t-test; the statistic's sign follows `mean(a) - mean(b)`.
pub fn welch_t_test(a: &SampleVec, b: &SampleVec) -> Result<TestResult> {
    check_t_sizes(a, b)?;
    let (va, vb) = (a.variance() / a.len() as f64, b.variance() / b.len() as f64);
    let diff = a.mean() - b.mean();
    let method = "welch-t".to_string();
    if va + vb == 0.0 {
        return Ok(degenerate_t(method, diff));
    }
    let t = diff / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    Ok(TestResult {
        method,
        statistic: t,
        p_two_sided: student_t_two_sided(t, df),
    })
}

/// Student's t-test with pooled variance.
pub fn pooled_t_test(a: &SampleVec, b: &SampleVec) -> Result<TestResult> {
    check_t_sizes(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * a.variance() + (nb - 1.0) * b.variance()) / df;
    let diff = a.mean() - b.mean();
    let method = "pooled-t".to_string();
    if pooled == 0.0 {
        return Ok(degenerate_t(method, diff));
    }
    let t = diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    Ok(TestResult {
        method,
        statistic: t,
        p_two_sided: student_t_two_sided(t, df),
    })
}

fn check_t_sizes(a: &SampleVec, b: &SampleVec) -> Result<()> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument(
            "t-test needs at least two values per sample".into(),
        ));
    }
    Ok(())
}

// Zero variance on both sides: equal means are indistinguishable (p = 1),
// different means are perfectly separated (p = 0).
fn degenerate_t(method: String, diff: f64) -> TestResult {
    if diff == 0.0 {
        TestResult {
            method,
            statistic: 0.0,
            p_two_sided: 1.0,
        }
    } else {
        TestResult {
            method,
            statistic: diff.signum() * f64::INFINITY,
            p_two_sided: 0.0,
        }
    }
}

/// Ranks starting at 1, ties sharing their mean rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

const EXACT_LIMIT: usize = 12;

/// Mann-Whitney U test. The statistic is `U` for sample `a`.
///
/// Small untied samples (`|a| + |b| <= 12`) get an exact p-value by
/// enumerating every assignment of ranks; otherwise a normal approximation
/// with tie and continuity corrections is used.
pub fn mann_whitney_u(a: &SampleVec, b: &SampleVec) -> Result<TestResult> {
    let (na, nb) = (a.len(), b.len());
    let pooled: Vec<f64> = a.values().iter().chain(b.values()).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u_a = rank_sum_a - (na * (na + 1)) as f64 / 2.0;
    let n = na + nb;
    let mean_u = (na * nb) as f64 / 2.0;
    let tied = ranks.iter().any(|r| r.fract() != 0.0) || has_ties(&pooled);

    if n <= EXACT_LIMIT && !tied {
        return Ok(TestResult {
            method: "mann-whitney-exact".into(),
            statistic: u_a,
            p_two_sided: exact_u_p(na, nb, u_a),
        });
    }

    let tie_term: f64 = tie_group_sizes(&pooled)
        .into_iter()
        .map(|t| (t * t * t - t) as f64)
        .sum();
    let (nf, naf, nbf) = (n as f64, na as f64, nb as f64);
    let variance = naf * nbf / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    let p = if variance <= 0.0 {
        1.0
    } else {
        let z = ((u_a - mean_u).abs() - 0.5).max(0.0) / variance.sqrt();
        normal_two_sided(z)
    };
    Ok(TestResult {
        method: "mann-whitney-normal".into(),
        statistic: u_a,
        p_two_sided: p,
    })
}

fn has_ties(values: &[f64]) -> bool {
    tie_group_sizes(values).into_iter().any(|t| t > 1)
}

fn tie_group_sizes(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        sizes.push(j - i);
        i = j;
    }
    sizes
}

/// Probability, over all `C(na + nb, na)` equally likely rank sets of `a`,
/// of a `U` at least as far from its mean as `u_obs`.
fn exact_u_p(na: usize, nb: usize, u_obs: f64) -> f64 {
    let n = na + nb;
    let max_u = na * nb;
    // counts[u] = number of rank subsets of size na with statistic u.
    let mut counts = vec![0u64; max_u + 1];
    let offset = na * (na + 1) / 2;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let rank_sum: usize = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).sum();
        counts[rank_sum - offset] += 1;
    }
    let total: u64 = counts.iter().sum();
    let mean = max_u as f64 / 2.0;
    let observed = (u_obs - mean).abs();
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|(u, _)| (*u as f64 - mean).abs() >= observed)
        .map(|(_, c)| c)
        .sum();
    extreme as f64 / total as f64
}

/// Spearman rank correlation with a t-approximation p-value (`n - 2` df).
pub fn spearman(a: &SampleVec, b: &SampleVec) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "spearman needs paired samples, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::InvalidArgument(
            "spearman needs at least three pairs".into(),
        ));
    }
    let rho = pearson(&midranks(a.values()), &midranks(b.values()))?;
    let df = (a.len() - 2) as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        student_t_two_sided(rho * (df / (1.0 - rho * rho)).sqrt(), df)
    };
    Ok(TestResult {
        method: "spearman".into(),
        statistic: rho,
        p_two_sided: p,
    })
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument(
            "correlation undefined: a sample has zero rank variance".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Percentage of ratings equal to 4 or 5.
pub fn likert_top2(ratings: &[i64]) -> Result<f64> {
    if ratings.is_empty() {
        return Err(Error::InvalidArgument("no ratings".into()));
    }
    if let Some(bad) = ratings.iter().find(|r| !(1..=5).contains(*r)) {
        return Err(Error::InvalidArgument(format!(
            "rating {bad} is outside 1..=5"
        )));
    }
    let top = ratings.iter().filter(|r| **r >= 4).count();
    Ok(100.0 * top as f64 / ratings.len() as f64)
}
