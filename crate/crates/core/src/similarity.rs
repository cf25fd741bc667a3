//! Rank-overlap similarity between documents.
//!
//! For one metric, a document is summarized by its top `n` words, ranked
//! `n` (most extreme value) down to `1`. Two documents are compared by the
//! sum, over the words present in both profiles, of the product of their
//! ranks. A full profile compared with itself always scores
//! `n(n+1)(2n+1)/6`; distances are one minus the score over that constant.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{Metric, NodeMetricTable, RankOrder};

pub const DEFAULT_PROFILE_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankOptions {
    pub order: RankOrder,
    /// Words below this frequency are not ranked for intermittency. Values
    /// under 2 have no effect since intermittency needs two occurrences.
    pub min_frequency: usize,
}

impl RankOptions {
    pub fn for_metric(metric: Metric) -> Self {
        Self {
            order: metric.default_order(),
            min_frequency: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankProfile {
    pub document_id: String,
    pub metric: Metric,
    /// Nominal profile size.
    pub n: usize,
    /// Words in rank order: `words[0]` holds rank `n`.
    words: Vec<String>,
    ranks: HashMap<String, u64>,
}

impl RankProfile {
    /// Builds a profile from words listed most-relevant first.
    pub fn from_ranked_words(
        document_id: impl Into<String>,
        metric: Metric,
        n: usize,
        words: Vec<String>,
    ) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("profile size must be at least 1".into()));
        }
        if words.len() > n {
            return Err(Error::InvalidArgument(format!(
                "{} words exceed profile size {n}",
                words.len()
            )));
        }
        let mut ranks = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if ranks.insert(w.clone(), (n - i) as u64).is_some() {
                return Err(Error::DuplicateId(w.clone()));
            }
        }
        Ok(Self {
            document_id: document_id.into(),
            metric,
            n,
            words,
            ranks,
        })
    }

    pub fn rank(&self, word: &str) -> Option<u64> {
        self.ranks.get(word).copied()
    }

    /// `(word, rank)` from rank `n` downward.
    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.words
            .iter()
            .enumerate()
            .map(move |(i, w)| (w.as_str(), (self.n - i) as u64))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Fewer than `n` eligible words were available.
    pub fn is_short(&self) -> bool {
        self.words.len() < self.n
    }
}

/// Self-similarity of a full profile of size `n`.
pub fn profile_norm(n: usize) -> u64 {
    let n = n as u64;
    n * (n + 1) * (2 * n + 1) / 6
}

pub fn rank_profile(table: &NodeMetricTable, metric: Metric, n: usize) -> Result<RankProfile> {
    rank_profile_with(table, metric, n, RankOptions::for_metric(metric))
}

/// Ranks the words of `table` by `metric`. Words with an undefined value are
/// skipped. Equal values are ordered by higher frequency, then by lemma.
pub fn rank_profile_with(
    table: &NodeMetricTable,
    metric: Metric,
    n: usize,
    opts: RankOptions,
) -> Result<RankProfile> {
    if n < 1 {
        return Err(Error::InvalidArgument("profile size must be at least 1".into()));
    }
    let mut eligible: Vec<(f64, usize, &str)> = table
        .rows
        .iter()
        .filter(|r| metric != Metric::Intermittency || r.frequency >= opts.min_frequency)
        .filter_map(|r| metric.value(r).map(|v| (v, r.frequency, r.lemma.as_str())))
        .collect();
    eligible.sort_by(|a, b| {
        relevance_cmp(opts.order, a.0, b.0)
            .then_with(|| b.1.cmp(&a.1))
            .then_with(|| a.2.cmp(b.2))
    });
    let words = eligible
        .into_iter()
        .take(n)
        .map(|(_, _, w)| w.to_string())
        .collect();
    RankProfile::from_ranked_words(table.document_id.clone(), metric, n, words)
}

fn check_compatible(a: &RankProfile, b: &RankProfile) -> Result<()> {
    if a.metric != b.metric {
        return Err(Error::Mismatch(format!(
            "profiles use different metrics ({} vs {})",
            a.metric, b.metric
        )));
    }
    if a.n != b.n {
        return Err(Error::Mismatch(format!(
            "profiles have different sizes ({} vs {})",
            a.n, b.n
        )));
    }
    Ok(())
}

/// Integer rank-product similarity.
pub fn similarity_exact(a: &RankProfile, b: &RankProfile) -> Result<u64> {
    check_compatible(a, b)?;
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    Ok(small
        .entries()
        .filter_map(|(w, r)| large.rank(w).map(|s| r * s))
        .sum())
}

pub fn similarity(a: &RankProfile, b: &RankProfile) -> Result<f64> {
    similarity_exact(a, b).map(|s| s as f64)
}

pub fn distance(a: &RankProfile, b: &RankProfile) -> Result<f64> {
    let s = similarity_exact(a, b)?;
    Ok(1.0 - s as f64 / profile_norm(a.n) as f64)
}

/// Symmetric matrix of pairwise document distances, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub document_ids: Vec<String>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix and checks symmetry, zero diagonal and range.
    pub fn new(document_ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let m = document_ids.len();
        if values.len() != m * m {
            return Err(Error::Mismatch(format!(
                "{} values for {m} documents",
                values.len()
            )));
        }
        let d = Self {
            document_ids,
            values,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn from_fn(document_ids: Vec<String>, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let m = document_ids.len();
        let upper: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|i| (i + 1..m).map(|j| f(i, j)).collect())
            .collect();
        let mut values = vec![0.0; m * m];
        for (i, row) in upper.into_iter().enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                let j = i + 1 + k;
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        Self {
            document_ids,
            values,
        }
    }

    #[cfg(test)]
    pub(crate) fn from_raw_unchecked(document_ids: Vec<String>, values: Vec<f64>) -> Self {
        Self {
            document_ids,
            values,
        }
    }

    pub fn size(&self) -> usize {
        self.document_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.size();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.size();
        let mut seen = HashSet::new();
        for id in &self.document_ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        for i in 0..m {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in 0..m {
                let v = self.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "distance {v} at ({i}, {j}) outside [0, 1]"
                    )));
                }
                if v != self.get(j, i) {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV whose first row and column carry the document ids. Values use the
    /// shortest representation that parses back to the identical `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("document_id");
        for id in &self.document_ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (i, id) in self.document_ids.iter().enumerate() {
            out.push_str(id);
            for v in self.row(i) {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::parse(path, 1, "empty file"))?;
        let ids: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
        let mut values = Vec::with_capacity(ids.len() * ids.len());
        for (i, line) in lines.enumerate() {
            let mut cols = line.split(',');
            if cols.next() != ids.get(i).map(String::as_str) {
                return Err(Error::parse(path, i + 2, "row id does not match header"));
            }
            for c in cols {
                values.push(
                    c.parse::<f64>()
                        .map_err(|_| Error::parse(path, i + 2, "bad distance value"))?,
                );
            }
        }
        DistanceMatrix::new(ids, values).map_err(|e| Error::parse(path, 1, e.to_string()))
    }
}

/// Pairwise distances between profiles of one metric. The diagonal is zero
/// even for short profiles, whose raw self-distance is positive.
pub fn distance_matrix(profiles: &[RankProfile]) -> Result<DistanceMatrix> {
    if let Some(first) = profiles.first() {
        for p in profiles {
            check_compatible(first, p)?;
        }
    }
    let ids: Vec<String> = profiles.iter().map(|p| p.document_id.clone()).collect();
    let mut seen = HashSet::new();
    for id in &ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(DistanceMatrix::from_fn(ids, |i, j| {
        distance(&profiles[i], &profiles[j]).unwrap_or(1.0)
    }))
}

/// Order helper shared with plot export: most relevant first.
pub(crate) fn relevance_cmp(order: RankOrder, a: f64, b: f64) -> Ordering {
    match order {
        RankOrder::Highest => b.total_cmp(&a),
        RankOrder::Lowest => a.total_cmp(&b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::NodeMetrics;

    fn table(rows: &[(&str, usize, usize, Option<f64>)]) -> NodeMetricTable {
        NodeMetricTable {
            document_id: "d".into(),
            rows: rows
                .iter()
                .map(|&(l, f, k, asp)| NodeMetrics {
                    lemma: l.into(),
                    frequency: f,
                    degree: k,
                    avg_shortest_path: asp,
                    betweenness: 0.0,
                    intermittency: None,
                })
                .collect(),
        }
    }

    fn profile(id: &str, n: usize, words: &[&str]) -> RankProfile {
        RankProfile::from_ranked_words(
            id,
            Metric::Degree,
            n,
            words.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn degree_ranks_descending() {
        let t = table(&[("a", 1, 5, None), ("b", 1, 3, None), ("c", 1, 1, None)]);
        let p = rank_profile(&t, Metric::Degree, 3).unwrap();
        assert_eq!(p.entries().collect::<Vec<_>>(), vec![("a", 3), ("b", 2), ("c", 1)]);
    }

    #[test]
    fn path_ranks_ascending_truncated() {
        let t = table(&[("a", 1, 0, Some(1.2)), ("b", 1, 0, Some(3.0)), ("c", 1, 0, Some(2.0))]);
        let p = rank_profile(&t, Metric::AvgShortestPath, 2).unwrap();
        assert_eq!(p.entries().collect::<Vec<_>>(), vec![("a", 2), ("c", 1)]);
    }

    #[test]
    fn undefined_values_skipped_and_short_profiles_keep_top_ranks() {
        let t = table(&[("a", 1, 0, None), ("b", 1, 0, Some(2.0))]);
        let p = rank_profile(&t, Metric::AvgShortestPath, 5).unwrap();
        assert_eq!(p.entries().collect::<Vec<_>>(), vec![("b", 5)]);
        assert!(p.is_short());
    }

    #[test]
    fn ties_by_frequency_then_lemma() {
        let t = table(&[("z", 1, 2, None), ("y", 9, 2, None), ("a", 1, 2, None)]);
        let p = rank_profile(&t, Metric::Degree, 3).unwrap();
        let words: Vec<&str> = p.entries().map(|(w, _)| w).collect();
        assert_eq!(words, vec!["y", "a", "z"]);
    }

    #[test]
    fn min_frequency_for_intermittency() {
        let mut t = table(&[("a", 2, 0, None), ("b", 5, 0, None)]);
        t.rows[0].intermittency = Some(0.1);
        t.rows[1].intermittency = Some(0.5);
        let opts = RankOptions { order: RankOrder::Lowest, min_frequency: 3 };
        let p = rank_profile_with(&t, Metric::Intermittency, 2, opts).unwrap();
        assert_eq!(p.entries().collect::<Vec<_>>(), vec![("b", 2)]);
    }

    #[test]
    fn zero_size_rejected() {
        let t = table(&[("a", 1, 1, None)]);
        assert!(rank_profile(&t, Metric::Degree, 0).is_err());
    }

    #[test]
    fn similarity_examples() {
        let a = profile("a", 3, &["x", "y", "z"]);
        let b = profile("b", 3, &["y", "x", "w"]);
        assert_eq!(similarity(&a, &b).unwrap(), 12.0);
        assert!((distance(&a, &b).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(distance(&a, &a).unwrap(), 0.0);

        let full: Vec<String> = (0..100).map(|i| format!("w{i}")).collect();
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let p = profile("p", 100, &refs);
        assert_eq!(similarity(&p, &p).unwrap(), 338350.0);

        let c = profile("c", 3, &["q", "r", "s"]);
        assert_eq!(similarity(&a, &c).unwrap(), 0.0);
        assert_eq!(distance(&a, &c).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_profiles() {
        let a = profile("a", 3, &["x"]);
        let b = profile("b", 4, &["x"]);
        assert!(matches!(similarity(&a, &b), Err(Error::Mismatch(_))));
        let mut c = profile("c", 3, &["x"]);
        c.metric = Metric::Betweenness;
        assert!(matches!(distance(&a, &c), Err(Error::Mismatch(_))));
        assert!(distance_matrix(&[a, c]).is_err());
    }

    #[test]
    fn matrices() {
        let a = profile("a", 2, &["x", "y"]);
        let b = profile("b", 2, &["p", "q"]);
        let d = distance_matrix(&[a.clone(), b]).unwrap();
        assert_eq!(d.values(), &[0.0, 1.0, 1.0, 0.0]);
        let same = distance_matrix(&[a.clone(), profile("a2", 2, &["x", "y"])]).unwrap();
        assert!(same.is_all_zero());
        assert!(matches!(distance_matrix(&[a.clone(), a]), Err(Error::DuplicateId(_))));
    }

    #[test]
    fn matrix_csv_roundtrip_and_validation() {
        let d = DistanceMatrix::from_fn(vec!["a".into(), "b".into(), "c".into()], |i, j| {
            ((i + j) as f64 / 7.0).min(1.0)
        });
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("dist_degree.csv");
        d.write_csv(&p).unwrap();
        assert_eq!(DistanceMatrix::read_csv(&p).unwrap(), d);
        assert!(DistanceMatrix::new(vec!["a".into(), "b".into()], vec![0.0, 0.2, 0.3, 0.0]).is_err());
        assert!(DistanceMatrix::new(vec!["a".into()], vec![0.5]).is_err());
    }
}
