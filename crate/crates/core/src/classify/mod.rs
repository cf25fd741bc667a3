//! Supervised classifiers and stratified cross-validation.
//!
//! All classifiers are re-implemented from their textbook definitions:
//! a C4.5-style gain-ratio tree, k-nearest neighbors, Gaussian naive Bayes and
//! a radial basis function network. Every model is a pure function of its
//! training data, hyperparameters and seed.

mod cv;
mod knn;
mod naive_bayes;
mod rbfn;
mod tree;

use std::fmt;
use std::str::FromStr;

pub use cv::{cross_validate, stratified_folds, CvReport, FoldResult};
pub use knn::{knn_classify, KnnModel};
pub use naive_bayes::{naive_bayes, NaiveBayesModel};
pub use rbfn::{rbfn, RbfnModel};
pub use tree::{decision_tree, DecisionTree};

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_CLUSTERS: usize = 8;
pub const DEFAULT_FOLDS: usize = 10;

/// Feature rows with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub document_ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl LabeledDataset {
    pub fn new(
        document_ids: Vec<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        let m = features.len();
        if document_ids.len() != m || labels.len() != m {
            return Err(Error::Mismatch(format!(
                "{} ids, {m} feature rows, {} labels",
                document_ids.len(),
                labels.len()
            )));
        }
        if m < class_count {
            return Err(Error::InvalidArgument(format!(
                "{m} rows cannot cover {class_count} classes"
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::InvalidArgument(format!(
                "label {l} out of range for {class_count} classes"
            )));
        }
        let width = features.first().map_or(0, Vec::len);
        for (i, row) in features.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Mismatch(format!("row {i} has {} features, expected {width}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("row {i} has a non-finite feature")));
            }
        }
        Ok(Self {
            document_ids,
            features,
            labels,
            class_count,
        })
    }

    /// Dataset with generated ids `0, 1, ...`.
    pub fn from_rows(features: Vec<Vec<f64>>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let ids = (0..features.len()).map(|i| i.to_string()).collect();
        Self::new(ids, features, labels, class_count)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, keeping the class count.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            document_ids: indices.iter().map(|&i| self.document_ids[i].clone()).collect(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
        }
    }
}

pub trait Model: Send + Sync {
    fn predict(&self, row: &[f64]) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierSpec {
    DecisionTree,
    Knn { k: usize },
    NaiveBayes,
    Rbfn { clusters: usize },
}

impl ClassifierSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ClassifierSpec::DecisionTree => "j48",
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::NaiveBayes => "nb",
            ClassifierSpec::Rbfn { .. } => "rbfn",
        }
    }

    pub fn fit(&self, train: &LabeledDataset, seed: u64) -> Result<Box<dyn Model>> {
        Ok(match *self {
            ClassifierSpec::DecisionTree => Box::new(decision_tree(train)?),
            ClassifierSpec::Knn { k } => Box::new(KnnModel::fit(train, k)?),
            ClassifierSpec::NaiveBayes => Box::new(naive_bayes(train)?),
            ClassifierSpec::Rbfn { clusters } => Box::new(rbfn(train, clusters, seed)?),
        })
    }

    /// The four classifiers with default hyperparameters.
    pub fn defaults() -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::DecisionTree,
            ClassifierSpec::Knn { k: DEFAULT_K },
            ClassifierSpec::NaiveBayes,
            ClassifierSpec::Rbfn { clusters: DEFAULT_CLUSTERS },
        ]
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    /// Parses a label; hyperparameters take their defaults.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "j48" | "tree" => Ok(ClassifierSpec::DecisionTree),
            "knn" => Ok(ClassifierSpec::Knn { k: DEFAULT_K }),
            "nb" => Ok(ClassifierSpec::NaiveBayes),
            "rbfn" => Ok(ClassifierSpec::Rbfn { clusters: DEFAULT_CLUSTERS }),
            other => Err(Error::InvalidArgument(format!("unknown classifier \"{other}\""))),
        }
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the largest count; ties go to the lowest index.
pub(crate) fn argmax_count(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}
