use super::{squared_distance, LabeledDataset, Model};
use crate::error::{Error, Result};

/// Euclidean k-nearest-neighbor vote.
///
/// Neighbors at equal distance are taken in row order. When several classes
/// tie for the most votes, the class of the nearest neighbor among them wins.
#[derive(Debug, Clone)]
pub struct KnnModel {
    train: LabeledDataset,
    k: usize,
}

impl KnnModel {
    pub fn fit(train: &LabeledDataset, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if train.is_empty() {
            return Err(Error::InvalidArgument("empty training set".into()));
        }
        Ok(Self {
            train: train.clone(),
            k,
        })
    }
}

impl Model for KnnModel {
    fn predict(&self, row: &[f64]) -> usize {
        let mut order: Vec<(f64, usize)> = self
            .train
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| (squared_distance(f, row), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &order[..self.k.min(order.len())];

        let mut votes = vec![0usize; self.train.class_count];
        for &(_, i) in nearest {
            votes[self.train.labels[i]] += 1;
        }
        let top = votes.iter().copied().max().unwrap_or(0);
        nearest
            .iter()
            .map(|&(_, i)| self.train.labels[i])
            .find(|&l| votes[l] == top)
            .unwrap_or(0)
    }
}

pub fn knn_classify(train: &LabeledDataset, query: &[f64], k: usize) -> Result<usize> {
    Ok(KnnModel::fit(train, k)?.predict(query))
}
