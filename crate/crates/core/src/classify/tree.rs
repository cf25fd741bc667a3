use super::{argmax_count, LabeledDataset, Model};
use crate::error::{Error, Result};

/// Binary decision tree on numeric thresholds, split by gain ratio.
///
/// Candidate thresholds are midpoints between consecutive distinct values of
/// each feature. A node becomes a leaf when it is pure, holds fewer than two
/// rows, or no split has positive information gain. No pruning.
#[derive(Debug, Clone, PartialEq)]
pub enum DecisionTree {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Rows with `value <= threshold`.
        left: Box<DecisionTree>,
        right: Box<DecisionTree>,
    },
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

struct Candidate {
    feature: usize,
    threshold: f64,
    ratio: f64,
}

fn best_split(data: &LabeledDataset, idx: &[usize]) -> Option<Candidate> {
    let n = idx.len();
    let mut total = vec![0usize; data.class_count];
    for &i in idx {
        total[data.labels[i]] += 1;
    }
    let base = entropy(&total, n);
    let mut best: Option<Candidate> = None;
    let mut sorted = idx.to_vec();
    for f in 0..data.width() {
        sorted.sort_by(|&a, &b| data.features[a][f].total_cmp(&data.features[b][f]).then(a.cmp(&b)));
        let mut left = vec![0usize; data.class_count];
        for pos in 0..n - 1 {
            left[data.labels[sorted[pos]]] += 1;
            let here = data.features[sorted[pos]][f];
            let next = data.features[sorted[pos + 1]][f];
            if here == next {
                continue;
            }
            let nl = pos + 1;
            let nr = n - nl;
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let cond = (nl as f64 * entropy(&left, nl) + nr as f64 * entropy(&right, nr)) / n as f64;
            let gain = base - cond;
            if gain <= 1e-12 {
                continue;
            }
            let split_info = entropy(&[nl, nr], n);
            let ratio = gain / split_info;
            if best.as_ref().is_none_or(|b| ratio > b.ratio) {
                best = Some(Candidate {
                    feature: f,
                    threshold: here + (next - here) / 2.0,
                    ratio,
                });
            }
        }
    }
    best
}

fn grow(data: &LabeledDataset, idx: &[usize]) -> DecisionTree {
    let mut counts = vec![0usize; data.class_count];
    for &i in idx {
        counts[data.labels[i]] += 1;
    }
    let majority = argmax_count(&counts);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || idx.len() < 2 {
        return DecisionTree::Leaf { class: majority };
    }
    match best_split(data, idx) {
        None => DecisionTree::Leaf { class: majority },
        Some(c) => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| data.features[i][c.feature] <= c.threshold);
            DecisionTree::Split {
                feature: c.feature,
                threshold: c.threshold,
                left: Box::new(grow(data, &l)),
                right: Box::new(grow(data, &r)),
            }
        }
    }
}

pub fn decision_tree(train: &LabeledDataset) -> Result<DecisionTree> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let idx: Vec<usize> = (0..train.len()).collect();
    Ok(grow(train, &idx))
}

impl DecisionTree {
    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf { .. } => 0,
            DecisionTree::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

impl Model for DecisionTree {
    fn predict(&self, row: &[f64]) -> usize {
        let mut node = self;
        loop {
            match node {
                DecisionTree::Leaf { class } => return *class,
                DecisionTree::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accuracy(t: &DecisionTree, d: &LabeledDataset) -> f64 {
        let ok = d.features.iter().zip(&d.labels).filter(|(r, l)| t.predict(r) == **l).count();
        ok as f64 / d.len() as f64
    }

    #[test]
    fn single_threshold() {
        let d = LabeledDataset::from_rows(
            vec![vec![1.0], vec![2.0], vec![3.0], vec![7.0], vec![8.0]],
            vec![0, 0, 0, 1, 1],
            2,
        )
        .unwrap();
        let t = decision_tree(&d).unwrap();
        assert_eq!(t.depth(), 1);
        assert!(matches!(t, DecisionTree::Split { threshold, .. } if threshold == 5.0));
        assert_eq!(accuracy(&t, &d), 1.0);
    }

    #[test]
    fn pure_input_is_leaf() {
        let d = LabeledDataset::from_rows(vec![vec![1.0], vec![9.0]], vec![1, 1], 2).unwrap();
        assert_eq!(decision_tree(&d).unwrap(), DecisionTree::Leaf { class: 1 });
    }

    #[test]
    fn skewed_xor_needs_depth_two() {
        // quadrant counts 3/1/1/1 give the first split positive gain
        let pts = [
            (0.0, 0.0, 0),
            (0.1, 0.1, 0),
            (0.2, 0.0, 0),
            (1.0, 1.0, 0),
            (0.0, 1.0, 1),
            (1.0, 0.0, 1),
        ];
        let d = LabeledDataset::from_rows(
            pts.iter().map(|p| vec![p.0, p.1]).collect(),
            pts.iter().map(|p| p.2).collect(),
            2,
        )
        .unwrap();
        let t = decision_tree(&d).unwrap();
        assert!(t.depth() >= 2);
        assert_eq!(accuracy(&t, &d), 1.0);
    }

    #[test]
    fn balanced_xor_has_no_positive_gain_split() {
        let d = LabeledDataset::from_rows(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap();
        assert_eq!(decision_tree(&d).unwrap(), DecisionTree::Leaf { class: 0 });
    }

    #[test]
    fn empty_rejected() {
        let d = LabeledDataset::from_rows(vec![], vec![], 0).unwrap();
        assert!(decision_tree(&d).is_err());
    }
}
