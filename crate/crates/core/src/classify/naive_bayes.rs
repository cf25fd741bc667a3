use super::{LabeledDataset, Model};
use crate::error::{Error, Result};

/// Relative variance floor: class variances never drop below this fraction
/// of the feature's variance over the whole training set.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with class priors from training frequencies.
#[derive(Debug, Clone)]
pub struct NaiveBayesModel {
    log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

pub fn naive_bayes(train: &LabeledDataset) -> Result<NaiveBayesModel> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let counts = train.class_counts();
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::InvalidArgument(format!("class {c} has no training samples")));
    }
    let width = train.width();
    let global_var: Vec<f64> = (0..width)
        .map(|f| mean_var(train.features.iter().map(|r| r[f])).1)
        .collect();
    let fallback = VARIANCE_FLOOR * global_var.iter().copied().fold(0.0, f64::max);
    let floors: Vec<f64> = global_var
        .iter()
        .map(|&v| {
            let floor = VARIANCE_FLOOR * v;
            if floor > 0.0 {
                floor
            } else if fallback > 0.0 {
                fallback
            } else {
                VARIANCE_FLOOR
            }
        })
        .collect();

    let m = train.len() as f64;
    let mut log_priors = Vec::with_capacity(train.class_count);
    let mut means = Vec::with_capacity(train.class_count);
    let mut variances = Vec::with_capacity(train.class_count);
    for (class, &count) in counts.iter().enumerate() {
        log_priors.push((count as f64 / m).ln());
        let rows = || {
            train
                .features
                .iter()
                .zip(&train.labels)
                .filter(move |(_, &l)| l == class)
                .map(|(r, _)| r)
        };
        let (mu, var): (Vec<f64>, Vec<f64>) = (0..width)
            .map(|f| {
                let (mu, var) = mean_var(rows().map(|r| r[f]));
                (mu, var.max(floors[f]))
            })
            .unzip();
        means.push(mu);
        variances.push(var);
    }
    Ok(NaiveBayesModel {
        log_priors,
        means,
        variances,
    })
}

impl NaiveBayesModel {
    /// Unnormalized log posterior of every class.
    pub fn log_scores(&self, row: &[f64]) -> Vec<f64> {
        (0..self.log_priors.len())
            .map(|c| {
                self.log_priors[c]
                    + row
                        .iter()
                        .zip(&self.means[c])
                        .zip(&self.variances[c])
                        .map(|((x, mu), var)| {
                            -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (x - mu).powi(2) / var)
                        })
                        .sum::<f64>()
            })
            .collect()
    }
}

impl Model for NaiveBayesModel {
    fn predict(&self, row: &[f64]) -> usize {
        let scores = self.log_scores(row);
        let mut best = 0;
        for (c, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = c;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_boundary() {
        let train = LabeledDataset::from_rows(
            vec![vec![-3.0], vec![-1.0], vec![1.0], vec![3.0]],
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap();
        let m = naive_bayes(&train).unwrap();
        assert_eq!(m.predict(&[-0.01]), 0);
        assert_eq!(m.predict(&[0.01]), 1);
        let s = m.log_scores(&[0.0]);
        assert!((s[0] - s[1]).abs() < 1e-12);
    }

    #[test]
    fn single_class() {
        let train = LabeledDataset::from_rows(vec![vec![1.0], vec![2.0]], vec![0, 0], 1).unwrap();
        let m = naive_bayes(&train).unwrap();
        assert_eq!(m.predict(&[1e6]), 0);
    }

    #[test]
    fn constant_feature_is_floored() {
        let train = LabeledDataset::from_rows(
            vec![vec![1.0, 0.0], vec![1.0, 0.1], vec![1.0, 5.0], vec![1.0, 5.1]],
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap();
        let m = naive_bayes(&train).unwrap();
        assert_eq!(m.predict(&[1.0, 0.05]), 0);
        assert_eq!(m.predict(&[1.0, 5.0]), 1);
        assert!(m.log_scores(&[1.0, 0.0]).iter().all(|s| s.is_finite()));
    }

    #[test]
    fn empty_class_rejected() {
        let train = LabeledDataset::from_rows(vec![vec![1.0], vec![2.0]], vec![0, 0], 2).unwrap();
        assert!(naive_bayes(&train).is_err());
    }
}
