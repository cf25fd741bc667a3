use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ClassifierSpec, LabeledDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub correct: usize,
    pub total: usize,
}

impl FoldResult {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub classifier: String,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    /// Held-out prediction for every row.
    pub predictions: Vec<usize>,
}

impl CvReport {
    pub fn correct(&self) -> usize {
        self.folds.iter().map(|f| f.correct).sum()
    }

    /// `classifier,fold,accuracy`, one line per fold.
    pub fn folds_csv(&self) -> String {
        let mut out = String::from("classifier,fold,accuracy\n");
        for (i, f) in self.folds.iter().enumerate() {
            let _ = writeln!(out, "{},{},{:?}", self.classifier, i + 1, f.accuracy());
        }
        out
    }

    /// Confusion matrix with true classes as rows.
    pub fn confusion_csv(&self, class_names: &[String]) -> String {
        let name = |c: usize| class_names.get(c).cloned().unwrap_or_else(|| c.to_string());
        let mut out = String::from("true\\predicted");
        for c in 0..self.confusion.len() {
            let _ = write!(out, ",{}", name(c));
        }
        out.push('\n');
        for (c, row) in self.confusion.iter().enumerate() {
            out.push_str(&name(c));
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, folds_path: &Path, confusion_path: &Path, class_names: &[String]) -> Result<()> {
        std::fs::write(folds_path, self.folds_csv()).map_err(|e| Error::io(folds_path, e))?;
        std::fs::write(confusion_path, self.confusion_csv(class_names))
            .map_err(|e| Error::io(confusion_path, e))
    }
}

/// Fold index of every row. Each class is shuffled with the seed and dealt
/// round-robin; the dealing position carries over from one class to the next.
pub fn stratified_folds(labels: &[usize], class_count: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..class_count {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add((fold as u64 + 1).wrapping_mul(0xA076_1D64_78BD_642F))
}

/// Stratified k-fold cross-validation. When a class has fewer rows than
/// `folds`, the fold count drops to the smallest class size.
pub fn cross_validate(data: &LabeledDataset, spec: &ClassifierSpec, folds: usize, seed: u64) -> Result<CvReport> {
    if folds < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least 2 folds".into()));
    }
    let counts = data.class_counts();
    let smallest = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
    if smallest < 2 {
        return Err(Error::InvalidArgument(
            "every class needs at least 2 rows for cross-validation".into(),
        ));
    }
    let folds = if smallest < folds {
        log::warn!("reducing {folds}-fold cross-validation to {smallest} folds (smallest class)");
        smallest
    } else {
        folds
    };
    let assignment = stratified_folds(&data.labels, data.class_count, folds, seed);

    let per_fold: Vec<Result<Vec<(usize, usize)>>> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| assignment[i] == fold);
            let model = spec.fit(&data.subset(&train), fold_seed(seed, fold))?;
            Ok(test.into_iter().map(|i| (i, model.predict(&data.features[i]))).collect())
        })
        .collect();

    let mut predictions = vec![0; data.len()];
    let mut confusion = vec![vec![0; data.class_count]; data.class_count];
    let mut fold_results = Vec::with_capacity(folds);
    for fold in per_fold {
        let fold = fold?;
        let mut correct = 0;
        for &(i, p) in &fold {
            predictions[i] = p;
            confusion[data.labels[i]][p] += 1;
            correct += usize::from(p == data.labels[i]);
        }
        fold_results.push(FoldResult {
            correct,
            total: fold.len(),
        });
    }
    let correct: usize = fold_results.iter().map(|f| f.correct).sum();
    Ok(CvReport {
        classifier: spec.label().to_string(),
        seed,
        folds: fold_results,
        accuracy: correct as f64 / data.len() as f64,
        confusion,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_folds_hold_one_per_class() {
        let labels: Vec<usize> = (0..80).map(|i| i / 10).collect();
        let a = stratified_folds(&labels, 8, 10, 3);
        for fold in 0..10 {
            let members: Vec<usize> = (0..80).filter(|&i| a[i] == fold).collect();
            assert_eq!(members.len(), 8);
            let mut classes: Vec<usize> = members.iter().map(|&i| labels[i]).collect();
            classes.sort_unstable();
            assert_eq!(classes, (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn constant_predictor_scores_chance() {
        // identical features make every NB posterior equal, so class 0 always wins
        let labels: Vec<usize> = (0..80).map(|i| i / 10).collect();
        let feats: Vec<Vec<f64>> = (0..80).map(|_| vec![0.0]).collect();
        let data = LabeledDataset::from_rows(feats, labels, 8).unwrap();
        let report = cross_validate(&data, &ClassifierSpec::NaiveBayes, 10, 1).unwrap();
        assert!(report.predictions.iter().all(|&p| p == 0));
        assert_eq!(report.accuracy, 0.125);
        let trace: usize = (0..8).map(|c| report.confusion[c][c]).sum();
        assert_eq!(trace as f64 / 80.0, report.accuracy);
    }

    #[test]
    fn too_few_folds_rejected() {
        let data = LabeledDataset::from_rows(vec![vec![0.0], vec![1.0]], vec![0, 0], 1).unwrap();
        assert!(cross_validate(&data, &ClassifierSpec::Knn { k: 1 }, 1, 0).is_err());
    }

    #[test]
    fn folds_reduced_for_small_classes() {
        let feats: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let data = LabeledDataset::from_rows(feats, vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let r = cross_validate(&data, &ClassifierSpec::Knn { k: 1 }, 10, 0).unwrap();
        assert_eq!(r.folds.len(), 3);
        let rows: Vec<usize> = r.confusion.iter().map(|row| row.iter().sum()).collect();
        assert_eq!(rows, vec![3, 3]);
    }
}
