use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{squared_distance, LabeledDataset, Model};
use crate::error::{Error, Result};

pub const KMEANS_ITERATIONS: usize = 100;
/// Independent k-means++ initializations; the lowest-inertia run is kept.
pub const KMEANS_RESTARTS: usize = 10;
pub const RIDGE: f64 = 1e-8;
pub const MIN_WIDTH: f64 = 1e-8;

/// Radial basis function network: Gaussian units placed by k-means and a
/// ridge-regularized linear read-out onto one-hot class targets.
#[derive(Debug, Clone)]
pub struct RbfnModel {
    centers: Vec<Vec<f64>>,
    widths: Vec<f64>,
    /// `(clusters + 1) x classes`; the last row is the bias.
    weights: DMatrix<f64>,
}

fn kmeans_pp(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![rows[rng.random_range(0..rows.len())].clone()];
    let mut closest: Vec<f64> = rows.iter().map(|r| squared_distance(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = closest.len() - 1;
            for (i, &d) in closest.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            while closest[chosen] == 0.0 && chosen > 0 {
                chosen -= 1;
            }
            chosen
        } else {
            rng.random_range(0..rows.len())
        };
        let c = rows[pick].clone();
        for (d, r) in closest.iter_mut().zip(rows) {
            *d = d.min(squared_distance(r, &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(centers: &[Vec<f64>], row: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = squared_distance(c, row);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Lloyd iterations from `centers`. Empty clusters keep their center.
fn lloyd(rows: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, f64) {
    let width = rows[0].len();
    let mut assignment = vec![usize::MAX; rows.len()];
    for _ in 0..KMEANS_ITERATIONS {
        let mut changed = false;
        for (a, r) in assignment.iter_mut().zip(rows) {
            let (c, _) = nearest(&centers, r);
            changed |= *a != c;
            *a = c;
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; width]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (&a, r) in assignment.iter().zip(rows) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(r) {
                *s += v;
            }
        }
        for ((c, s), &n) in centers.iter_mut().zip(sums).zip(&counts) {
            if n > 0 {
                *c = s.into_iter().map(|v| v / n as f64).collect();
            }
        }
    }
    let inertia = rows.iter().map(|r| nearest(&centers, r).1).sum();
    (centers, inertia)
}

pub fn rbfn(train: &LabeledDataset, clusters: usize, seed: u64) -> Result<RbfnModel> {
    if clusters < 1 {
        return Err(Error::InvalidArgument("at least one cluster is required".into()));
    }
    if clusters > train.len() {
        return Err(Error::InvalidArgument(format!(
            "{clusters} clusters for {} training rows",
            train.len()
        )));
    }
    let rows = &train.features;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<Vec<f64>>, f64)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let run = lloyd(rows, kmeans_pp(rows, clusters, &mut rng));
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    let centers = best.map(|b| b.0).unwrap_or_default();

    let widths: Vec<f64> = if centers.len() > 1 {
        centers
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let sum: f64 = centers
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, o)| squared_distance(c, o).sqrt())
                    .sum();
                (sum / (centers.len() - 1) as f64).max(MIN_WIDTH)
            })
            .collect()
    } else {
        // a lone unit takes the mean distance of the training rows to it
        let mean = rows.iter().map(|r| squared_distance(r, &centers[0]).sqrt()).sum::<f64>() / rows.len() as f64;
        vec![mean.max(MIN_WIDTH)]
    };

    let mut model = RbfnModel {
        centers,
        widths,
        weights: DMatrix::zeros(0, 0),
    };
    let phi = DMatrix::from_fn(rows.len(), clusters + 1, |i, j| {
        if j == clusters {
            1.0
        } else {
            model.activation(j, &rows[i])
        }
    });
    let targets = DMatrix::from_fn(rows.len(), train.class_count, |i, c| {
        if train.labels[i] == c {
            1.0
        } else {
            0.0
        }
    });
    model.weights = ridge_solve(phi, &targets)?;
    Ok(model)
}

/// `argmin |A W - Y|^2 + ridge |W|^2` via the SVD of `A`.
fn ridge_solve(a: DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = a.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD did not produce singular vectors".into())),
    };
    let shrink = svd.singular_values.map(|s| s / (s * s + RIDGE));
    let uty = u.transpose() * y;
    let scaled = DMatrix::from_fn(uty.nrows(), uty.ncols(), |i, j| uty[(i, j)] * shrink[i]);
    let w = v_t.transpose() * scaled;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("RBF output weights are not finite".into()));
    }
    Ok(w)
}

impl RbfnModel {
    fn activation(&self, unit: usize, row: &[f64]) -> f64 {
        let w = self.widths[unit];
        (-squared_distance(row, &self.centers[unit]) / (2.0 * w * w)).exp()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn outputs(&self, row: &[f64]) -> Vec<f64> {
        let k = self.centers.len();
        (0..self.weights.ncols())
            .map(|c| {
                (0..k)
                    .map(|j| self.activation(j, row) * self.weights[(j, c)])
                    .sum::<f64>()
                    + self.weights[(k, c)]
            })
            .collect()
    }
}

impl Model for RbfnModel {
    fn predict(&self, row: &[f64]) -> usize {
        let out = self.outputs(row);
        let mut best = 0;
        for (c, v) in out.iter().enumerate() {
            if *v > out[best] {
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
    fn interpolates_with_one_center_per_point() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64 * 0.37).sin(), i as f64 * 0.1]).collect();
        let labels: Vec<usize> = (0..12).map(|i| (i * 5) % 3).collect();
        let train = LabeledDataset::from_rows(rows.clone(), labels.clone(), 3).unwrap();
        let m = rbfn(&train, 12, 4).unwrap();
        for (r, l) in rows.iter().zip(&labels) {
            assert_eq!(m.predict(r), *l);
        }
    }

    #[test]
    fn two_clusters() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            let j = i as f64 * 0.01;
            rows.push(vec![j, -j]);
            labels.push(0);
            rows.push(vec![5.0 + j, 5.0 - j]);
            labels.push(1);
        }
        let train = LabeledDataset::from_rows(rows, labels, 2).unwrap();
        let m = rbfn(&train, 2, 1).unwrap();
        assert_eq!(m.predict(&[0.2, 0.1]), 0);
        assert_eq!(m.predict(&[4.8, 5.3]), 1);
    }

    #[test]
    fn deterministic_and_errors() {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64, (i * i) as f64 % 7.0]).collect();
        let labels = vec![0, 1, 2, 0, 1, 2, 0, 1, 2];
        let train = LabeledDataset::from_rows(rows, labels, 3).unwrap();
        let a = rbfn(&train, 3, 9).unwrap();
        let b = rbfn(&train, 3, 9).unwrap();
        assert_eq!(a.centers(), b.centers());
        assert_eq!(a.outputs(&[2.5, 1.0]), b.outputs(&[2.5, 1.0]));
        assert!(rbfn(&train, 10, 9).is_err());
        assert!(rbfn(&train, 0, 9).is_err());
        assert!(rbfn(&train, 1, 9).is_ok());
    }
}
