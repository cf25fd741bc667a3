//! Metric multidimensional scaling.
//!
//! Configurations are fitted by iterative majorization (SMACOF) of the raw
//! stress `sum_{i<j} (delta_ij - d_ij)^2` and reported with Kruskal's
//! stress-1, `sqrt(sum (delta_ij - d_ij)^2 / sum d_ij^2)`, where `delta` are the
//! input distances and `d` the embedded Euclidean distances.
//!
//! [`choose_dim`] walks dimensions upward, warm-starting each one from the
//! previous solution, and stops at the first dimensionality whose stress is
//! at most a fraction of the one-dimensional stress.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::similarity::DistanceMatrix;

pub const DEFAULT_THRESHOLD: f64 = 0.10;
pub const MAX_ITERATIONS: usize = 500;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

/// Row-major `M x dims` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub document_ids: Vec<String>,
    pub dims: usize,
    pub coords: Vec<f64>,
    pub stress: f64,
    pub source_metric: String,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.document_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.document_ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    /// Euclidean distance between embedded points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclid(self.row(i), self.row(j))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("document_id");
        for k in 1..=self.dims {
            let _ = write!(out, ",x{k}");
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
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StressCurve {
    pub points: Vec<(usize, f64)>,
}

impl StressCurve {
    pub fn stress_at(&self, dims: usize) -> Option<f64> {
        self.points.iter().find(|p| p.0 == dims).map(|p| p.1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dimension,stress\n");
        for (d, s) in &self.points {
            let _ = writeln!(out, "{d},{s:?}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Result of the elbow-rule dimension search.
#[derive(Debug, Clone, PartialEq)]
pub struct DimChoice {
    pub dims: usize,
    pub curve: StressCurve,
    /// False when no dimensionality up to the maximum met the threshold.
    pub threshold_met: bool,
    pub embedding: Embedding,
}

/// `min(M - 1, 20)`, at least 1.
pub fn default_max_dims(m: usize) -> usize {
    m.saturating_sub(1).clamp(1, 20)
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Raw stress and the stress-1 denominator of a configuration.
fn stress_parts(delta: &DistanceMatrix, x: &[f64], dims: usize) -> (f64, f64) {
    let m = delta.size();
    let mut raw = 0.0;
    let mut norm = 0.0;
    for i in 0..m {
        let xi = &x[i * dims..(i + 1) * dims];
        for j in i + 1..m {
            let d = euclid(xi, &x[j * dims..(j + 1) * dims]);
            let diff = delta.get(i, j) - d;
            raw += diff * diff;
            norm += d * d;
        }
    }
    (raw, norm)
}

fn stress1(raw: f64, norm: f64) -> f64 {
    if norm > 0.0 {
        (raw / norm).sqrt()
    } else if raw > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Kruskal stress-1 of `x` (row-major, `dims` columns) against `delta`.
pub fn kruskal_stress(delta: &DistanceMatrix, x: &[f64], dims: usize) -> f64 {
    let (raw, norm) = stress_parts(delta, x, dims);
    stress1(raw, norm)
}

/// One Guttman transform: `X <- B(X) X / M`.
fn guttman(delta: &DistanceMatrix, x: &[f64], dims: usize, out: &mut [f64]) {
    let m = delta.size();
    out.fill(0.0);
    for i in 0..m {
        let xi = &x[i * dims..(i + 1) * dims];
        for j in i + 1..m {
            let xj = &x[j * dims..(j + 1) * dims];
            let d = euclid(xi, xj);
            if d <= 0.0 {
                continue;
            }
            let ratio = delta.get(i, j) / d;
            for k in 0..dims {
                let step = ratio * (xi[k] - xj[k]);
                out[i * dims + k] += step;
                out[j * dims + k] -= step;
            }
        }
    }
    let inv = 1.0 / m as f64;
    out.iter_mut().for_each(|v| *v *= inv);
}

/// Runs SMACOF from `start` until the relative decrease of raw stress drops
/// below the tolerance. Returns the final configuration and its stress-1.
fn smacof(delta: &DistanceMatrix, mut x: Vec<f64>, dims: usize) -> (Vec<f64>, f64) {
    let mut next = vec![0.0; x.len()];
    let (mut raw, _) = stress_parts(delta, &x, dims);
    for _ in 0..MAX_ITERATIONS {
        if raw == 0.0 {
            break;
        }
        guttman(delta, &x, dims, &mut next);
        let (new_raw, _) = stress_parts(delta, &next, dims);
        std::mem::swap(&mut x, &mut next);
        let decrease = (raw - new_raw) / raw;
        raw = new_raw;
        if decrease < RELATIVE_TOLERANCE {
            break;
        }
    }
    let s = kruskal_stress(delta, &x, dims);
    (x, s)
}

/// Torgerson scaling: top eigenvectors of the double-centered squared
/// distances, scaled by the root of their (clamped) eigenvalues.
pub fn classical_scaling(delta: &DistanceMatrix, dims: usize) -> Vec<f64> {
    let m = delta.size();
    let sq = DMatrix::from_fn(m, m, |i, j| delta.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..m).map(|i| sq.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / m as f64;
    let b = DMatrix::from_fn(m, m, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[q].total_cmp(&eig.eigenvalues[p]).then(p.cmp(&q)));
    let mut x = vec![0.0; m * dims];
    for (k, &col) in order.iter().take(dims).enumerate() {
        let scale = eig.eigenvalues[col].max(0.0).sqrt();
        let v = eig.eigenvectors.column(col);
        // fix the sign so the output does not depend on solver internals
        let pivot = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..m {
            x[i * dims + k] = sign * scale * v[i];
        }
    }
    x
}

fn mean_distance(delta: &DistanceMatrix) -> f64 {
    let m = delta.size();
    if m < 2 {
        return 0.0;
    }
    let total: f64 = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).map(|(i, j)| delta.get(i, j)).sum();
    total / (m * (m - 1) / 2) as f64
}

fn random_start(delta: &DistanceMatrix, dims: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let scale = mean_distance(delta).max(f64::MIN_POSITIVE);
    (0..delta.size() * dims)
        .map(|_| (rng.random::<f64>() - 0.5) * scale)
        .collect()
}

fn embedding(delta: &DistanceMatrix, dims: usize, coords: Vec<f64>, stress: f64, label: &str) -> Embedding {
    Embedding {
        document_ids: delta.document_ids.clone(),
        dims,
        coords,
        stress,
        source_metric: label.to_string(),
    }
}

fn dim_rng(seed: u64, dims: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (dims as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn check_input(delta: &DistanceMatrix, dims: usize) -> Result<()> {
    if dims < 1 {
        return Err(Error::InvalidArgument("MDS needs at least one dimension".into()));
    }
    delta.validate()
}

/// Best of a classical-scaling start and a seeded random start.
pub fn mds(delta: &DistanceMatrix, dims: usize, seed: u64) -> Result<Embedding> {
    mds_labeled(delta, dims, seed, "")
}

pub fn mds_labeled(delta: &DistanceMatrix, dims: usize, seed: u64, label: &str) -> Result<Embedding> {
    check_input(delta, dims)?;
    let m = delta.size();
    if delta.is_all_zero() {
        return Ok(embedding(delta, dims, vec![0.0; m * dims], 0.0, label));
    }
    let mut rng = dim_rng(seed, dims);
    let (x, s) = best_of(delta, dims, vec![classical_scaling(delta, dims), random_start(delta, dims, &mut rng)]);
    if !s.is_finite() {
        return Err(Error::Numerical("MDS stress is not finite".into()));
    }
    Ok(embedding(delta, dims, x, s, label))
}

fn best_of(delta: &DistanceMatrix, dims: usize, starts: Vec<Vec<f64>>) -> (Vec<f64>, f64) {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let (x, s) = smacof(delta, start, dims);
        if best.as_ref().is_none_or(|b| s < b.1) {
            best = Some((x, s));
        }
    }
    best.expect("at least one start")
}

fn pad(x: &[f64], m: usize, dims: usize, fill: impl FnMut() -> f64) -> Vec<f64> {
    let mut fill = fill;
    let mut out = Vec::with_capacity(m * (dims + 1));
    for i in 0..m {
        out.extend_from_slice(&x[i * dims..(i + 1) * dims]);
        out.push(fill());
    }
    out
}

/// Smallest dimensionality whose stress is at most `threshold` times the
/// one-dimensional stress, searching `1..=max_dims`.
pub fn choose_dim(delta: &DistanceMatrix, threshold: f64, max_dims: usize, seed: u64) -> Result<DimChoice> {
    choose_dim_labeled(delta, threshold, max_dims, seed, "")
}

pub fn choose_dim_labeled(
    delta: &DistanceMatrix,
    threshold: f64,
    max_dims: usize,
    seed: u64,
    label: &str,
) -> Result<DimChoice> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside (0, 1)")));
    }
    if max_dims < 1 {
        return Err(Error::InvalidArgument("max_dims must be at least 1".into()));
    }
    let first = mds_labeled(delta, 1, seed, label)?;
    let target = threshold * first.stress;
    let mut curve = StressCurve { points: vec![(1, first.stress)] };
    let mut current = first;
    let m = delta.size();
    while current.stress > target && current.dims < max_dims {
        let dims = current.dims + 1;
        let mut rng = dim_rng(seed, dims);
        let jitter = 1e-2 * mean_distance(delta);
        let warm = pad(&current.coords, m, current.dims, || (rng.random::<f64>() - 0.5) * jitter);
        let starts = vec![warm, classical_scaling(delta, dims), random_start(delta, dims, &mut rng)];
        let (mut x, mut s) = best_of(delta, dims, starts);
        // zero-padding the previous solution reproduces its stress exactly
        if s.is_nan() || s > current.stress {
            x = pad(&current.coords, m, current.dims, || 0.0);
            s = current.stress;
        }
        if !s.is_finite() {
            return Err(Error::Numerical("MDS stress is not finite".into()));
        }
        curve.points.push((dims, s));
        current = embedding(delta, dims, x, s, label);
    }
    let threshold_met = current.stress <= target;
    if !threshold_met {
        log::warn!(
            "{}: stress threshold not reached within {max_dims} dimensions",
            if label.is_empty() { "mds" } else { label }
        );
    }
    Ok(DimChoice {
        dims: current.dims,
        curve,
        threshold_met,
        embedding: current,
    })
}

/// Concatenated per-document features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub document_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

/// Joins embeddings head to tail: row `i` is row `i` of each embedding in turn.
pub fn combine(embeddings: &[Embedding]) -> Result<FeatureMatrix> {
    let first = embeddings
        .first()
        .ok_or_else(|| Error::InvalidArgument("no embeddings to combine".into()))?;
    for e in embeddings {
        if e.document_ids != first.document_ids {
            return Err(Error::Mismatch(format!(
                "embedding {} lists different documents or order",
                e.source_metric
            )));
        }
    }
    let rows = (0..first.len())
        .map(|i| embeddings.iter().flat_map(|e| e.row(i).iter().copied()).collect())
        .collect();
    Ok(FeatureMatrix {
        document_ids: first.document_ids.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(m: usize) -> Vec<String> {
        (0..m).map(|i| format!("d{i}")).collect()
    }

    fn from_points(points: &[Vec<f64>]) -> DistanceMatrix {
        let raw = DistanceMatrix::from_fn(ids(points.len()), |i, j| euclid(&points[i], &points[j]));
        let max = raw.values().iter().copied().fold(0.0, f64::max);
        DistanceMatrix::from_fn(ids(points.len()), |i, j| raw.get(i, j) / max)
    }

    fn planar(m: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect()
    }

    #[test]
    fn equilateral_triangle() {
        let d = DistanceMatrix::from_fn(ids(3), |_, _| 1.0);
        let e = mds(&d, 2, 7).unwrap();
        assert!(e.stress < 1e-6);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((e.distance(i, j) - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn planar_recovery() {
        let d = from_points(&planar(20, 3));
        let e = mds(&d, 2, 11).unwrap();
        for i in 0..20 {
            for j in i + 1..20 {
                assert!((e.distance(i, j) - d.get(i, j)).abs() <= 1e-4 * d.get(i, j).max(1e-12));
            }
        }
        let one = mds(&d, 1, 11).unwrap();
        assert!(one.stress > e.stress);
    }

    #[test]
    fn zero_matrix() {
        let d = DistanceMatrix::from_fn(ids(4), |_, _| 0.0);
        let e = mds(&d, 3, 1).unwrap();
        assert_eq!(e.stress, 0.0);
        assert!(e.coords.iter().all(|&v| v == 0.0));
        let c = choose_dim(&d, 0.1, 3, 1).unwrap();
        assert_eq!(c.dims, 1);
        assert_eq!(c.curve.points, vec![(1, 0.0)]);
    }

    #[test]
    fn rejects_asymmetric() {
        let bad = DistanceMatrix::from_raw_unchecked(ids(2), vec![0.0, 0.3, 0.4, 0.0]);
        assert!(mds(&bad, 2, 1).is_err());
        let d = DistanceMatrix::from_fn(ids(3), |_, _| 0.5);
        assert!(mds(&d, 0, 1).is_err());
    }

    #[test]
    fn planar_dim_choice() {
        let d = from_points(&planar(25, 9));
        let c = choose_dim(&d, 0.1, 6, 5).unwrap();
        assert_eq!(c.dims, 2);
        assert!(c.threshold_met);
        assert_eq!(c.embedding.dims, 2);
    }

    #[test]
    fn stress_curve_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = DistanceMatrix::from_fn(ids(15), |_, _| 0.0);
        let vals: Vec<f64> = (0..225).map(|_| rng.random::<f64>()).collect();
        let noisy = DistanceMatrix::from_fn(d.document_ids.clone(), |i, j| vals[i.min(j) * 15 + i.max(j)]);
        let c = choose_dim(&noisy, 0.01, 8, 2).unwrap();
        for w in c.curve.points.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9, "{:?}", c.curve);
        }
    }

    #[test]
    fn combine_widths() {
        let mk = |dims: usize, label: &str| Embedding {
            document_ids: ids(2),
            dims,
            coords: (0..2 * dims).map(|v| v as f64).collect(),
            stress: 0.0,
            source_metric: label.into(),
        };
        let f = combine(&[mk(3, "a"), mk(2, "b")]).unwrap();
        assert_eq!(f.width(), 5);
        assert_eq!(f.rows[1], vec![3.0, 4.0, 5.0, 2.0, 3.0]);
        let single = combine(&[mk(3, "a")]).unwrap();
        assert_eq!(single.rows[0], vec![0.0, 1.0, 2.0]);
        assert_eq!(combine(&vec![mk(6, "m"); 4]).unwrap().width(), 24);
        let mut other = mk(2, "c");
        other.document_ids.reverse();
        assert!(combine(&[mk(3, "a"), other]).is_err());
    }

    #[test]
    fn deterministic() {
        let d = from_points(&planar(12, 1));
        assert_eq!(mds(&d, 1, 3).unwrap(), mds(&d, 1, 3).unwrap());
    }
}
