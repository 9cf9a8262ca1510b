//! Instance-based learners: the one-sided kNN ratio test, NN-PC and the
//! two-class kNN baseline.
//!
//! Stored vectors are kept in lexicographic order so that neighbour ties,
//! broken by (distance, stored position), do not depend on insertion order.

use std::cmp::Ordering;

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::metrics::DistanceMetric;

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

fn canonical(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    rows.sort_by(|a, b| lexicographic(a, b));
    rows
}

fn validate_rows(alg: &'static str, rows: &[Vec<f64>], metric: DistanceMetric) -> Result<usize> {
    let Some(first) = rows.first() else {
        return Err(Error::training(alg, "no training vectors"));
    };
    let arity = first.len();
    for row in rows {
        metric.check_vector(row, arity)?;
    }
    Ok(arity)
}

/// Positions and distances of the `count` nearest stored vectors to `x`,
/// nearest first, skipping position `exclude`.
fn nearest(
    stored: &[Vec<f64>],
    x: &[f64],
    count: usize,
    metric: DistanceMetric,
    exclude: Option<usize>,
) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = stored
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, s)| (metric.eval(x, s), i))
        .collect();
    let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if count < all.len() {
        all.select_nth_unstable_by(count, by_key);
        all.truncate(count);
    }
    all.sort_by(by_key);
    all
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// One-sided kNN: reject `x` when the mean distance to its `m` nearest
/// targets (D1) exceeds `threshold` times those neighbours' own mean
/// distance to their `k` nearest targets (D2).
#[derive(Debug, Clone, PartialEq)]
pub struct OsKnnModel {
    targets: Vec<Vec<f64>>,
    /// Mean distance of each stored target to its `k` nearest other targets.
    local_scale: Vec<f64>,
    m: usize,
    k: usize,
    threshold: f64,
    metric: DistanceMetric,
}

impl OsKnnModel {
    pub fn fit(targets: Vec<Vec<f64>>, m: usize, k: usize, threshold: f64, metric: DistanceMetric) -> Result<Self> {
        const ALG: &str = "KNN";
        if m < 1 || k < 1 {
            return Err(Error::training(ALG, "M and K must be at least 1"));
        }
        if !(threshold > 0.0) {
            return Err(Error::training(ALG, format!("threshold must be positive, got {threshold}")));
        }
        validate_rows(ALG, &targets, metric)?;
        if targets.len() < m.max(k + 1) {
            return Err(Error::training(
                ALG,
                format!("{} targets stored but M={m}, K={k} needs at least {}", targets.len(), m.max(k + 1)),
            ));
        }
        let targets = canonical(targets);
        let local_scale = (0..targets.len())
            .map(|i| mean(nearest(&targets, &targets[i], k, metric, Some(i)).into_iter().map(|(d, _)| d)))
            .collect();
        Ok(OsKnnModel { targets, local_scale, m, k, threshold, metric })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    pub fn arity(&self) -> usize {
        self.targets[0].len()
    }

    /// `(D1, D2)` for the test vector `x`.
    pub fn distances(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.metric.check_vector(x, self.arity())?;
        let hits = nearest(&self.targets, x, self.m, self.metric, None);
        let d1 = mean(hits.iter().map(|(d, _)| *d));
        let d2 = mean(hits.iter().map(|(_, i)| self.local_scale[*i]));
        Ok((d1, d2))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let (d1, d2) = self.distances(x)?;
        let accept = if d2 == 0.0 { d1 == 0.0 } else { d1 / d2 <= self.threshold };
        Ok(if accept { Label::Target } else { Label::Other })
    }
}

/// Nearest-neighbour positive-class rule: accept when the nearest stored
/// target is no farther than the largest nearest-neighbour gap inside the
/// training targets.
#[derive(Debug, Clone, PartialEq)]
pub struct NnPcModel {
    targets: Vec<Vec<f64>>,
    delta: f64,
    metric: DistanceMetric,
}

impl NnPcModel {
    pub fn fit(targets: Vec<Vec<f64>>, metric: DistanceMetric) -> Result<Self> {
        validate_rows("NNPC", &targets, metric)?;
        if targets.len() < 2 {
            return Err(Error::training("NNPC", "at least 2 targets are required"));
        }
        let targets = canonical(targets);
        let delta = (0..targets.len())
            .map(|i| nearest(&targets, &targets[i], 1, metric, Some(i))[0].0)
            .fold(0.0, f64::max);
        Ok(NnPcModel { targets, delta, metric })
    }

    /// Rebuilds a model from stored state without recomputing `delta`.
    pub fn from_parts(targets: Vec<Vec<f64>>, delta: f64, metric: DistanceMetric) -> Result<Self> {
        validate_rows("NNPC", &targets, metric)?;
        Ok(NnPcModel { targets: canonical(targets), delta, metric })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.metric.check_vector(x, self.targets[0].len())?;
        let d = nearest(&self.targets, x, 1, self.metric, None)[0].0;
        Ok(if d <= self.delta { Label::Target } else { Label::Other })
    }
}

/// Two-class k-nearest-neighbour majority vote by exhaustive linear scan.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryKnnModel {
    stored: Vec<Vec<f64>>,
    labels: Vec<Label>,
    k: usize,
    metric: DistanceMetric,
}

impl BinaryKnnModel {
    pub fn fit(rows: Vec<(Vec<f64>, Label)>, k: usize, metric: DistanceMetric) -> Result<Self> {
        const ALG: &str = "BKNN";
        if k < 1 {
            return Err(Error::training(ALG, "K must be at least 1"));
        }
        if rows.len() < k {
            return Err(Error::training(ALG, format!("{} training examples for K={k}", rows.len())));
        }
        if !rows.iter().any(|r| r.1 == Label::Target) || !rows.iter().any(|r| r.1 == Label::Other) {
            return Err(Error::training(ALG, "both Target and Other examples are required"));
        }
        let mut rows = rows;
        rows.sort_by(|a, b| lexicographic(&a.0, &b.0).then((a.1 == Label::Other).cmp(&(b.1 == Label::Other))));
        let (stored, labels): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        validate_rows(ALG, &stored, metric)?;
        Ok(BinaryKnnModel { stored, labels, k, metric })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn stored(&self) -> impl Iterator<Item = (&[f64], Label)> {
        self.stored.iter().map(Vec::as_slice).zip(self.labels.iter().copied())
    }

    /// Majority label among the `k` nearest; an even split predicts Target.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.metric.check_vector(x, self.stored[0].len())?;
        let hits = nearest(&self.stored, x, self.k, self.metric, None);
        let targets = hits.iter().filter(|(_, i)| self.labels[*i] == Label::Target).count();
        Ok(if 2 * targets >= hits.len() { Label::Target } else { Label::Other })
    }
}
