//! One-sided k-means: Lloyd clustering of the targets, then a distance
//! threshold to the nearest centroid.

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::metrics::{squared_euclidean, DistanceMetric};
use crate::rng;

pub const MAX_ITER: usize = 100;

/// Result of a Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid, one entry per
    /// assignment step.
    pub objective: Vec<f64>,
    pub converged: bool,
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    points
        .iter()
        .map(|p| {
            centroids
                .iter()
                .enumerate()
                .map(|(c, mu)| (squared_euclidean(p, mu), c))
                .fold((usize::MAX, f64::INFINITY), |best, (d, c)| if d < best.1 { (c, d) } else { best })
        })
        .unzip()
}

/// Lloyd's algorithm with Forgy initialization drawn from `seed`.
///
/// A cluster that loses all members is moved onto the point farthest from
/// its current centroid.
pub fn lloyd(points: &[Vec<f64>], clusters: usize, seed: u64, max_iter: usize) -> Result<Clustering> {
    if clusters < 1 {
        return Err(Error::training("KMEANS", "the number of clusters must be at least 1"));
    }
    if points.len() < clusters {
        return Err(Error::training(
            "KMEANS",
            format!("{} targets cannot form {clusters} clusters", points.len()),
        ));
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::Arity { expected: dim, found: bad.len() });
    }

    let mut centroids: Vec<Vec<f64>> = rng::sample_distinct(&mut rng::seeded(seed), points.len(), clusters)
        .into_iter()
        .map(|i| points[i].clone())
        .collect();
    let mut previous: Option<Vec<usize>> = None;
    let mut objective = Vec::new();
    let mut converged = false;

    for _ in 0..max_iter {
        let (labels, mut dists) = assign(points, &centroids);
        objective.push(dists.iter().sum());
        if previous.as_ref() == Some(&labels) {
            converged = true;
            break;
        }

        let mut sums = vec![vec![0.0; dim]; clusters];
        let mut counts = vec![0usize; clusters];
        for (p, &c) in points.iter().zip(&labels) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..clusters {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                let far = (0..points.len())
                    .fold(0, |best, i| if dists[i] > dists[best] { i } else { best });
                centroids[c] = points[far].clone();
                dists[far] = 0.0;
            }
        }
        previous = Some(labels);
    }

    let (assignments, _) = assign(points, &centroids);
    Ok(Clustering { centroids, assignments, objective, converged })
}

/// Accepts a vector when its nearest centroid lies within `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    centroids: Vec<Vec<f64>>,
    threshold: f64,
    metric: DistanceMetric,
}

impl KMeansModel {
    pub fn fit(targets: &[Vec<f64>], clusters: usize, threshold: f64, metric: DistanceMetric, seed: u64) -> Result<Self> {
        let clustering = lloyd(targets, clusters, seed, MAX_ITER)?;
        if !clustering.converged {
            log::warn!("k-means stopped after {MAX_ITER} iterations without settling");
        }
        Self::from_centroids(clustering.centroids, threshold, metric)
    }

    pub fn from_centroids(centroids: Vec<Vec<f64>>, threshold: f64, metric: DistanceMetric) -> Result<Self> {
        if centroids.is_empty() {
            return Err(Error::training("KMEANS", "no centroids"));
        }
        if !(threshold > 0.0) {
            return Err(Error::training("KMEANS", format!("threshold must be positive, got {threshold}")));
        }
        let dim = centroids[0].len();
        for c in &centroids {
            metric.check_vector(c, dim)?;
        }
        Ok(KMeansModel { centroids, threshold, metric })
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn nearest_distance(&self, x: &[f64]) -> Result<f64> {
        self.metric.check_vector(x, self.centroids[0].len())?;
        Ok(self.centroids.iter().map(|c| self.metric.eval(x, c)).fold(f64::INFINITY, f64::min))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(if self.nearest_distance(x)? <= self.threshold { Label::Target } else { Label::Other })
    }
}
