//! A synthetic stand-in for mixture spectra.
//!
//! Every spectrum is a random convex mixture of component spectra drawn
//! from a library of 12 narrow-peaked components, plus noise and a
//! baseline offset. A mixture is a Target when it contains any of the
//! first three components. Unexpected outliers are mixtures over a second
//! library of broad-peaked components that never occurs in training.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::dataset::{ExampleSet, Label};
use crate::error::Result;
use crate::rng::{self, StdStream};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub points: usize,
    pub targets: usize,
    pub others: usize,
    pub unexpected: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig { points: 120, targets: 154, others: 76, unexpected: 50, seed: 7 }
    }
}

const LIBRARY: usize = 12;
const TARGET_COMPONENTS: usize = 3;
const UNEXPECTED_LIBRARY: usize = 8;
const NOISE: f64 = 0.02;
const BASELINE: f64 = 0.05;

fn peaks(r: &mut StdStream, axis: &[f64], count: usize, width: (f64, f64)) -> Vec<f64> {
    let mut out = vec![0.0; axis.len()];
    for _ in 0..count {
        let centre = r.random_range(0.0..1.0);
        let w = r.random_range(width.0..width.1);
        let amp = r.random_range(0.3..1.0);
        for (o, x) in out.iter_mut().zip(axis) {
            *o += amp * (-(x - centre).powi(2) / (2.0 * w * w)).exp();
        }
    }
    out
}

/// Uniform weights on the simplex.
fn simplex_weights(r: &mut StdStream, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(r)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn mixture(r: &mut StdStream, library: &[Vec<f64>], parts: &[usize]) -> Vec<f64> {
    let weights = simplex_weights(r, parts.len());
    let mut out = vec![BASELINE; library[0].len()];
    for (&p, w) in parts.iter().zip(weights) {
        for (o, v) in out.iter_mut().zip(&library[p]) {
            *o += w * v;
        }
    }
    for o in out.iter_mut() {
        let z: f64 = StandardNormal.sample(r);
        *o += NOISE * z;
    }
    out
}

/// Returns `(primary, unexpected)`: Target and Other mixtures, and the
/// unexpected outliers (all labelled Other).
pub fn generate(config: &SyntheticConfig) -> Result<(ExampleSet, ExampleSet)> {
    let mut r = rng::seeded(config.seed);
    let n = config.points.max(2);
    let axis: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let library: Vec<Vec<f64>> = (0..LIBRARY)
        .map(|_| {
            let count = r.random_range(2..5);
            peaks(&mut r, &axis, count, (0.01, 0.03))
        })
        .collect();
    let unexpected_library: Vec<Vec<f64>> = (0..UNEXPECTED_LIBRARY)
        .map(|_| {
            let count = r.random_range(1..3);
            let broad = peaks(&mut r, &axis, count, (0.05, 0.15));
            let fine = peaks(&mut r, &axis, 3, (0.01, 0.03));
            broad.iter().zip(&fine).map(|(b, f)| b + 0.3 * f).collect()
        })
        .collect();

    let draw = |r: &mut StdStream, target: bool| loop {
        let k = r.random_range(1..5);
        let parts = rng::sample_distinct(r, LIBRARY, k);
        if parts.iter().any(|&p| p < TARGET_COMPONENTS) == target {
            return mixture(r, &library, &parts);
        }
    };
    let mut rows = Vec::with_capacity(config.targets + config.others);
    for _ in 0..config.targets {
        rows.push((draw(&mut r, true), Label::Target));
    }
    for _ in 0..config.others {
        rows.push((draw(&mut r, false), Label::Other));
    }
    let unexpected = (0..config.unexpected)
        .map(|_| {
            let k = r.random_range(1..3);
            let parts = rng::sample_distinct(&mut r, UNEXPECTED_LIBRARY, k);
            (mixture(&mut r, &unexpected_library, &parts), Label::Other)
        })
        .collect();
    Ok((
        ExampleSet::from_labelled("synthetic-mixtures", rows)?,
        ExampleSet::from_labelled("synthetic-unexpected", unexpected)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_labels() {
        let (primary, unexpected) = generate(&SyntheticConfig::default()).unwrap();
        assert_eq!(primary.len(), 230);
        assert_eq!(primary.feature_count(), 120);
        assert_eq!(primary.full_view().targets_of().len(), 154);
        assert_eq!(unexpected.len(), 50);
        assert!(unexpected.full_view().targets_of().is_empty());
    }

    #[test]
    fn seeded() {
        let c = SyntheticConfig { targets: 10, others: 5, unexpected: 3, ..SyntheticConfig::default() };
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let d = SyntheticConfig { seed: 8, ..c.clone() };
        assert_ne!(generate(&c).unwrap(), generate(&d).unwrap());
    }
}
