//! Min-max normalization, per instance or per attribute.

use crate::error::{Error, Result};

/// Which normalization a model applies to every vector it sees.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Copy)]
pub enum NormalizationKind {
    None,
    PerInstance,
    PerAttribute,
}

impl NormalizationKind {
    pub fn token(self) -> &'static str {
        match self {
            NormalizationKind::None => "none",
            NormalizationKind::PerInstance => "per_instance",
            NormalizationKind::PerAttribute => "per_attribute",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "none" => Some(NormalizationKind::None),
            "per_instance" => Some(NormalizationKind::PerInstance),
            "per_attribute" => Some(NormalizationKind::PerAttribute),
            _ => None,
        }
    }
}

/// A fitted normalization. Attribute mode carries the training ranges.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalizationMode {
    None,
    PerInstance,
    PerAttribute { min: Vec<f64>, max: Vec<f64> },
}

impl NormalizationMode {
    pub fn kind(&self) -> NormalizationKind {
        match self {
            NormalizationMode::None => NormalizationKind::None,
            NormalizationMode::PerInstance => NormalizationKind::PerInstance,
            NormalizationMode::PerAttribute { .. } => NormalizationKind::PerAttribute,
        }
    }

    /// Fits `kind` on the given training rows. Only attribute mode reads them.
    pub fn fit<'r>(kind: NormalizationKind, rows: impl IntoIterator<Item = &'r [f64]>) -> Result<Self> {
        Ok(match kind {
            NormalizationKind::None => NormalizationMode::None,
            NormalizationKind::PerInstance => NormalizationMode::PerInstance,
            NormalizationKind::PerAttribute => fit_attribute_norm(rows)?,
        })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            NormalizationMode::None => Ok(x.to_vec()),
            NormalizationMode::PerInstance => Ok(normalize_instance(x)),
            NormalizationMode::PerAttribute { .. } => apply_attribute_norm(self, x),
        }
    }
}

/// Rescales `x` so that its minimum maps to 0 and its maximum to 1.
/// A constant vector maps to all zeros.
pub fn normalize_instance(x: &[f64]) -> Vec<f64> {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return vec![0.0; x.len()];
    }
    x.iter().map(|&v| (v - lo) / range).collect()
}

/// Per-column min and max over the training rows.
pub fn fit_attribute_norm<'r>(rows: impl IntoIterator<Item = &'r [f64]>) -> Result<NormalizationMode> {
    let mut rows = rows.into_iter();
    let Some(first) = rows.next() else {
        return Err(Error::Evaluation("cannot fit attribute normalization on zero rows".into()));
    };
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for row in rows {
        if row.len() != min.len() {
            return Err(Error::Arity { expected: min.len(), found: row.len() });
        }
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(NormalizationMode::PerAttribute { min, max })
}

/// Applies fitted column ranges; out-of-range values are not clamped and
/// constant training columns map to 0.
pub fn apply_attribute_norm(mode: &NormalizationMode, x: &[f64]) -> Result<Vec<f64>> {
    let NormalizationMode::PerAttribute { min, max } = mode else {
        return mode.apply(x);
    };
    if x.len() != min.len() {
        return Err(Error::Arity { expected: min.len(), found: x.len() });
    }
    Ok(x.iter()
        .zip(min.iter().zip(max))
        .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect())
}
