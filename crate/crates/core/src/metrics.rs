//! Distance metrics and classification performance measures.

use std::fmt;

use crate::dataset::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceMetric {
    Euclidean,
    Manhattan,
    /// `1 - cos(a, b)`, so that smaller is closer for every metric.
    Cosine,
}

impl DistanceMetric {
    /// Single-letter token used on the command line and in model files.
    pub fn token(self) -> &'static str {
        match self {
            DistanceMetric::Euclidean => "e",
            DistanceMetric::Manhattan => "m",
            DistanceMetric::Cosine => "c",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "e" => Some(DistanceMetric::Euclidean),
            "m" => Some(DistanceMetric::Manhattan),
            "c" => Some(DistanceMetric::Cosine),
            _ => None,
        }
    }

    /// Checked distance: arity must match and cosine rejects zero vectors.
    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::Arity { expected: a.len(), found: b.len() });
        }
        if self == DistanceMetric::Cosine && (is_zero(a) || is_zero(b)) {
            return Err(Error::ZeroVector);
        }
        Ok(self.eval(a, b))
    }

    /// Unchecked distance for callers that validated their inputs.
    pub(crate) fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            DistanceMetric::Euclidean => squared_euclidean(a, b).sqrt(),
            DistanceMetric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            DistanceMetric::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0)
            }
        }
    }

    /// Rejects vectors this metric cannot handle.
    pub(crate) fn check_vector(self, x: &[f64], expected: usize) -> Result<()> {
        if x.len() != expected {
            return Err(Error::Arity { expected, found: x.len() });
        }
        if self == DistanceMetric::Cosine && is_zero(x) {
            return Err(Error::ZeroVector);
        }
        Ok(())
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn is_zero(x: &[f64]) -> bool {
    x.iter().all(|&v| v == 0.0)
}

/// Counts with Target as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fn_: usize, fp: usize, tn: usize) -> Self {
        ConfusionMatrix { tp, fn_, fp, tn }
    }

    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (truth, predicted) {
            (Label::Target, Label::Target) => self.tp += 1,
            (Label::Target, Label::Other) => self.fn_ += 1,
            (Label::Other, Label::Target) => self.fp += 1,
            (Label::Other, Label::Other) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn add(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fn_: self.fn_ + other.fn_,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
        }
    }

    /// Renders the matrix as the console/log table.
    pub fn render_table(&self) -> String {
        let rule = "|--------|--------------------|-------------------|\n";
        let mut out = String::new();
        out.push_str(rule);
        out.push_str("|        | Target predictions | Other Predictions |\n");
        out.push_str(rule);
        out.push_str(&format!("| Target | {:<18} | {:<17} |\n", self.tp, self.fn_));
        out.push_str(rule);
        out.push_str(&format!("| Other  | {:<18} | {:<17} |\n", self.fp, self.tn));
        out.push_str(rule);
        out
    }
}

/// Error rates derived from one confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub matrix: ConfusionMatrix,
    pub error: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub bar: f64,
    pub ber: f64,
    /// Set when the test slice had no Targets or no Others; the undefined
    /// rate is reported as 1.
    pub degenerate: bool,
}

impl EvalReport {
    pub fn from_matrix(matrix: ConfusionMatrix) -> Result<Self> {
        let total = matrix.total();
        if total == 0 {
            return Err(Error::Evaluation("no predictions to evaluate".into()));
        }
        let positives = matrix.tp + matrix.fn_;
        let negatives = matrix.fp + matrix.tn;
        let sensitivity = if positives == 0 { 1.0 } else { matrix.tp as f64 / positives as f64 };
        let specificity = if negatives == 0 { 1.0 } else { matrix.tn as f64 / negatives as f64 };
        let bar = (sensitivity + specificity) / 2.0;
        Ok(EvalReport {
            matrix,
            error: (matrix.fp + matrix.fn_) as f64 / total as f64,
            sensitivity,
            specificity,
            bar,
            ber: 1.0 - bar,
            degenerate: positives == 0 || negatives == 0,
        })
    }

    pub fn accuracy(&self) -> f64 {
        1.0 - self.error
    }
}

/// Scores predictions against ground truth, Target being positive.
pub fn evaluate(predictions: &[Label], truths: &[Label]) -> Result<EvalReport> {
    if predictions.len() != truths.len() {
        return Err(Error::Evaluation(format!(
            "{} predictions for {} ground-truth labels",
            predictions.len(),
            truths.len()
        )));
    }
    let mut matrix = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truths) {
        matrix.record(p, t);
    }
    EvalReport::from_matrix(matrix)
}

/// Mean and sample standard deviation.
pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
