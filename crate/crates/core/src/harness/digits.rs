//! The handwritten-digit study built from the UCI multiple-features
//! "fac" file: 2000 rows of 216 profile correlations, 200 rows per digit
//! in digit order.

use std::path::Path;

use crate::dataset::{ExampleSet, Label};
use crate::error::{Error, Result};

pub const ROWS_PER_DIGIT: usize = 200;
pub const FEATURES: usize = 216;
pub const TARGET_DIGIT: usize = 2;
pub const EXPECTED_OUTLIER_DIGIT: usize = 3;
/// Rows taken from each remaining digit to form the unexpected outliers.
pub const UNEXPECTED_PER_DIGIT: usize = 25;

/// Parses the whitespace-separated feature file.
pub fn parse_mfeat(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Config(format!("line {}: bad value \"{t}\"", n + 1))))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::Arity { expected: first, found: row.len() });
            }
        }
        rows.push(row);
    }
    if rows.len() != 10 * ROWS_PER_DIGIT {
        return Err(Error::Config(format!("expected {} rows, found {}", 10 * ROWS_PER_DIGIT, rows.len())));
    }
    Ok(rows)
}

pub fn load_mfeat(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_mfeat(&std::fs::read_to_string(path)?)
}

fn digit_rows(rows: &[Vec<f64>], digit: usize) -> &[Vec<f64>] {
    &rows[digit * ROWS_PER_DIGIT..(digit + 1) * ROWS_PER_DIGIT]
}

/// Digit 2 as Target and digit 3 as Other.
pub fn primary_set(rows: &[Vec<f64>]) -> Result<ExampleSet> {
    let mut labelled: Vec<(Vec<f64>, Label)> = digit_rows(rows, TARGET_DIGIT).iter().map(|r| (r.clone(), Label::Target)).collect();
    labelled.extend(digit_rows(rows, EXPECTED_OUTLIER_DIGIT).iter().map(|r| (r.clone(), Label::Other)));
    ExampleSet::from_labelled("mfeat-fac-2-vs-3", labelled)
}

/// The first 25 rows of every other digit, all labelled Other.
pub fn secondary_set(rows: &[Vec<f64>]) -> Result<ExampleSet> {
    let labelled = (0..10)
        .filter(|&d| d != TARGET_DIGIT && d != EXPECTED_OUTLIER_DIGIT)
        .flat_map(|d| digit_rows(rows, d)[..UNEXPECTED_PER_DIGIT].iter().map(|r| (r.clone(), Label::Other)))
        .collect();
    ExampleSet::from_labelled("mfeat-fac-unexpected", labelled)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_rows() -> Vec<Vec<f64>> {
        (0..2000).map(|i| vec![(i / ROWS_PER_DIGIT) as f64, (i % ROWS_PER_DIGIT) as f64]).collect()
    }

    #[test]
    fn protocol_sets() {
        let rows = fake_rows();
        let primary = primary_set(&rows).unwrap();
        assert_eq!(primary.len(), 400);
        assert_eq!(primary.full_view().targets_of().len(), 200);
        assert_eq!(primary.features(0)[0], 2.0);
        assert_eq!(primary.features(399)[0], 3.0);
        let secondary = secondary_set(&rows).unwrap();
        assert_eq!(secondary.len(), 200);
        assert!(secondary.full_view().targets_of().is_empty());
        let digits: Vec<f64> = (0..8).map(|b| secondary.features(b * 25)[0]).collect();
        assert_eq!(digits, vec![0.0, 1.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        assert!((0..200).all(|i| secondary.features(i)[1] < 25.0));
    }

    #[test]
    fn parse_checks_shape() {
        let text: String = (0..2000).map(|i| format!("  {i} 1\n")).collect();
        assert_eq!(parse_mfeat(&text).unwrap().len(), 2000);
        assert!(parse_mfeat("1 2\n3\n").is_err());
        assert!(parse_mfeat("1 2\n").is_err());
        assert!(parse_mfeat("1 x\n").is_err());
    }
}
