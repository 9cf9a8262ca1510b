//! One-sided classification: ARFF data pipeline, one-class learners,
//! grid-driven model selection and an unexpected-outlier study harness.

pub mod arff;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod harness;
pub mod kmeans;
pub mod metrics;
pub mod model;
pub mod neighbors;
pub mod ocsvm;
pub mod oscal;
pub mod preprocess;
pub mod rng;

pub use dataset::{ExampleSet, IndexView, Label};
pub use error::{Error, Result};
pub use metrics::{DistanceMetric, EvalReport};
