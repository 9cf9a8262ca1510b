//! Unexpected-outlier trend studies: train on a primary set, then test on
//! its held-out part augmented with growing numbers of outliers drawn
//! from a distribution never seen in training.

pub mod digits;
pub mod synthetic;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::dataset::{Example, ExampleSet, IndexView, Label};
use crate::error::{Error, Result};
use crate::metrics::{mean_and_sd, ConfusionMatrix, EvalReport};
use crate::model::{AlgorithmKind, ParamSet, ParamValue, TrainedModel};
use crate::preprocess::NormalizationKind;
use crate::rng;

/// One algorithm of a study with fixed settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RosterEntry {
    pub name: String,
    pub params: ParamSet,
    pub normalization: NormalizationKind,
}

impl RosterEntry {
    pub fn new(params: ParamSet, normalization: NormalizationKind) -> Self {
        RosterEntry { name: params.algorithm().id().to_string(), params, normalization }
    }
}

fn params(algorithm: AlgorithmKind, values: &[ParamValue]) -> ParamSet {
    ParamSet::new(algorithm, values.to_vec()).expect("roster settings are valid")
}

/// Settings for the handwritten-digit study; raw features throughout.
pub fn digit_roster() -> Vec<RosterEntry> {
    use crate::metrics::DistanceMetric::Euclidean;
    use ParamValue::{Metric, Number};
    let none = NormalizationKind::None;
    vec![
        RosterEntry::new(params(AlgorithmKind::Knn, &[Number(3.0), Number(3.0), Number(1.5), Metric(Euclidean)]), none),
        RosterEntry::new(params(AlgorithmKind::Kmeans, &[Number(10.0), Number(2000.0), Metric(Euclidean)]), none),
        RosterEntry::new(params(AlgorithmKind::Bknn, &[Number(1.0), Metric(Euclidean)]), none),
    ]
}

/// Settings for the synthetic mixture study; every spectrum is rescaled
/// to [0, 1] on its own.
pub fn mixture_roster() -> Vec<RosterEntry> {
    use crate::metrics::DistanceMetric::Euclidean;
    use crate::model::KernelKind::Gaussian;
    use ParamValue::{Kernel, Metric, Number};
    let inst = NormalizationKind::PerInstance;
    vec![
        RosterEntry::new(params(AlgorithmKind::Knn, &[Number(1.0), Number(3.0), Number(1.5), Metric(Euclidean)]), inst),
        RosterEntry::new(params(AlgorithmKind::Kmeans, &[Number(14.0), Number(1.5), Metric(Euclidean)]), inst),
        RosterEntry::new(
            params(AlgorithmKind::Ocsvm, &[Number(1.0), Number(0.01), Kernel(Gaussian), Number(1.0)]),
            inst,
        ),
        RosterEntry::new(params(AlgorithmKind::Bknn, &[Number(1.0), Metric(Euclidean)]), inst),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendStudyConfig {
    pub increments: Vec<usize>,
    pub runs: usize,
    pub base_seed: u64,
    pub train_percent: f64,
    pub roster: Vec<RosterEntry>,
    pub workers: usize,
}

impl TrendStudyConfig {
    pub fn digits() -> Self {
        TrendStudyConfig {
            increments: (0..=200).step_by(25).collect(),
            runs: 100,
            base_seed: 2,
            train_percent: 67.0,
            roster: digit_roster(),
            workers: 1,
        }
    }

    pub fn mixtures() -> Self {
        TrendStudyConfig {
            increments: (0..=50).step_by(10).collect(),
            runs: 100,
            base_seed: 2,
            train_percent: 67.0,
            roster: mixture_roster(),
            workers: 1,
        }
    }

    /// Settings and seeds in a form that allows the study to be replayed.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        writeln!(out, "increments {}", self.increments.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")).unwrap();
        writeln!(out, "runs {}", self.runs).unwrap();
        writeln!(out, "base_seed {}", self.base_seed).unwrap();
        writeln!(out, "run_seeds {}..{}", self.base_seed, rng::run_seed(self.base_seed, self.runs)).unwrap();
        writeln!(out, "outlier_order_seed {}", self.base_seed).unwrap();
        writeln!(out, "train_percent {:?}", self.train_percent).unwrap();
        for entry in &self.roster {
            writeln!(out, "algorithm {} {} normalization {}", entry.name, entry.params.summary(), entry.normalization.token())
                .unwrap();
        }
        out
    }
}

/// The primary set and the outlier pool stored in one parent set, so test
/// views can reference both. Primary rows come first.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyData {
    combined: ExampleSet,
    primary_len: usize,
}

impl StudyData {
    pub fn new(primary: &ExampleSet, secondary: &ExampleSet) -> Result<Self> {
        if primary.feature_count() != secondary.feature_count() {
            return Err(Error::Arity { expected: primary.feature_count(), found: secondary.feature_count() });
        }
        if !secondary.is_empty() && (0..secondary.len()).any(|i| secondary.label(i) != Some(Label::Other)) {
            return Err(Error::Config("every unexpected outlier must be labelled Other".into()));
        }
        let mut rows: Vec<(Vec<f64>, Label)> = Vec::with_capacity(primary.len() + secondary.len());
        for i in 0..primary.len() {
            let label = primary.label(i).ok_or_else(|| Error::Config("the primary set is not one-sided".into()))?;
            rows.push((primary.features(i).to_vec(), label));
        }
        rows.extend(secondary.examples().iter().map(|Example { features, .. }| (features.clone(), Label::Other)));
        let combined = ExampleSet::from_labelled(primary.relation(), rows)?;
        Ok(StudyData { combined, primary_len: primary.len() })
    }

    pub fn combined(&self) -> &ExampleSet {
        &self.combined
    }

    pub fn primary_view(&self) -> IndexView<'_> {
        IndexView::new(&self.combined, (0..self.primary_len).collect()).expect("indices in range")
    }

    pub fn secondary_len(&self) -> usize {
        self.combined.len() - self.primary_len
    }

    /// The outlier pool in the order increments draw from it: one seeded
    /// shuffle shared by every increment and run of a study.
    pub fn outlier_order(&self, seed: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (self.primary_len..self.combined.len()).collect();
        rng::shuffle(&mut rng::seeded(seed), &mut order);
        order
    }
}

/// Appends the first `count` outliers of `order` to `test`.
pub fn inject_outliers<'a>(test: &IndexView<'a>, order: &[usize], count: usize) -> Result<IndexView<'a>> {
    if count > order.len() {
        return Err(Error::Config(format!("{count} outliers requested, only {} available", order.len())));
    }
    let mut indices = test.indices().to_vec();
    indices.extend_from_slice(&order[..count]);
    IndexView::new(test.parent(), indices)
}

/// Per-increment mean and standard deviation, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendRow {
    pub increment: usize,
    pub error: f64,
    pub error_sd: f64,
    pub ber: f64,
    pub ber_sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendTable {
    pub increments: Vec<usize>,
    pub algorithms: Vec<String>,
    /// `rows[a][i]` summarises algorithm `a` at increment `i`.
    pub rows: Vec<Vec<TrendRow>>,
    /// `reports[r][a][i]`: run `r`, algorithm `a`, increment `i`.
    pub reports: Vec<Vec<Vec<EvalReport>>>,
}

impl TrendTable {
    pub fn column(&self, algorithm: &str) -> Option<&[TrendRow]> {
        self.algorithms.iter().position(|a| a == algorithm).map(|i| self.rows[i].as_slice())
    }

    /// Console table: one line per increment, `mean (sd)` per algorithm.
    pub fn render(&self, metric: TrendMetric) -> String {
        let mut out = format!("{:<10}", "outliers");
        for a in &self.algorithms {
            write!(out, " {a:>16}").unwrap();
        }
        out.push('\n');
        for (i, inc) in self.increments.iter().enumerate() {
            write!(out, "{inc:<10}").unwrap();
            for column in &self.rows {
                let (mean, sd) = match metric {
                    TrendMetric::Error => (column[i].error, column[i].error_sd),
                    TrendMetric::Ber => (column[i].ber, column[i].ber_sd),
                };
                write!(out, " {:>16}", format!("{mean:.2} ({sd:.2})")).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn run_study_once(
    data: &StudyData,
    config: &TrendStudyConfig,
    order: &[usize],
    run: usize,
) -> Result<Vec<Vec<EvalReport>>> {
    let seed = rng::run_seed(config.base_seed, run);
    let plan = data.primary_view().stratified_percentage_split(config.train_percent, seed)?;
    let most = config.increments.iter().copied().max().unwrap_or(0);
    let pool = inject_outliers(&plan.test.select(&[]), order, most)?;
    let test_truth: Vec<Label> = plan.test.labelled_rows()?.into_iter().map(|r| r.1).collect();

    let mut per_algorithm = Vec::with_capacity(config.roster.len());
    for entry in &config.roster {
        let model = TrainedModel::train(&entry.params, entry.normalization, &plan.train, seed)?;
        let mut base = ConfusionMatrix::default();
        for (p, t) in model.predict_view(&plan.test)?.into_iter().zip(&test_truth) {
            base.record(p, *t);
        }
        let outlier_predictions = model.predict_view(&pool)?;
        let mut reports = Vec::with_capacity(config.increments.len());
        for &inc in &config.increments {
            let mut m = base;
            for &p in &outlier_predictions[..inc] {
                m.record(p, Label::Other);
            }
            reports.push(EvalReport::from_matrix(m)?);
        }
        per_algorithm.push(reports);
    }
    Ok(per_algorithm)
}

/// Repeats a stratified split of the primary set `runs` times; every
/// algorithm trains on the same split and is tested at every increment.
pub fn run_trend_study(data: &StudyData, config: &TrendStudyConfig) -> Result<TrendTable> {
    if config.roster.is_empty() {
        return Err(Error::Config("the algorithm roster is empty".into()));
    }
    if config.runs == 0 || config.increments.is_empty() {
        return Err(Error::Config("a study needs at least one run and one increment".into()));
    }
    if let Some(&most) = config.increments.iter().max() {
        if most > data.secondary_len() {
            return Err(Error::Config(format!("{most} outliers requested, only {} available", data.secondary_len())));
        }
    }
    let order = data.outlier_order(config.base_seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    let reports: Vec<Vec<Vec<EvalReport>>> = pool.install(|| {
        (0..config.runs).into_par_iter().map(|r| run_study_once(data, config, &order, r)).collect::<Result<_>>()
    })?;

    let rows = (0..config.roster.len())
        .map(|a| {
            config
                .increments
                .iter()
                .enumerate()
                .map(|(i, &increment)| {
                    let errors: Vec<f64> = reports.iter().map(|run| 100.0 * run[a][i].error).collect();
                    let bers: Vec<f64> = reports.iter().map(|run| 100.0 * run[a][i].ber).collect();
                    let (error, error_sd) = mean_and_sd(&errors);
                    let (ber, ber_sd) = mean_and_sd(&bers);
                    TrendRow { increment, error, error_sd, ber, ber_sd }
                })
                .collect()
        })
        .collect();
    Ok(TrendTable {
        increments: config.increments.clone(),
        algorithms: config.roster.iter().map(|e| e.name.clone()).collect(),
        rows,
        reports,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendMetric {
    Error,
    Ber,
}

impl TrendMetric {
    pub fn token(self) -> &'static str {
        match self {
            TrendMetric::Error => "error",
            TrendMetric::Ber => "ber",
        }
    }
}

/// CSV text for one metric: `increment,<algo>,<algo>_sd,...`.
pub fn trend_csv(table: &TrendTable, metric: TrendMetric) -> String {
    let mut out = String::from("increment");
    for a in &table.algorithms {
        write!(out, ",{a},{a}_sd").unwrap();
    }
    out.push('\n');
    for (i, inc) in table.increments.iter().enumerate() {
        write!(out, "{inc}").unwrap();
        for column in &table.rows {
            let row = column[i];
            let (mean, sd) = match metric {
                TrendMetric::Error => (row.error, row.error_sd),
                TrendMetric::Ber => (row.ber, row.ber_sd),
            };
            write!(out, ",{mean:.6},{sd:.6}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Writes `<stem>_error.csv` and `<stem>_ber.csv` into `directory`.
pub fn emit_trend_csv(table: &TrendTable, directory: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    if table.algorithms.is_empty() {
        return Err(Error::Config("the algorithm roster is empty".into()));
    }
    let mut paths = Vec::new();
    for metric in [TrendMetric::Error, TrendMetric::Ber] {
        let path = directory.join(format!("{stem}_{}.csv", metric.token()));
        std::fs::write(&path, trend_csv(table, metric))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads a trend CSV back as `(algorithms, rows of (increment, [(mean, sd)]))`.
pub fn parse_trend_csv(text: &str) -> Result<(Vec<String>, Vec<(usize, Vec<(f64, f64)>)>)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Config("empty CSV".into()))?.split(',').collect();
    if header.first() != Some(&"increment") || header.len() % 2 != 1 {
        return Err(Error::Config("unexpected CSV header".into()));
    }
    let algorithms: Vec<String> = header[1..].chunks(2).map(|c| c[0].to_string()).collect();
    let bad = |l: &str| Error::Config(format!("bad CSV row \"{l}\""));
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(bad(line));
        }
        let inc = cells[0].parse().map_err(|_| bad(line))?;
        let values: Vec<f64> = cells[1..].iter().map(|c| c.parse().map_err(|_| bad(line))).collect::<Result<_>>()?;
        rows.push((inc, values.chunks(2).map(|c| (c[0], c[1])).collect()));
    }
    Ok((algorithms, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_study() -> (StudyData, TrendStudyConfig) {
        let (primary, unexpected) = synthetic::generate(&synthetic::SyntheticConfig {
            targets: 40,
            others: 20,
            unexpected: 12,
            ..Default::default()
        })
        .unwrap();
        let mut roster = mixture_roster();
        roster[1].params = params(
            AlgorithmKind::Kmeans,
            &[ParamValue::Number(4.0), ParamValue::Number(1.5), ParamValue::Metric(crate::metrics::DistanceMetric::Euclidean)],
        );
        let config = TrendStudyConfig {
            increments: vec![0, 4, 8, 12],
            runs: 5,
            base_seed: 3,
            train_percent: 67.0,
            roster,
            workers: 1,
        };
        (StudyData::new(&primary, &unexpected).unwrap(), config)
    }

    #[test]
    fn injection_is_nested() {
        let (data, config) = small_study();
        let order = data.outlier_order(config.base_seed);
        let test = data.primary_view().stratified_percentage_split(67.0, 1).unwrap().test;
        assert_eq!(inject_outliers(&test, &order, 0).unwrap(), test);
        let a = inject_outliers(&test, &order, 4).unwrap();
        let b = inject_outliers(&test, &order, 8).unwrap();
        assert!(a.indices().iter().all(|i| b.indices().contains(i)));
        assert!(b.labelled_rows().unwrap()[test.len()..].iter().all(|r| r.1 == Label::Other));
        assert!(inject_outliers(&test, &order, 13).is_err());
    }

    #[test]
    fn composed_reports_match_direct_evaluation() {
        let (data, config) = small_study();
        let table = run_trend_study(&data, &config).unwrap();
        let order = data.outlier_order(config.base_seed);
        for run in 0..config.runs {
            let seed = rng::run_seed(config.base_seed, run);
            let plan = data.primary_view().stratified_percentage_split(67.0, seed).unwrap();
            for (a, entry) in config.roster.iter().enumerate() {
                let model = TrainedModel::train(&entry.params, entry.normalization, &plan.train, seed).unwrap();
                for (i, &inc) in config.increments.iter().enumerate() {
                    let view = inject_outliers(&plan.test, &order, inc).unwrap();
                    assert_eq!(model.evaluate(&view).unwrap(), table.reports[run][a][i]);
                }
            }
        }
    }

    #[test]
    fn one_sided_rows_ignore_other_training_rows() {
        let (data, mut config) = small_study();
        config.roster.truncate(3);
        let table = run_trend_study(&data, &config).unwrap();
        let order = data.outlier_order(config.base_seed);
        for run in 0..config.runs {
            let seed = rng::run_seed(config.base_seed, run);
            let plan = data.primary_view().stratified_percentage_split(67.0, seed).unwrap();
            let targets_only = plan.train.targets_of();
            for (a, entry) in config.roster.iter().enumerate() {
                let model = TrainedModel::train(&entry.params, entry.normalization, &targets_only, seed).unwrap();
                let view = inject_outliers(&plan.test, &order, 12).unwrap();
                assert_eq!(model.evaluate(&view).unwrap(), table.reports[run][a][3]);
            }
        }
    }

    #[test]
    fn csv_round_trip_and_workers() {
        let (data, config) = small_study();
        let table = run_trend_study(&data, &config).unwrap();
        let parallel = run_trend_study(&data, &TrendStudyConfig { workers: 8, ..config.clone() }).unwrap();
        assert_eq!(table, parallel);
        let text = trend_csv(&table, TrendMetric::Error);
        assert!(text.starts_with("increment,KNN,KNN_sd,KMEANS,KMEANS_sd,OCSVM,OCSVM_sd,BKNN,BKNN_sd\n"));
        let (algorithms, rows) = parse_trend_csv(&text).unwrap();
        assert_eq!(algorithms, table.algorithms);
        for (i, (inc, values)) in rows.iter().enumerate() {
            assert_eq!(*inc, table.increments[i]);
            for (a, (mean, sd)) in values.iter().enumerate() {
                assert!((mean - table.rows[a][i].error).abs() <= 5e-7);
                assert!((sd - table.rows[a][i].error_sd).abs() <= 5e-7);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_trend_csv(&table, dir.path(), "study").unwrap();
        assert_eq!(paths.len(), 2);
        let empty = TrendTable { algorithms: vec![], rows: vec![], ..table };
        assert!(emit_trend_csv(&empty, dir.path(), "none").is_err());
        assert!(run_trend_study(&data, &TrendStudyConfig { roster: vec![], ..config }).is_err());
    }

    #[test]
    fn zero_increment_matches_plain_evaluation() {
        let (data, mut config) = small_study();
        config.increments = vec![0];
        let table = run_trend_study(&data, &config).unwrap();
        let plan = data.primary_view().stratified_percentage_split(67.0, config.base_seed).unwrap();
        let entry = &config.roster[0];
        let model = TrainedModel::train(&entry.params, entry.normalization, &plan.train, config.base_seed).unwrap();
        assert_eq!(table.reports[0][0][0], model.evaluate(&plan.test).unwrap());
    }
}
