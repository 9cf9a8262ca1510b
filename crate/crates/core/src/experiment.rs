//! Experiment configuration, model selection, performance estimation and
//! log rendering.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Utc};
use rayon::prelude::*;

use crate::dataset::{ExampleSet, IndexView, SplitPlan};
use crate::error::{Error, Result};
use crate::grid::{echo_line, ParamGrid};
use crate::metrics::{mean_and_sd, ConfusionMatrix, EvalReport};
use crate::model::{AlgorithmKind, ParamSet, TrainedModel};
use crate::preprocess::NormalizationKind;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Technique {
    PerformanceEstimation,
    ModelSelection,
}

impl Technique {
    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "pe" => Some(Technique::PerformanceEstimation),
            "ms" => Some(Technique::ModelSelection),
            _ => None,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Technique::PerformanceEstimation => "Performance Estimation",
            Technique::ModelSelection => "Model Selection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Percentage,
    CrossValidation,
}

impl SplitKind {
    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "ps" => Some(SplitKind::Percentage),
            "cv" => Some(SplitKind::CrossValidation),
            _ => None,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            SplitKind::Percentage => "Percentage Split",
            SplitKind::CrossValidation => "Cross Validation",
        }
    }
}

/// How a view is divided into training and testing parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub kind: SplitKind,
    pub folds: usize,
    pub percent: f64,
}

impl SplitSpec {
    pub fn plans<'a>(&self, view: &IndexView<'a>, seed: u64) -> Result<Vec<SplitPlan<'a>>> {
        match self.kind {
            SplitKind::Percentage => Ok(vec![view.stratified_percentage_split(self.percent, seed)?]),
            SplitKind::CrossValidation => Ok(view.stratified_kfold(self.folds, seed)?.splits().collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub example_set_path: String,
    pub relabel: bool,
    pub relabel_target: Option<String>,
    pub normalization: NormalizationKind,
    pub algorithm: AlgorithmKind,
    pub technique: Technique,
    pub split: SplitKind,
    pub runs: usize,
    pub folds: usize,
    pub seed: u64,
    pub percent: f64,
    pub inner_split: SplitKind,
    pub inner_folds: usize,
    pub inner_percent: f64,
    pub grid: ParamGrid,
    /// Worker threads; results do not depend on this.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            example_set_path: String::new(),
            relabel: false,
            relabel_target: None,
            normalization: NormalizationKind::None,
            algorithm: AlgorithmKind::Knn,
            technique: Technique::PerformanceEstimation,
            split: SplitKind::Percentage,
            runs: 1,
            folds: 3,
            seed: 2,
            percent: 50.0,
            inner_split: SplitKind::Percentage,
            inner_folds: 3,
            inner_percent: 50.0,
            grid: ParamGrid::defaults(AlgorithmKind::Knn),
            workers: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn outer(&self) -> SplitSpec {
        SplitSpec { kind: self.split, folds: self.folds, percent: self.percent }
    }

    pub fn inner(&self) -> SplitSpec {
        SplitSpec { kind: self.inner_split, folds: self.inner_folds, percent: self.inner_percent }
    }

    /// The experiment settings echo block.
    pub fn echo(&self) -> String {
        let mut out = String::from("Experiment Options selected:-\n\n");
        let rows: [(&str, String); 13] = [
            ("-E (Example set path)", self.example_set_path.clone()),
            ("-R (Relabeled?)", self.relabel.to_string()),
            ("-N (Normalized?)", (self.normalization != NormalizationKind::None).to_string()),
            ("-A (Algorithm to use?)", self.algorithm.id().to_string()),
            ("-T (Technique to use?)", self.technique.describe().to_string()),
            ("-S (Example set split?)", self.split.describe().to_string()),
            ("-r (Number of runs?)", self.runs.to_string()),
            ("-F (Number of folds?)", self.folds.to_string()),
            ("-s (Random number seed?)", self.seed.to_string()),
            ("-P (Percentage for split?)", format!("{:?}", self.percent)),
            ("-t (Training set split?)", self.inner_split.describe().to_string()),
            ("-f (Training split folds?)", self.inner_folds.to_string()),
            ("-p (Training split %?)", format!("{:?}", self.inner_percent)),
        ];
        for (key, value) in rows {
            out.push_str(&echo_line(key, &value));
        }
        out
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
    }
}

/// Inner-validation outcome of one grid combination.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationResult {
    pub params: ParamSet,
    pub matrix: ConfusionMatrix,
    /// Mean inner error, or the reason training failed.
    pub error: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub combinations: Vec<CombinationResult>,
    pub best: usize,
}

impl Selection {
    pub fn best_params(&self) -> &ParamSet {
        &self.combinations[self.best].params
    }

    pub fn best_error(&self) -> f64 {
        *self.combinations[self.best].error.as_ref().expect("best combination has an error estimate")
    }

    /// Per-combination matrices followed by the summary block.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.combinations {
            out.push_str(&c.matrix.render_table());
            match &c.error {
                Ok(e) => writeln!(out, "\n{} Error estimate: {e:?}", c.params.summary()).unwrap(),
                Err(why) => writeln!(out, "\n{} Failed: {why}", c.params.summary()).unwrap(),
            }
            out.push_str(&"-".repeat(60));
            out.push_str("\n\n");
        }
        out.push_str("Model Selection Results:\n");
        out.push_str(&"-".repeat(40));
        writeln!(out, "\nSmallest Error Estimate -> {:?}", self.best_error()).unwrap();
        for (spec, value) in self.best_params().rendered() {
            writeln!(out, "Best {} -----> {}", spec.best, value).unwrap();
        }
        out.push_str(&"-".repeat(40));
        out.push('\n');
        out
    }
}

/// Scores every grid combination on inner splits of `train` and returns
/// the one with the smallest mean error; ties keep the earliest.
pub fn model_selection(
    train: &IndexView<'_>,
    grid: &ParamGrid,
    norm: NormalizationKind,
    inner: SplitSpec,
    seed: u64,
) -> Result<Selection> {
    let combos = grid.combinations();
    if combos.is_empty() {
        return Err(Error::Grid("the option grid has no combinations".into()));
    }
    let plans = inner.plans(train, seed)?;
    let combinations: Vec<CombinationResult> = combos
        .into_par_iter()
        .map(|params| {
            let mut matrix = ConfusionMatrix::default();
            let mut errors = Vec::with_capacity(plans.len());
            for plan in &plans {
                match TrainedModel::train(&params, norm, &plan.train, seed).and_then(|m| m.evaluate(&plan.test)) {
                    Ok(report) => {
                        matrix = matrix.add(&report.matrix);
                        errors.push(report.error);
                    }
                    Err(e) => return CombinationResult { params, matrix, error: Err(e.to_string()) },
                }
            }
            let error = Ok(errors.iter().sum::<f64>() / errors.len() as f64);
            CombinationResult { params, matrix, error }
        })
        .collect();
    let mut best: Option<usize> = None;
    for (i, c) in combinations.iter().enumerate() {
        if let Ok(e) = c.error {
            if best.is_none_or(|b| e < *combinations[b].error.as_ref().unwrap()) {
                best = Some(i);
            }
        }
    }
    let Some(best) = best else {
        let why = combinations[0].error.clone().unwrap_err();
        return Err(Error::Training { algorithm: grid.algorithm().id(), message: format!("every combination failed: {why}") });
    };
    Ok(Selection { combinations, best })
}

/// One outer train/test split of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub params: ParamSet,
    pub selection: Option<Selection>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    /// Error and BER averaged over the folds of this run.
    pub error: f64,
    pub ber: f64,
    /// Confusion counts pooled over the folds.
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub runs: Vec<RunResult>,
    pub mean_error: f64,
    pub sd_error: f64,
    pub mean_ber: f64,
    pub sd_ber: f64,
}

fn run_once(set: &ExampleSet, config: &ExperimentConfig, run: usize) -> Result<RunResult> {
    let seed = rng::run_seed(config.seed, run);
    let full = set.full_view();
    let mut folds = Vec::new();
    for plan in config.outer().plans(&full, seed)? {
        let (params, selection) = match config.technique {
            Technique::PerformanceEstimation => (config.grid.combinations()[0].clone(), None),
            Technique::ModelSelection => {
                let s = model_selection(&plan.train, &config.grid, config.normalization, config.inner(), seed)?;
                (s.best_params().clone(), Some(s))
            }
        };
        let model = TrainedModel::train(&params, config.normalization, &plan.train, seed)?;
        let report = model.evaluate(&plan.test)?;
        folds.push(FoldResult {
            train: plan.train.indices().to_vec(),
            test: plan.test.indices().to_vec(),
            params,
            selection,
            report,
        });
    }
    let n = folds.len() as f64;
    let error = folds.iter().map(|f| f.report.error).sum::<f64>() / n;
    let ber = folds.iter().map(|f| f.report.ber).sum::<f64>() / n;
    let pooled = folds.iter().fold(ConfusionMatrix::default(), |acc, f| acc.add(&f.report.matrix));
    Ok(RunResult { run, seed, folds, error, ber, report: EvalReport::from_matrix(pooled)? })
}

/// Runs `config.runs` seeded repetitions, with model selection inside
/// each training split when the technique asks for it.
pub fn performance_estimation(set: &ExampleSet, config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    if config.runs == 0 {
        return Err(Error::Config("an experiment needs at least one run".into()));
    }
    if config.grid.algorithm() != config.algorithm {
        return Err(Error::Config(format!(
            "options are for {} but the algorithm is {}",
            config.grid.algorithm(),
            config.algorithm
        )));
    }
    let runs: Vec<RunResult> = config
        .pool()?
        .install(|| (0..config.runs).into_par_iter().map(|r| run_once(set, config, r)).collect::<Result<_>>())?;
    let errors: Vec<f64> = runs.iter().map(|r| r.error).collect();
    let bers: Vec<f64> = runs.iter().map(|r| r.ber).collect();
    let (mean_error, sd_error) = mean_and_sd(&errors);
    let (mean_ber, sd_ber) = mean_and_sd(&bers);
    Ok(ExperimentOutcome { runs, mean_error, sd_error, mean_ber, sd_ber })
}

/// Model selection over `view` using `config`'s worker count.
pub fn select_with_workers(view: &IndexView<'_>, config: &ExperimentConfig) -> Result<Selection> {
    config
        .pool()?
        .install(|| model_selection(view, &config.grid, config.normalization, config.inner(), config.seed))
}

/// The classifier offered for saving: chosen by model selection over the
/// whole example set (or the first grid combination under performance
/// estimation) and trained on every example.
pub fn train_final(set: &ExampleSet, config: &ExperimentConfig) -> Result<(TrainedModel, Option<Selection>)> {
    let full = set.full_view();
    let (params, selection) = match config.technique {
        Technique::PerformanceEstimation => (config.grid.combinations()[0].clone(), None),
        Technique::ModelSelection => {
            let s = select_with_workers(&full, config)?;
            (s.best_params().clone(), Some(s))
        }
    };
    let model = TrainedModel::train(&params, config.normalization, &full, config.seed)?;
    Ok((model, selection))
}

fn index_list(indices: &[usize]) -> String {
    indices.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// A confusion matrix table followed by its rates.
pub fn render_report(r: &EvalReport) -> String {
    format!(
        "{}Error: {:?} Sensitivity: {:?} Specificity: {:?} BER: {:?}{}\n",
        r.matrix.render_table(),
        r.error,
        r.sensitivity,
        r.specificity,
        r.ber,
        if r.degenerate { " (single-class test split)" } else { "" }
    )
}

/// `<ALGORITHM>_YYYYMMDDThhmmssZ.log`
pub fn log_file_name(algorithm: AlgorithmKind, created: DateTime<Utc>) -> String {
    format!("{}_{}.log", algorithm.id(), created.format("%Y%m%dT%H%M%SZ"))
}

/// Full text of an experiment log.
pub fn render_log(config: &ExperimentConfig, outcome: &ExperimentOutcome) -> String {
    let mut out = String::new();
    out.push_str(&config.grid.echo());
    out.push('\n');
    out.push_str(&config.echo());

    out.push_str("\nTraining and testing instances for each run:-\n");
    for run in &outcome.runs {
        writeln!(out, "\nRun {} (seed {})", run.run + 1, run.seed).unwrap();
        for (k, fold) in run.folds.iter().enumerate() {
            writeln!(out, "Split {} training: {}", k + 1, index_list(&fold.train)).unwrap();
            writeln!(out, "Split {} testing: {}", k + 1, index_list(&fold.test)).unwrap();
        }
    }

    out.push_str("\nBest parameters and error estimate for each run:-\n");
    for run in &outcome.runs {
        for (k, fold) in run.folds.iter().enumerate() {
            writeln!(out, "\nRun {} split {}", run.run + 1, k + 1).unwrap();
            if let Some(selection) = &fold.selection {
                out.push_str(&selection.render());
            }
            writeln!(out, "{} Error estimate: {:?}", fold.params.summary(), fold.report.error).unwrap();
        }
    }

    out.push_str("\nMatrices for each run:-\n");
    for run in &outcome.runs {
        for (k, fold) in run.folds.iter().enumerate() {
            writeln!(out, "\nRun {} split {}", run.run + 1, k + 1).unwrap();
            out.push_str(&render_report(&fold.report));
        }
    }

    writeln!(
        out,
        "\nMean error over {} runs: {:?} (sd {:?})\nMean BER over {} runs: {:?} (sd {:?})",
        outcome.runs.len(),
        outcome.mean_error,
        outcome.sd_error,
        outcome.runs.len(),
        outcome.mean_ber,
        outcome.sd_ber
    )
    .unwrap();
    out
}

pub fn write_log(config: &ExperimentConfig, outcome: &ExperimentOutcome, path: &Path) -> Result<()> {
    std::fs::write(path, render_log(config, outcome))?;
    Ok(())
}
