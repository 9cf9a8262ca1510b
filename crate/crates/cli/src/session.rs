//! Interactive flows: running an experiment from parsed options, and
//! classifying a test set with a saved classifier.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::Utc;
use oscail_core::arff::{self, parse_arff_report};
use oscail_core::experiment::{self, ExperimentOutcome, Technique};
use oscail_core::grid::{grid_help, parse_param_grid, ParamGrid};
use oscail_core::model::{AlgorithmKind, TrainedModel};
use oscail_core::oscal;
use oscail_core::{Error, EvalReport, ExampleSet, Result};

use crate::options::{usage, CliInvocation, LOAD_PROMPT};
use crate::prompt::Prompter;

pub const GRID_PROMPT: &str = "Please type out a single string to set the options,\n\
as described above. Otherwise, the defaults will be chosen.\n\
(Press Enter with no text to skip this step.)\n:";

pub const SAVE_PROMPT: &str = "Would you like to save this classifier?(yes/no):";

/// What a completed session produced.
#[derive(Debug)]
pub enum SessionResult {
    Experiment { outcome: ExperimentOutcome, log: PathBuf, saved: Option<PathBuf> },
    SavedClassifier(EvalReport),
    Nothing,
}

fn no_answer(what: &str) -> Error {
    Error::Config(format!("input ended while waiting for {what}"))
}

/// Reads an example set, asking for another path until one loads.
pub fn load_example_set(p: &mut Prompter, path: &str) -> Result<(ExampleSet, String)> {
    let mut path = path.to_string();
    loop {
        let loaded = fs::read_to_string(&path).map_err(Error::from).and_then(|text| parse_arff_report(&text));
        match loaded {
            Ok(parsed) => {
                if !parsed.skipped_missing.is_empty() {
                    p.say(&format!(
                        "Skipped {} rows with missing values (data lines {:?}).",
                        parsed.skipped_missing.len(),
                        parsed.skipped_missing
                    ))?;
                }
                return Ok((parsed.set, path));
            }
            Err(e) => {
                p.say(&format!("Could not load the example set \"{path}\": {e}"))?;
                path = p.ask("Please enter the path to the example set:")?.ok_or_else(|| no_answer("an example set path"))?;
            }
        }
    }
}

/// Makes sure the set has exactly the classes Target and Other, relabelling
/// or loading another set as the user chooses. Returns the set, its path
/// and the chosen target class if relabelling happened.
pub fn ensure_one_sided(
    p: &mut Prompter,
    mut set: ExampleSet,
    mut path: String,
    relabel: bool,
    mut target: Option<String>,
    out_dir: &Path,
) -> Result<(ExampleSet, String, Option<String>)> {
    if !relabel && arff::is_one_sided(&set) {
        return Ok((set, path, None));
    }
    if !relabel {
        p.say("The example set does not have exactly one Target class and one Other class.")?;
    }
    loop {
        let classes = set.class_values().join(", ");
        let answer = match target.take() {
            Some(t) => t,
            None => p
                .ask(&format!(
                    "Enter the name of the target class ({classes}), or the path to a different example set:"
                ))?
                .ok_or_else(|| no_answer("a target class"))?,
        };
        if set.class_values().iter().any(|v| *v == answer) {
            let (relabelled, prov) = arff::relabel(&set, &answer)?;
            if !arff::is_one_sided(&relabelled) {
                p.say(&format!("No example has the class \"{answer}\"."))?;
                continue;
            }
            let file = out_dir.join(format!("{}_relabelled.arff", set.relation()));
            fs::write(&file, arff::write_arff(&relabelled, Some(&prov)))?;
            p.say(&format!("Relabelled example set written to {}", file.display()))?;
            return Ok((relabelled, path, Some(answer)));
        }
        if Path::new(&answer).is_file() {
            let (next, next_path) = load_example_set(p, &answer)?;
            if !relabel && arff::is_one_sided(&next) {
                return Ok((next, next_path, None));
            }
            set = next;
            path = next_path;
            continue;
        }
        p.say(&format!("\"{answer}\" is neither a class of this example set nor a readable file."))?;
    }
}

/// Shows the algorithm's options and reads one option string, unless
/// `supplied` already holds it.
pub fn prompt_grid(p: &mut Prompter, algorithm: AlgorithmKind, supplied: Option<&str>) -> Result<ParamGrid> {
    let text = match supplied {
        Some(t) => t.to_string(),
        None => {
            p.say(&grid_help(algorithm))?;
            p.ask(GRID_PROMPT)?.unwrap_or_default()
        }
    };
    let (grid, notices) = parse_param_grid(algorithm, &text);
    for n in notices {
        p.say(&n)?;
    }
    Ok(grid)
}

/// Loads a saved classifier and a test set (asking again after bad paths)
/// and prints the evaluation.
pub fn saved_classifier_flow(
    p: &mut Prompter,
    model_path: Option<String>,
    test_path: Option<String>,
    target: Option<String>,
    out_dir: &Path,
) -> Result<EvalReport> {
    let mut model_path = model_path;
    let model: TrainedModel = loop {
        let path = match model_path.take() {
            Some(path) => path,
            None => p
                .ask("Please enter the path to the saved classifier:")?
                .ok_or_else(|| no_answer("a classifier path"))?,
        };
        match oscal::load_model(Path::new(&path)) {
            Ok(m) => break m,
            Err(e) => p.say(&format!("Could not load the classifier \"{path}\": {e}"))?,
        }
    };
    p.say(&format!("Loaded {} classifier: {}", model.algorithm(), model.params().summary()))?;
    let path = match test_path {
        Some(path) => path,
        None => p.ask("Please enter the path to the test set:")?.ok_or_else(|| no_answer("a test set path"))?,
    };
    let (set, path) = load_example_set(p, &path)?;
    let (set, _, _) = ensure_one_sided(p, set, path, false, target, out_dir)?;
    let report = model.evaluate(&set.full_view())?;
    p.say(&experiment::render_report(&report))?;
    Ok(report)
}

/// Runs the experiment described by `inv`, writing a log (and optionally a
/// saved classifier) into its output directory.
pub fn run_experiment(p: &mut Prompter, mut inv: CliInvocation) -> Result<SessionResult> {
    fs::create_dir_all(&inv.out_dir)?;
    let (set, path) = load_example_set(p, &inv.config.example_set_path)?;
    let (set, path, target) =
        ensure_one_sided(p, set, path, inv.config.relabel, inv.target.take(), &inv.out_dir)?;
    let config = &mut inv.config;
    config.example_set_path = path;
    if let Some(t) = target {
        config.relabel = true;
        config.relabel_target = Some(t);
    }
    config.grid = prompt_grid(p, config.algorithm, inv.grid_text.as_deref())?;
    p.say(&config.grid.echo())?;
    p.say(&config.echo())?;

    let outcome = experiment::performance_estimation(&set, config)?;
    for run in &outcome.runs {
        for (k, fold) in run.folds.iter().enumerate() {
            p.say(&format!("Run {} split {} (seed {})", run.run + 1, k + 1, run.seed))?;
            if let Some(selection) = &fold.selection {
                p.say(&selection.render())?;
            }
            p.say(&format!("{}\n{}", fold.params.summary(), experiment::render_report(&fold.report)))?;
        }
    }
    p.say(&format!(
        "Mean error over {} runs: {:?} (sd {:?})\nMean BER over {} runs: {:?} (sd {:?})",
        outcome.runs.len(),
        outcome.mean_error,
        outcome.sd_error,
        outcome.runs.len(),
        outcome.mean_ber,
        outcome.sd_ber
    ))?;
    let log = inv.out_dir.join(experiment::log_file_name(config.algorithm, Utc::now()));
    experiment::write_log(config, &outcome, &log)?;
    p.say(&format!("Log written to {}", log.display()))?;

    let save = match (inv.save, config.technique) {
        (Some(answer), _) => answer,
        (None, Technique::ModelSelection) => p.ask_yes_no(SAVE_PROMPT)?,
        (None, Technique::PerformanceEstimation) => false,
    };
    let saved = if save {
        let (model, selection) = experiment::train_final(&set, config)?;
        if let Some(s) = selection {
            p.say("Model selection over the whole example set:")?;
            p.say(&s.render())?;
        }
        let file = oscal::save_model(&model, &inv.out_dir)?;
        p.say(&format!("Classifier saved to {}", file.display()))?;
        Some(file)
    } else {
        None
    };
    Ok(SessionResult::Experiment { outcome, log, saved })
}

/// Entry point for the option-switch interface.
pub fn run(p: &mut Prompter, inv: CliInvocation) -> Result<SessionResult> {
    for n in &inv.notices {
        p.say(n)?;
    }
    if inv.example_set_given {
        return run_experiment(p, inv);
    }
    let text = usage();
    p.say(text.strip_suffix(LOAD_PROMPT).unwrap_or(&text).trim_end())?;
    p.say("")?;
    if p.ask_yes_no(LOAD_PROMPT)? {
        fs::create_dir_all(&inv.out_dir)?;
        let report = saved_classifier_flow(p, None, None, inv.target, &inv.out_dir)?;
        Ok(SessionResult::SavedClassifier(report))
    } else {
        p.say("No example set given. Start again with -E <path> to run an experiment.")?;
        Ok(SessionResult::Nothing)
    }
}
