//! The experimenter's command-line switches.
//!
//! Parsing never fails: a bad or missing value leaves the option at its
//! default and adds a notice for the user.

use std::path::PathBuf;

use oscail_core::experiment::{ExperimentConfig, SplitKind, Technique};
use oscail_core::grid::ParamGrid;
use oscail_core::model::AlgorithmKind;
use oscail_core::preprocess::NormalizationKind;

pub const BANNER: &str = "\
-----
--- OSCAIL - One Sided Classification and Inductive Learning ---
-----
----- Experimentor Version 1.0 -----
-----
";

pub const LOAD_PROMPT: &str = "Would you like to load a previously saved classifier? (yes/no):";

/// Usage block shown when the program is started without arguments.
pub fn usage() -> String {
    let mut out = String::from(BANNER);
    out.push_str("OSCAIL option usage details:\n\n");
    let rows: [(&str, &str); 13] = [
        ("-E <Path to the example set>", "The example set to use in the experiment."),
        ("-R <yes/no>", "Relabel the example set after loading? (default: no)."),
        ("-N <yes/no>", "Normalize the example set? (default: no)."),
        ("-A <algorithm name?>", "Which algorithm to use?: (default:KNN)"),
        ("-T <technique choice?>", "Enter pe for Performance Estimation or ms for Model Selection (default: pe)."),
        ("-S <ps/cv>", "Enter ps for percentage split or cv for cross validation (default: ps)."),
        ("-r <Number of runs>", "The amount of runs in the experiment (default: 1)."),
        ("-F <Number of folds>", "The amount of folds in the experiment (for cross validation) (default: 3)."),
        ("-s <Initial random number seed>", "The initial random number generator seed for shuffling (default: 2)"),
        ("-P <Percentage split percent>", "The percent used for the percentage split of the example set (default: 50)"),
        (
            "-t <Training split used?>",
            "Which way the training set with be split (percentage split or cross validation) (default: ps)",
        ),
        ("-f <Training split folds?>", "Amount of folds used for the split of the training examples (default: 3)"),
        ("-p <Training split percentage?>", "Percentage used for the split of the training examples (default: 50)"),
    ];
    for (switch, help) in rows {
        out.push_str(&format!("{switch}\n    {help}\n"));
    }
    out.push_str("\nAlgorithms: ");
    out.push_str(&AlgorithmKind::ALL.iter().map(|a| a.id()).collect::<Vec<_>>().join(", "));
    out.push_str(
        "\nOther options: --grid <option string> --target <class> --save <yes/no> --out-dir <dir> \
         --workers <n> --answers <file>\n\n",
    );
    out.push_str(LOAD_PROMPT);
    out
}

/// A parsed command line plus everything the session still has to ask.
#[derive(Debug, Clone, PartialEq)]
pub struct CliInvocation {
    pub config: ExperimentConfig,
    pub notices: Vec<String>,
    /// Whether `-E` was present; without it the session offers to load a
    /// saved classifier instead of running an experiment.
    pub example_set_given: bool,
    /// Option string for the algorithm's parameters; prompted for when absent.
    pub grid_text: Option<String>,
    /// Answer to the relabel prompt.
    pub target: Option<String>,
    /// Answer to the save-classifier prompt.
    pub save: Option<bool>,
    pub out_dir: PathBuf,
    /// File whose lines answer prompts in place of standard input.
    pub answers: Option<PathBuf>,
}

impl Default for CliInvocation {
    fn default() -> Self {
        CliInvocation {
            config: ExperimentConfig::default(),
            notices: Vec::new(),
            example_set_given: false,
            grid_text: None,
            target: None,
            save: None,
            out_dir: PathBuf::from("."),
            answers: None,
        }
    }
}

fn is_switch(token: &str) -> bool {
    let mut chars = token.chars();
    chars.next() == Some('-') && chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '-')
}

pub fn parse_yes_no(token: &str) -> Option<bool> {
    match token.trim().to_ascii_lowercase().as_str() {
        "yes" | "y" | "true" => Some(true),
        "no" | "n" | "false" => Some(false),
        _ => None,
    }
}

fn parse_percent(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|p| *p > 0.0 && *p < 100.0)
}

fn parse_count(token: &str, least: usize) -> Option<usize> {
    token.parse::<usize>().ok().filter(|n| *n >= least)
}

/// Parses the argument list (without the program name).
pub fn parse_cli(args: &[String]) -> CliInvocation {
    let mut inv = CliInvocation::default();
    let defaults = ExperimentConfig::default();
    let mut i = 0;
    while i < args.len() {
        let switch = args[i].as_str();
        if !is_switch(switch) {
            inv.notices.push(format!("Ignoring \"{switch}\": values must follow a switch."));
            i += 1;
            continue;
        }
        // The option string for --grid is itself made of switches.
        let value = args.get(i + 1).filter(|v| switch == "--grid" || !is_switch(v)).map(String::as_str);
        i += if value.is_some() { 2 } else { 1 };
        let Some(value) = value else {
            inv.notices.push(format!("No value given for {switch}; the default is used."));
            if switch == "-E" {
                inv.example_set_given = true;
            }
            continue;
        };
        let c = &mut inv.config;
        let ok = match switch {
            "-E" => {
                c.example_set_path = value.to_string();
                inv.example_set_given = true;
                true
            }
            "-R" => parse_yes_no(value).map(|v| c.relabel = v).is_some(),
            "-N" => match parse_yes_no(value) {
                Some(true) => {
                    c.normalization = NormalizationKind::PerInstance;
                    true
                }
                Some(false) => {
                    c.normalization = NormalizationKind::None;
                    true
                }
                None => NormalizationKind::from_token(value).map(|k| c.normalization = k).is_some(),
            },
            "-A" => AlgorithmKind::from_id(value).map(|a| c.algorithm = a).is_some(),
            "-T" => Technique::from_token(value).map(|t| c.technique = t).is_some(),
            "-S" => SplitKind::from_token(value).map(|k| c.split = k).is_some(),
            "-r" => parse_count(value, 1).map(|n| c.runs = n).is_some(),
            "-F" => parse_count(value, 2).map(|n| c.folds = n).is_some(),
            "-s" => value.parse::<u64>().ok().map(|s| c.seed = s).is_some(),
            "-P" => parse_percent(value).map(|p| c.percent = p).is_some(),
            "-t" => SplitKind::from_token(value).map(|k| c.inner_split = k).is_some(),
            "-f" => parse_count(value, 2).map(|n| c.inner_folds = n).is_some(),
            "-p" => parse_percent(value).map(|p| c.inner_percent = p).is_some(),
            "--workers" => parse_count(value, 1).map(|n| c.workers = n).is_some(),
            "--grid" => {
                inv.grid_text = Some(value.to_string());
                true
            }
            "--target" => {
                inv.target = Some(value.to_string());
                true
            }
            "--save" => parse_yes_no(value).map(|v| inv.save = Some(v)).is_some(),
            "--out-dir" => {
                inv.out_dir = PathBuf::from(value);
                true
            }
            "--answers" => {
                inv.answers = Some(PathBuf::from(value));
                true
            }
            _ => {
                inv.notices.push(format!("Unknown switch {switch}; ignoring it and its value \"{value}\"."));
                continue;
            }
        };
        if !ok {
            inv.notices.push(format!(
                "Invalid value \"{value}\" for {switch}; using the default ({}).",
                default_text(switch, &defaults)
            ));
        }
    }
    inv.config.grid = ParamGrid::defaults(inv.config.algorithm);
    inv
}

fn default_text(switch: &str, d: &ExperimentConfig) -> String {
    match switch {
        "-R" => "no".into(),
        "-N" => "no".into(),
        "-A" => d.algorithm.id().into(),
        "-T" => "pe".into(),
        "-S" | "-t" => "ps".into(),
        "-r" => d.runs.to_string(),
        "-F" => d.folds.to_string(),
        "-s" => d.seed.to_string(),
        "-P" => d.percent.to_string(),
        "-f" => d.inner_folds.to_string(),
        "-p" => d.inner_percent.to_string(),
        "--workers" => d.workers.to_string(),
        "--save" => "ask".into(),
        _ => "unset".into(),
    }
}
