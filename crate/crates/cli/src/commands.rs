//! Batch subcommands: trend studies and dataset preparation.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use oscail_core::arff::{parse_arff, write_arff};
use oscail_core::harness::{self, digits, synthetic, StudyData, TrendMetric, TrendStudyConfig};
use oscail_core::{ExampleSet, Result};

#[derive(Debug, Parser)]
#[command(name = "oscail", about = "One-sided classification experiments")]
pub struct Batch {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error and BER as unexpected outliers are added to the test sets.
    Study {
        #[command(subcommand)]
        kind: StudyKind,
    },
    /// Writes the digit study's two ARFF files from the raw feature file.
    ConvertDigits {
        #[arg(long, default_value = "data/mfeat-fac")]
        data: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Writes the synthetic mixture sets as ARFF files.
    SynthSolvent {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum StudyKind {
    /// Digit 2 against digit 3, other digits as unexpected outliers.
    Digits {
        #[arg(long, default_value = "data/mfeat-fac")]
        data: PathBuf,
        #[command(flatten)]
        common: StudyArgs,
    },
    /// Synthetic mixture spectra with an unseen outlier distribution.
    Mixtures {
        #[arg(long, default_value_t = 7)]
        data_seed: u64,
        #[command(flatten)]
        common: StudyArgs,
    },
    /// Any primary/secondary ARFF pair with one of the built-in rosters.
    Files {
        #[arg(long)]
        primary: PathBuf,
        #[arg(long)]
        secondary: PathBuf,
        #[arg(long, value_enum, default_value_t = Roster::Mixtures)]
        roster: Roster,
        /// Comma-separated outlier counts, starting at 0.
        #[arg(long, value_delimiter = ',', default_value = "0,10,20,30,40,50")]
        increments: Vec<usize>,
        #[command(flatten)]
        common: StudyArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Roster {
    Digits,
    Mixtures,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 2)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// File name prefix for the CSV and manifest outputs.
    #[arg(long)]
    stem: Option<String>,
}

pub const NAMES: [&str; 3] = ["study", "convert-digits", "synth-solvent"];

fn read_arff(path: &Path) -> Result<ExampleSet> {
    parse_arff(&fs::read_to_string(path)?)
}

fn write_set(dir: &Path, set: &ExampleSet) -> Result<PathBuf> {
    let path = dir.join(format!("{}.arff", set.relation()));
    fs::write(&path, write_arff(set, None))?;
    Ok(path)
}

fn study(data: StudyData, mut config: TrendStudyConfig, common: StudyArgs, stem: &str) -> Result<Vec<String>> {
    config.runs = common.runs;
    config.base_seed = common.seed;
    config.workers = common.workers;
    let stem = common.stem.unwrap_or_else(|| stem.to_string());
    fs::create_dir_all(&common.out_dir)?;
    let table = harness::run_trend_study(&data, &config)?;
    let mut lines = vec![
        format!("Mean error % (sd) over {} runs", config.runs),
        table.render(TrendMetric::Error),
        format!("Mean BER % (sd) over {} runs", config.runs),
        table.render(TrendMetric::Ber),
    ];
    for path in harness::emit_trend_csv(&table, &common.out_dir, &stem)? {
        lines.push(format!("Wrote {}", path.display()));
    }
    let manifest = common.out_dir.join(format!("{stem}_manifest.txt"));
    fs::write(&manifest, config.manifest())?;
    lines.push(format!("Wrote {}", manifest.display()));
    Ok(lines)
}

/// Runs a subcommand and returns the lines to print.
pub fn execute(batch: Batch) -> Result<Vec<String>> {
    match batch.command {
        Command::Study { kind } => match kind {
            StudyKind::Digits { data, common } => {
                let rows = digits::load_mfeat(&data)?;
                let data = StudyData::new(&digits::primary_set(&rows)?, &digits::secondary_set(&rows)?)?;
                study(data, TrendStudyConfig::digits(), common, "digits")
            }
            StudyKind::Mixtures { data_seed, common } => {
                let (primary, unexpected) =
                    synthetic::generate(&synthetic::SyntheticConfig { seed: data_seed, ..Default::default() })?;
                study(StudyData::new(&primary, &unexpected)?, TrendStudyConfig::mixtures(), common, "mixtures")
            }
            StudyKind::Files { primary, secondary, roster, increments, common } => {
                let data = StudyData::new(&read_arff(&primary)?, &read_arff(&secondary)?)?;
                let base = match roster {
                    Roster::Digits => TrendStudyConfig::digits(),
                    Roster::Mixtures => TrendStudyConfig::mixtures(),
                };
                study(data, TrendStudyConfig { increments, ..base }, common, "study")
            }
        },
        Command::ConvertDigits { data, out_dir } => {
            let rows = digits::load_mfeat(&data)?;
            fs::create_dir_all(&out_dir)?;
            let a = write_set(&out_dir, &digits::primary_set(&rows)?)?;
            let b = write_set(&out_dir, &digits::secondary_set(&rows)?)?;
            Ok(vec![format!("Wrote {}", a.display()), format!("Wrote {}", b.display())])
        }
        Command::SynthSolvent { seed, out_dir } => {
            let (primary, unexpected) = synthetic::generate(&synthetic::SyntheticConfig { seed, ..Default::default() })?;
            fs::create_dir_all(&out_dir)?;
            let a = write_set(&out_dir, &primary)?;
            let b = write_set(&out_dir, &unexpected)?;
            Ok(vec![format!("Wrote {}", a.display()), format!("Wrote {}", b.display())])
        }
    }
}
