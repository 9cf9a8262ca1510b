use std::fs::File;
use std::io::{self, BufReader};
use std::process::ExitCode;

use clap::Parser;
use oscail_cli::commands::{self, Batch};
use oscail_cli::options::parse_cli;
use oscail_cli::prompt::Prompter;
use oscail_cli::session;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();

    if args.first().is_some_and(|a| commands::NAMES.contains(&a.as_str()) || a == "help") {
        let batch = Batch::parse();
        return match commands::execute(batch) {
            Ok(lines) => {
                for line in lines {
                    println!("{line}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        };
    }

    let inv = parse_cli(&args);
    let stdout = io::stdout();
    let result = match &inv.answers {
        Some(path) => match File::open(path) {
            Ok(f) => session::run(&mut Prompter::new(BufReader::new(f), stdout.lock()), inv),
            Err(e) => {
                eprintln!("error: cannot open answers file {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        },
        None => session::run(&mut Prompter::new(io::stdin().lock(), stdout.lock()), inv),
    };
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
