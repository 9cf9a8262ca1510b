//! Command-line front end: the option-switch experimenter plus batch
//! subcommands for trend studies.

pub mod commands;
pub mod options;
pub mod prompt;
pub mod session;
