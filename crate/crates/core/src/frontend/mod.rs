//! Equation files, command dispatch and reports.

pub mod cli;
pub mod dsl;
pub mod report;

pub use cli::run_command;
pub use dsl::{parse_system, print_system, SourceSystem};
