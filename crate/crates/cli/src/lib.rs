//! Instance files, reports and the `pricer` subcommands.

pub mod commands;
pub mod gen;
pub mod report;
pub mod schema;
