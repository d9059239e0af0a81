//! Library side of the `bmhull` command-line tool: configuration, reports,
//! verification suites and the command implementations.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;
