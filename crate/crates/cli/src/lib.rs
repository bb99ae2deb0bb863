//! Command-line front end for `sparsecluster`.

pub mod commands;
pub mod config;
pub mod ingest;
pub mod report;
