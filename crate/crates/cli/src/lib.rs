//! Library behind the `cone-ext` binary: model loading, analysis
//! pipelines, deterministic reports and the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod models;
pub mod report;

pub use error::CliError;
pub use report::Report;
