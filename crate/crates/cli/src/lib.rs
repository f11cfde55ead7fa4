//! Experiment runner for `besov-trace`: TOML configs, check suites and
//! JSON/CSV/SVG reports.

pub mod config;
pub mod corpus;
pub mod reference;
pub mod report;
pub mod suites;
pub mod svg;
