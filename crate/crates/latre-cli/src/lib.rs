//! Command-line harness over the estimation library: dataset simulation,
//! single-run estimation, replication studies with error metrics, and data
//! validation. All canonical output is JSON or CSV on stdout/files; progress
//! and human-readable tables go to stderr.

pub mod config;
pub mod csvio;
pub mod metrics;
pub mod report;
pub mod run;
