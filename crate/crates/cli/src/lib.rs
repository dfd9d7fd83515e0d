//! Pipelines behind the `wca` binary, exposed for tests and scripting.

pub mod commands;
pub mod plot;

pub use commands::{cluster_pipeline, ClusterOptions, ClusterOutcome};
