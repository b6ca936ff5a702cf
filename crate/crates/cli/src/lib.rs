//! Library side of the `ccreduce` command: batch pipeline, plan artifacts
//! and aggregate reporting.

pub mod commands;
pub mod pipeline;
pub mod report;

pub use pipeline::{run_pipeline, MethodReport, PlanFile, RowStatus, Settings};
pub use report::aggregate_report;
