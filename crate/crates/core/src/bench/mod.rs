//! Benchmark instances, the run harness and reporting.

pub mod dataset;
pub mod generator;
pub mod harness;
pub mod profile;
pub mod report;
