//! Driver layer for the quarc classifier: dataset snapshots, run
//! configuration, checkpoints, CSV reports, and the command implementations
//! behind the `quarc` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod loaders;
pub mod parallel;
pub mod report;
pub mod timer;
